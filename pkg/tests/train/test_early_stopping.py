import math

import numpy as np
import pytest

from hetshare.train import EarlyStopping, reference_stop_epoch


def _run(scores, patience, max_epochs):
    stopper = EarlyStopping(patience)
    for epoch, score in enumerate(scores[:max_epochs], start=1):
        stopper.update(epoch, score)
        if stopper.should_stop:
            break
    return stopper.epoch, stopper.best_epoch


def test_stops_after_patience():
    stopper = EarlyStopping(patience=2)
    updates = [stopper.update(e, s) for e, s in enumerate([1, 2, 3, 3, 3], start=1)]
    assert updates == [True, True, True, False, False]
    assert stopper.should_stop
    assert (stopper.best_epoch, stopper.best_score) == (3, 3)


def test_earliest_maximum_wins():
    assert _run([0.5, 0.9, 0.9, 0.9, 0.1], patience=3, max_epochs=10) == (5, 2)


def test_nan_never_improves():
    stopper = EarlyStopping(patience=5)
    assert not stopper.update(1, math.nan)
    assert stopper.best_epoch == 0
    assert not stopper.should_stop
    assert stopper.update(2, 0.0)


@pytest.mark.parametrize("patience", [0, -1, 1.5])
def test_invalid_patience(patience):
    with pytest.raises(EarlyStopping.InvalidPatience):
        EarlyStopping(patience)


def test_matches_reference_rule():
    rng = np.random.default_rng(2024)
    for case in range(1000):
        length = int(rng.integers(1, 200))
        if case % 2:
            scores = rng.integers(0, 6, size=length).astype(float)
        else:
            # slow upward drift with noise, so late improvements occur
            scores = np.cumsum(rng.normal(0.01, 1.0, size=length))
        patience = 40 if case % 4 == 0 else int(rng.integers(1, 10))
        max_epochs = int(rng.integers(1, 200))
        scores = scores.tolist()
        expected = reference_stop_epoch(scores, patience, max_epochs)
        assert _run(scores, patience, max_epochs) == expected, (case, patience, max_epochs)


def test_patience_forty_waits_forty_epochs():
    scores = [1.0] + [0.5] * 60
    assert _run(scores, patience=40, max_epochs=200) == (41, 1)
    assert reference_stop_epoch(scores, 40, 200) == (41, 1)

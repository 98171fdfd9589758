import math
from typing import Optional, Sequence, Tuple


class EarlyStopping:
    """Tracks the best validation score and decides when to stop.

    Only a strictly greater score counts as an improvement, so the best epoch
    is the earliest among equal maxima. Training stops once
    `epoch - best_epoch >= patience`.

    Example:
        >>> stopper = EarlyStopping(patience=2)
        >>> [stopper.update(e, s) for e, s in enumerate([1, 2, 3, 3, 3], start=1)]
        [True, True, True, False, False]
        >>> stopper.should_stop, stopper.best_epoch
        (True, 3)
    """

    class InvalidPatience(Exception):
        def __init__(self, patience, message=None):
            if message is None:
                message = f"Patience must be a positive integer, got {patience!r}."
            super().__init__(message)

    def __init__(self, patience: int):
        if not isinstance(patience, int) or patience < 1:
            raise EarlyStopping.InvalidPatience(patience)
        self.patience = patience
        self.best_score: Optional[float] = None
        self.best_epoch = 0
        self.epoch = 0

    @property
    def epochs_since_best(self) -> int:
        return self.epoch - self.best_epoch

    @property
    def should_stop(self) -> bool:
        return self.best_epoch > 0 and self.epochs_since_best >= self.patience

    def update(self, epoch: int, score: float) -> bool:
        """Records the score of an epoch; returns whether it is a new best.

        A NaN score never improves.
        """
        self.epoch = epoch
        if math.isnan(score):
            return False
        if self.best_score is None or score > self.best_score:
            self.best_score = score
            self.best_epoch = epoch
            return True
        return False


def reference_stop_epoch(
    scores: Sequence[float], patience: int, max_epochs: int
) -> Tuple[int, int]:
    """The stop and best epoch a score sequence leads to, from the stopping rule directly.

    Epoch `e` (counted from 1) stops training when `e - argmax(scores[:e]) >= patience`
    with the earliest argmax, or when `e` reaches `max_epochs` or the end of the scores.

    Returns:
        `(stop_epoch, best_epoch)`.
    """
    last = min(max_epochs, len(scores))
    for e in range(1, last + 1):
        seen = list(scores[:e])
        best = seen.index(max(seen)) + 1
        if e - best >= patience or e == last:
            return e, best
    return 0, 0

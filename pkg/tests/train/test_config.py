import pytest

from hetshare.model import ConfigError
from hetshare.train import TrainConfig, train_preset


@pytest.mark.parametrize(
    "changes, field",
    [
        (dict(max_epochs=0), "max_epochs"),
        (dict(patience=0), "patience"),
        (dict(lr_grid=[]), "lr_grid"),
        (dict(lr_grid=[0.0]), "lr_grid"),
        (dict(wd_grid=[-1e-3]), "wd_grid"),
        (dict(batch_targets=0), "batch_targets"),
        (dict(pos_ratio=1.0), "pos_ratio"),
        (dict(eval_metric="accuracy"), "eval_metric"),
        (dict(split_ratios=(0.5, 0.5)), "split_ratios"),
        (dict(precision="float16"), "precision"),
    ],
)
def test_validate_names_the_field(changes, field):
    with pytest.raises(ConfigError) as error:
        TrainConfig(**changes).validate()
    assert error.value.field == field


def test_defaults():
    config = TrainConfig().validate()
    assert not config.sampled
    assert config.dtype.name == "float32"
    assert config.split_ratios == (0.6, 0.2, 0.2)


def test_serialize_round_trip(tmp_path):
    config = TrainConfig(
        max_epochs=7, hop_budgets={"paper": [3, 2]}, selection_task="topic", precision="float64"
    )
    path = tmp_path / "train.json"
    config.serialize(str(path))
    loaded = TrainConfig.from_file(path)
    assert loaded == config
    assert loaded.sampled


def test_deserialize_rejects_unknown_fields():
    with pytest.raises(ConfigError) as error:
        TrainConfig.deserialize('{"epochs": 3}')
    assert error.value.field == "epochs"


def test_presets():
    assert train_preset("sampled").hop_budgets == [10, 5]
    assert train_preset("smoke", seed=4).seed == 4
    with pytest.raises(ConfigError):
        train_preset("marathon")


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        TrainConfig.from_file(tmp_path / "absent.json")
    with pytest.raises(ConfigError, match="malformed JSON"):
        TrainConfig.deserialize("[1, 2")

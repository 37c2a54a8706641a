import pytest
import yaml

from viewmix.config import (
    apply_overrides,
    build_config,
    default_config_text,
    load_config,
    parse_override,
    with_output_size,
)
from viewmix.errors import ConfigError, ParameterError
from viewmix.multiview import MultiViewConfig
from viewmix.transforms import default_pipeline


def test_default_file_matches_code_defaults():
    cfg = load_config()
    assert cfg.pipeline == default_pipeline()
    assert cfg.multiview == MultiViewConfig()
    assert cfg.seed is None and cfg.threads == 1
    assert cfg.bench.batch_size == 128 and cfg.bench.repeats == 3
    assert cfg.augment.batch_size == 128


def test_default_text_is_valid_yaml():
    data = yaml.safe_load(default_config_text())
    assert set(data) <= {"seed", "threads", "dataset", "pipeline", "multiview", "augment", "bench"}


def test_parse_override_values():
    assert parse_override("a.b=0.5") == (["a", "b"], 0.5)
    assert parse_override("x=[1, 2]") == (["x"], [1, 2])
    assert parse_override("x=null") == (["x"], None)
    assert parse_override("x=") == (["x"], None)
    assert parse_override("s=cutout") == (["s"], "cutout")
    for bad in ("novalue", "=3", "a..b=1"):
        with pytest.raises(ConfigError):
            parse_override(bad)


def test_last_override_wins():
    out = apply_overrides({"seed": 1}, ["seed=2", "seed=3"])
    assert out["seed"] == 3
    with pytest.raises(ConfigError):
        apply_overrides({"seed": 1}, ["seed.x=2"])


def test_overrides_reach_sections():
    cfg = load_config(overrides=[
        "seed=9", "threads=4", "multiview.strategy=cutout", "pipeline.solarize.probability=0",
        "pipeline.output_size=24", "bench.strategies=[baseline, viewmix]",
    ])
    assert cfg.seed == 9 and cfg.threads == 4
    assert cfg.multiview.strategy == "cutout"
    assert cfg.pipeline.steps[-1].probability == 0.0
    assert cfg.multiview.base_pipeline.output_size == 24
    assert cfg.bench.strategies == ("baseline", "viewmix") and cfg.bench.threads == 4


@pytest.mark.parametrize("override", [
    "colour=1", "dataset.url=x", "multiview.views=3", "augment.size=2",
    "bench.gpu=true", "pipeline.blur.probability=1", "pipeline.solarize.level=2",
])
def test_unknown_keys_rejected(override):
    with pytest.raises(ConfigError):
        load_config(overrides=[override])


@pytest.mark.parametrize("override,err", [
    ("seed=1.5", ConfigError), ("seed=true", ConfigError), ("threads=0", ConfigError),
    ("multiview.r_min=0.9", ParameterError), ("pipeline.solarize.probability=2", ParameterError),
    ("dataset.format=hdf5", ConfigError), ("augment.layout=nchw", ConfigError),
    ("bench.repeats=0", ParameterError),
])
def test_bad_values(override, err):
    with pytest.raises(err):
        load_config(overrides=[override])


def test_file_and_errors(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("seed: 5\nmultiview:\n  num_views: 4\n")
    cfg = load_config(p, ["seed=6"])
    assert cfg.seed == 6 and cfg.multiview.num_views == 4
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    p.write_text("seed: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_view_overrides_from_yaml():
    cfg = build_config({"multiview": {"view_overrides": {1: {"solarize": {"probability": 0.0}}}}})
    assert cfg.multiview.pipeline_for(1).steps[-1].probability == 0.0


def test_with_output_size():
    cfg = with_output_size(load_config(), 224)
    assert cfg.pipeline.output_size == 224
    assert cfg.multiview.base_pipeline.output_size == 224

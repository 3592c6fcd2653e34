import pytest

from radar_eot.config import ConfigError, PipelineConfig, config_from_dict, env_overrides, load_config


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.rls.num_filters == 10 and cfg.rls.outlier_delta_threshold == 0.4
    assert cfg.preprocess.static_threshold == 0.5 and cfg.preprocess.depth == 3
    assert cfg.kf.confirm_hits == 3 and cfg.kf.delete_misses == 5
    assert cfg.degeneracy_limit == 0.5
    assert load_config(None, {}) == cfg


def test_yaml_file_and_environment(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("rls:\n  num_filters: 4\n  p0_scale: 5\nkf:\n  r: [1, 1, 1, 1, 1, 1]\n")
    cfg = load_config(p, {"RADAR_EOT_RLS__NUM_FILTERS": "7", "RADAR_EOT_PREPROCESS__DEPTH": "5",
                          "RADAR_EOT_DEGENERACY_LIMIT": "0.1", "RADAR_EOT_PURE_PYTHON": "1",
                          "HOME": "/root"})
    assert cfg.rls.num_filters == 7 and cfg.rls.p0_scale == 5.0
    assert cfg.preprocess.depth == 5 and cfg.kf.r == (1.0,) * 6
    assert cfg.degeneracy_limit == 0.1


def test_env_overrides_shape():
    assert env_overrides({"RADAR_EOT_DBSCAN__EPS_MAJOR": "3.5", "OTHER": "x"}) == {"dbscan": {"eps_major": 3.5}}


@pytest.mark.parametrize("doc,fragment", [
    ({"nope": {}}, "unknown config section"),
    ({"rls": {"filters": 3}}, "unknown rls field"),
    ({"rls": {"num_filters": 0}}, "section rls"),
    ({"degeneracy_limit": "lots"}, "degeneracy_limit"),
    ({"kf": {"r": [1, 2]}}, "section kf"),
])
def test_bad_configs(doc, fragment):
    with pytest.raises(ConfigError, match=fragment):
        config_from_dict(doc)


def test_yaml_syntax_error_has_location(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("rls:\n  num_filters: [1\n")
    with pytest.raises(ConfigError, match=r"bad.yaml:\d+:\d+"):
        load_config(p, {})
    p.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(p, {})


def test_round_trip_through_dict():
    cfg = config_from_dict({"velocity": {"window": 2}, "kf": {"q_accel": 1.5}})
    assert config_from_dict(cfg.to_dict()) == cfg

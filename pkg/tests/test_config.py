import pytest

from beecup.config import (ConfigError, PeriodError, ProtocolError, ScenarioConfig, WeightSumError,
                           build, known_keys, parse_config)


def test_defaults():
    cfg = parse_config(None)
    assert (cfg.sim_duration, cfg.recluster_interval, cfg.tiny_period) == (7200, 600, 60)
    assert cfg.initial_energy == 10_000
    assert (cfg.p_wlan_active, cfg.p_wlan_idle, cfg.p_bt_active, cfg.p_bt_idle) == (1.1, 0.88, 0.22, 0.12)
    assert (cfg.rate_wlan, cfg.rate_bt) == (54e6, 2e6)
    assert (cfg.r_b, cfg.s_max, cfg.r_n, cfg.ewma_alpha) == (10, 7, 15, 0.5)
    assert cfg.weights.ch_select == (0.3, 0.3, 0.2, 0.2)
    assert cfg.replicates == 20 and cfg.rounds == 12 and cfg.periods_per_round == 10
    assert cfg.leach.p == 0.1 and (cfg.sep.m, cfg.sep.alpha) == (0.2, 2.0)


def test_errors_are_distinct():
    with pytest.raises(WeightSumError, match="sum to 1") as w:
        ScenarioConfig().with_(**{"weights.ch_select": "0.3,0.3,0.2,0.1"})
    with pytest.raises(PeriodError, match="does not divide") as p:
        ScenarioConfig(tiny_period=70)
    with pytest.raises(ProtocolError, match="unknown protocol") as q:
        ScenarioConfig(protocol="pso")
    assert len({str(w.value), str(p.value), str(q.value)}) == 3


def test_weight_tolerance():
    ScenarioConfig().with_(**{"weights.ch_number": [0.5, 0.5 + 5e-10]})
    with pytest.raises(WeightSumError):
        ScenarioConfig().with_(**{"weights.ch_number": [0.5, 0.5 + 5e-9]})


def test_flag_override_and_types():
    cfg = parse_config(None, {"node_count": "90", "sep.alpha": "3", "stop_at_first_death": "yes",
                              "abc.limit": "none"})
    assert cfg.node_count == 90 and cfg.sep.alpha == 3.0
    assert cfg.stop_at_first_death is True and cfg.abc.limit is None
    with pytest.raises(ConfigError):
        parse_config(None, {"node_count": "many"})
    with pytest.raises(ConfigError):
        parse_config(None, {"no_such_key": 1})


def test_toml_file_then_flags(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text('region = "classroom"\nnode_count = 40\n[sep]\nalpha = 3.0\n'
                    '[weights]\nch_number = [0.4, 0.6]\n')
    cfg = parse_config(path, {"node_count": "60"})
    assert cfg.region == "classroom" and cfg.node_count == 60
    assert cfg.sep.alpha == 3.0 and cfg.weights.ch_number == (0.4, 0.6)


def test_bad_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("node_count = = 3")
    with pytest.raises(ConfigError):
        parse_config(path)


def test_sep_implies_heterogeneous():
    assert ScenarioConfig(protocol="sep").is_heterogeneous
    assert not ScenarioConfig().is_heterogeneous


def test_every_key_overridable():
    keys = known_keys()
    assert {"sep.alpha", "abc.mcn", "weights.ch_select", "leach.p", "r_n"} <= set(keys)
    assert build({}) == ScenarioConfig()

import pytest

from manetsim.config import (CONFIG_COLUMNS, ConfigError, ScenarioConfig, dump_config, flatten,
                             load_config, set_value)


@pytest.mark.parametrize("key,value,field", [
    ("nodes", "1", "nodes"),
    ("protocol", "olsr", "protocol"),
    ("strategy", "forgive", "strategy"),
    ("range_m", "-5", "range_m"),
    ("adversary.fraction", "1.5", "adversary"),
    ("trust.tolerance", "0", "trust"),
    ("dsr.cache_size", "0", "dsr.cache_size"),
])
def test_invalid_values_name_the_field(key, value, field):
    cfg = ScenarioConfig()
    set_value(cfg, key, value)
    with pytest.raises(ConfigError, match=field):
        cfg.validate()


def test_unknown_and_unparsable_keys():
    cfg = ScenarioConfig()
    with pytest.raises(ConfigError, match="unknown"):
        set_value(cfg, "colour", "red")
    with pytest.raises(ConfigError, match="unknown section"):
        set_value(cfg, "radio.power", "3")
    with pytest.raises(ConfigError, match="cannot parse"):
        set_value(cfg, "nodes", "many")


def test_defaults():
    cfg = ScenarioConfig()
    cfg.validate()
    flat = flatten(cfg)
    assert flat["mobility.width"] == "500.0" and flat["mobility.height"] == "550.0"
    assert flat["traffic.rate"] == "4.0" and flat["traffic.payload"] == "512"
    assert flat["mobility.speed_max"] == "20.0" and flat["duration"] == "300.0"
    assert cfg.flow_count() == 4


def test_ini_round_trip(tmp_path):
    cfg = ScenarioConfig(nodes=33, strategy="second-chance")
    cfg.trust.penalty = 0.2
    cfg.dsr.salvage = False
    path = tmp_path / "s.ini"
    path.write_text(dump_config(cfg))
    loaded = load_config(path)
    assert flatten(loaded) == flatten(cfg)


def test_every_column_is_settable():
    cfg = ScenarioConfig()
    flat = flatten(cfg)
    for key in CONFIG_COLUMNS:
        if key in ("positions", "flow_pairs", "assignments"):
            continue
        set_value(cfg, key, flat[key])
    assert flatten(cfg) == flat

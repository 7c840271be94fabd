import json

import pytest

from ssfbasis.config import config_hash, parse_config, read_config
from ssfbasis.errors import ConfigError


def test_defaults_from_list():
    cfg = parse_config({"methods": ["hooi", "eof"]})
    assert [m.label for m in cfg.methods] == ["hooi", "eof"]
    assert cfg.method("hooi").params["rank"] == [8, 8, 10]
    assert cfg.method("eof").params["k"] == 2
    assert cfg.days == 30 and cfg.train_days == [1] and cfg.seeds == [0]


def test_labelled_methods_and_types():
    cfg = parse_config({"methods": {"eof_k3": {"type": "eof", "k": 3}}, "seeds": [3, 4]})
    assert cfg.methods[0].type == "eof" and cfg.methods[0].params["k"] == 3
    assert cfg.seeds == [3, 4]


@pytest.mark.parametrize(
    "raw, key",
    [
        ({}, "methods"),
        ({"methods": []}, "methods"),
        ({"methods": ["pca"]}, "methods.pca"),
        ({"methods": {"hooi": {"rank": [8, 8]}}}, "methods.hooi.rank"),
        ({"methods": {"eof": {"k": 0}}}, "methods.eof.k"),
        ({"methods": {"ksvd": {"t": 1.5}}}, "methods.ksvd.t"),
        ({"methods": ["eof"], "days": 1}, "days"),
        ({"methods": ["eof"], "seeds": []}, "seeds"),
        ({"methods": ["eof"], "grid": {"m": -1}}, "grid"),
        ({"methods": ["eof"], "generator": {"noise_sigma": 1.0}}, "generator"),
    ],
)
def test_errors_name_the_field(raw, key):
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    assert info.value.key == key


def test_unknown_keys_warn():
    with pytest.warns(UserWarning, match="colour"):
        parse_config({"methods": ["eof"], "colour": "blue"})
    with pytest.warns(UserWarning, match="methods.eof.kk"):
        parse_config({"methods": {"eof": {"kk": 3}}})


def test_read_config_and_hash(tmp_path):
    raw = {"methods": ["hooi"], "seed": 5}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(raw))
    cfg = read_config(p)
    assert cfg.seeds == [5]
    assert config_hash(cfg) == config_hash(parse_config(dict(reversed(list(raw.items())))))
    assert config_hash(cfg) != config_hash(parse_config({"methods": ["hooi"], "seed": 6}))
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        read_config(p)


def test_shipped_configs_parse():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    for path in sorted(root.glob("*.json")):
        read_config(path)

import json

import pytest

from wepe.config import ConfigError, RunConfig, load_config, parse_config
from wepe.encoder import EncoderConfig
from wepe.surrogate import SurrogateConfig


class TestParse:
    def test_defaults(self):
        rc = load_config(None)
        assert rc.mode == "pretrain"
        assert rc.active == EncoderConfig()

    def test_sections(self):
        rc = parse_config({"mode": "finetune", "lattice": {"trunc_m": 24}, "encoder": {"alpha_u": 0.6},
                           "surrogate": {"beta": 0.2}})
        assert rc.encoder.lattice.trunc_m == 24
        assert rc.encoder.lattice.trunc_n == 12
        assert rc.encoder.alpha_u == 0.6
        assert isinstance(rc.active, SurrogateConfig) and rc.active.beta == 0.2

    @pytest.mark.parametrize("doc", [
        [], {"bogus": {}}, {"mode": "train"}, {"encoder": {"alpha_u": -1}},
        {"lattice": {"kappa_typo": 1}}, {"surrogate": {"nope": 1}},
    ])
    def test_rejects(self, doc):
        with pytest.raises(ConfigError):
            parse_config(doc)

    def test_roundtrip(self):
        rc = parse_config({"mode": "finetune", "encoder": {"grid_h": 7}})
        assert parse_config(rc.to_dict()) == rc


class TestLoad:
    def test_file(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"encoder": {"grid_w": 9}}))
        assert load_config(p).encoder.grid_w == 9

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_config(tmp_path / "missing.json")

    def test_config_error_is_value_error(self):
        assert issubclass(ConfigError, ValueError)
        assert RunConfig().mode == "pretrain"

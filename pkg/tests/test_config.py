from __future__ import annotations

from pathlib import Path

import pytest

from energy_lab.config import ConfigError, load_config, parse_config_text
from energy_lab.harness import SweepConfig

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_parse_full_example():
    values = parse_config_text("""
[sweep]
dims = 16, 32
mu1_values = 0.05, 0.1
n_cov = 5
mode = VSTAT
[families]
Gaussian =
MultivariateT = 2, 5
""")
    assert values["dims"] == (16, 32)
    assert values["mu1_values"] == (0.05, 0.1)
    assert values["mode"] == "vstat"
    assert values["families"] == (("Gaussian", None), ("MultivariateT", 2.0), ("MultivariateT", 5.0))


@pytest.mark.parametrize("text,match", [
    ("[sweep]\nn_covs = 3\n", "unknown config key: sweep.n_covs"),
    ("[families]\nCauchy = 1\n", "unknown config key: families.Cauchy"),
    ("[extra]\na = 1\n", "unknown section"),
    ("[sweep]\nn_cov = many\n", "invalid value for n_cov"),
    ("[families]\nExpScale =\n", "at least one parameter"),
    ("no section header\n", "cannot parse"),
])
def test_parse_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config_text(text)


def test_shipped_configs_load():
    smoke = load_config(CONFIGS / "smoke.config")
    assert smoke.dims == (16,) and smoke.families == (("Gaussian", None),)
    full = load_config(CONFIGS / "full.config")
    assert len(full.families) == 10 and full.n_cov == 28 and full.n_samples == 2 ** 14


def test_overrides_win_and_none_is_ignored(tmp_path):
    cfg = load_config(CONFIGS / "smoke.config", {"master_seed": 99, "threads": None})
    assert cfg.master_seed == 99 and cfg.threads == 1
    assert load_config() == SweepConfig()


def test_invalid_values_become_config_errors(tmp_path):
    p = tmp_path / "bad.config"
    p.write_text("[sweep]\nn_cov = 1\n")
    with pytest.raises(ConfigError, match="n_cov"):
        load_config(p)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.config")
    with pytest.raises(ConfigError, match="unknown config key"):
        load_config(None, {"bogus": 1})


def test_mode_is_validated():
    with pytest.raises(ConfigError, match="mode"):
        load_config(None, parse_config_text("[sweep]\nmode = lstat\n"))


def test_readme_example_with_inline_comments():
    readme = (Path(__file__).resolve().parents[1] / "README.md").read_text()
    block = readme.split("```ini\n", 1)[1].split("```", 1)[0]
    cfg = load_config(None, parse_config_text(block))
    assert cfg.n_cov == 28 and cfg.closeness == 0.1 and len(cfg.families) == 10

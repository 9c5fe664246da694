"""Test configuration loading and command-line overrides."""

import sys
from pathlib import Path

import pytest
from pydantic import ValidationError

# Add repo root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import (
    RateGridConfig,
    Settings,
    SimConfig,
    apply_overrides,
    load_sim_config,
)
from src.errors import ConfigError
from src.harvesting import EhKind
from src.optimization import Scheme

CONFIG_DIR = Path(__file__).parent.parent / "config"


def test_defaults():
    cfg = SimConfig()
    assert (cfg.n_r, cfg.n_t) == (4, 4)
    assert cfg.theta == 0.1
    assert cfg.p_t_watts == 10.0
    assert cfg.sigma2_watts == pytest.approx(1e-10)
    assert cfg.n_realizations == 1000
    assert cfg.schemes == [Scheme.JOINT, Scheme.OPS, Scheme.OTCM]
    assert cfg.eh_model.kind == EhKind.SATURATING
    cases = cfg.resolved_cases()
    assert len(cases) == 1 and cases[0].label == "default"


def test_rate_grid_fractions():
    fractions = RateGridConfig().fractions()
    assert len(fractions) == 20
    assert fractions[0] == 0.0
    assert fractions[-1] == pytest.approx(0.98)
    assert RateGridConfig(points=1).fractions() == [0.0]
    with pytest.raises(ValidationError):
        RateGridConfig(mode="fixed")
    with pytest.raises(ValidationError):
        RateGridConfig(mode="fixed", values=[1.0, -2.0])


def test_shipped_sweep_config():
    cfg = load_sim_config(CONFIG_DIR / "sweep_config.yaml")
    assert cfg.sigma2_dbm == -70.0
    assert cfg.benchmarks.ops_covariance == "waterfilling"
    assert cfg.benchmarks.otcm_rho == 0.5
    assert cfg.validate_suite.n_power_points == 400


def test_shipped_tradeoff_config_has_four_cases():
    cfg = load_sim_config(CONFIG_DIR / "fig2_tradeoff.yaml")
    cases = cfg.resolved_cases()
    assert [(c.theta, c.sigma2_dbm) for c in cases] == [
        (0.05, -70.0), (0.1, -70.0), (0.05, -100.0), (0.1, -100.0)
    ]
    assert all(c.n_r == 4 and c.n_t == 4 for c in cases)
    assert cfg.schemes == [Scheme.JOINT]


def test_shipped_benchmark_config():
    cfg = load_sim_config(CONFIG_DIR / "fig3_benchmarks.yaml")
    assert [(c.n_r, c.n_t) for c in cfg.resolved_cases()] == [(2, 2), (4, 4)]
    assert set(cfg.schemes) == {Scheme.JOINT, Scheme.OPS, Scheme.OTCM}


def test_config_name_resolved_under_config_dir():
    cfg = load_sim_config("fig3_benchmarks.yaml", config_dir=str(CONFIG_DIR))
    assert len(cfg.cases) == 2


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_sim_config(tmp_path / "nope.yaml")


def test_malformed_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("n_r: [1, 2\n")
    with pytest.raises(ConfigError, match="not valid YAML"):
        load_sim_config(path)


def test_field_level_messages(tmp_path):
    path = tmp_path / "invalid.yaml"
    path.write_text("n_realizations: 0\nbenchmarks:\n  ops_covariance: random\n")
    with pytest.raises(ConfigError) as exc:
        load_sim_config(path)
    message = str(exc.value)
    assert "n_realizations" in message
    assert "benchmarks.ops_covariance" in message


def test_duplicate_and_unknown_schemes():
    with pytest.raises(ValidationError):
        SimConfig(schemes=["joint", "joint"])
    with pytest.raises(ValidationError):
        SimConfig(schemes=["greedy"])
    with pytest.raises(ValidationError):
        SimConfig(schemes=[])


def test_overrides_take_precedence():
    cfg = SimConfig()
    updated = apply_overrides(cfg, seed=7, out="tmp/run", schemes=["ops"], realizations=3)
    assert updated.rng_seed == 7
    assert updated.output_path == "tmp/run"
    assert updated.schemes == [Scheme.OPS]
    assert updated.n_realizations == 3
    assert apply_overrides(cfg) is cfg
    with pytest.raises(ConfigError):
        apply_overrides(cfg, realizations=0)


def test_validate_section_alias():
    cfg = SimConfig.model_validate({"validate": {"n_instances": 3}})
    assert cfg.validate_suite.n_instances == 3
    echo = cfg.echo()
    assert echo["validate"]["n_instances"] == 3
    assert echo["rng_seed"] == 2024
    # The echo is itself a loadable config
    assert SimConfig.model_validate(echo) == cfg


def test_cases_inherit_top_level_values():
    cfg = SimConfig.model_validate({
        "theta": 0.2,
        "cases": [{"label": "a"}, {"label": "b", "sigma2_dbm": -100.0, "n_r": 2}],
    })
    a, b = cfg.resolved_cases()
    assert (a.theta, a.sigma2_dbm, a.n_r) == (0.2, -70.0, 4)
    assert (b.theta, b.sigma2_dbm, b.n_r, b.n_t) == (0.2, -100.0, 2, 4)


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("SWIPT_N_WORKERS", "3")
    monkeypatch.setenv("SWIPT_LOG_LEVEL", "debug")
    settings = Settings()
    assert settings.n_workers == 3
    assert settings.log_level == "DEBUG"
    with pytest.raises(ValidationError):
        Settings(log_level="verbose")


def test_settings_default_to_one_worker_per_cpu(monkeypatch):
    monkeypatch.delenv("SWIPT_N_WORKERS", raising=False)
    assert Settings(_env_file=None).n_workers == 0

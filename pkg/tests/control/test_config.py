import logging

import attrs
import pytest

from poisson_filter.control.config import (
    PRESETS,
    FilterSection,
    NoiseSection,
    ObservationSection,
    RunConfig,
    dump_config,
    load_config,
    load_preset,
    parse_config,
)
from poisson_filter.exceptions import PoissonFilterConfigException, PoissonFilterModelException
from poisson_filter.filters.objects import VarianceMode
from poisson_filter.models.objects import ModelVariant
from tests.conftest import T_R, T_S

MINIMAL = """
variant: sir
inputs:
  T_S: 28
  T_i: 365
  b: 4562
  m_1: 0.029
  s: 7/29
  a_raw: 0.030
  m_2: 0.077
"""


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load(name):
    config = load_preset(name)
    assert config.scenario == name
    assert config.inputs.T_S == 28.0
    assert config.inputs.s == pytest.approx(7 / 29)
    assert len(config.noise.w_diag) == config.variant.dim
    assert config.seed == 20190101


def test_contagious_preset():
    config = load_preset("contagious")
    assert config.variant is ModelVariant.SIRH_CONTAGIOUS
    assert config.beta == 1e-6
    assert [f.name for f in config.filters] == ["epkf", "ekf", "oracle"]
    assert config.filters[1].v_mode is VarianceMode.FIXED
    assert config.filters[1].reference == "noncontagious"


def test_unknown_preset():
    with pytest.raises(PoissonFilterConfigException):
        load_preset("nowhere")


def test_minimal_config_defaults():
    config = parse_config(MINIMAL)
    assert config.variant is ModelVariant.SIR
    assert config.initial_state == "equilibrium"
    assert config.noise.w_diag == ()
    assert config.noise.multipliers == (1.0,)
    assert [f.name for f in config.filters] == ["pkf", "kf", "oracle"]
    assert config.n_steps == 1000
    assert config.burn_in == 1000


def test_round_trip(tmp_path):
    config = load_preset("uganda_sirh")
    path = tmp_path / "config.yaml"
    path.write_text(dump_config(config))
    assert load_config(path) == config


@pytest.mark.parametrize(
    "text",
    [
        MINIMAL + "colour: blue\n",
        MINIMAL.replace("  m_2: 0.077", "  m_2: 0.077\n  m_3: 0.1"),
        MINIMAL + "noise:\n  w: [1, 2, 3]\n",
        MINIMAL + "filters:\n  - name: pkf\n    gain: 2\n",
    ],
)
def test_unknown_keys_are_rejected(text):
    with pytest.raises(PoissonFilterConfigException, match="unknown key"):
        parse_config(text)


@pytest.mark.parametrize(
    "text",
    [
        "",
        "- just\n- a list\n",
        "variant: sir\n",
        MINIMAL + "variant: sirx\n",
        MINIMAL + "n_steps: -1\n",
        MINIMAL + "n_trials: 0\n",
        MINIMAL + "seed: -5\n",
        MINIMAL + "initial_state: somewhere\n",
        MINIMAL + "initial_state: [1, 2]\n",
        MINIMAL + "noise:\n  w_diag: [1, 2]\n",
        MINIMAL + "noise:\n  w_diag: [1, -2, 3]\n",
        MINIMAL + "noise:\n  multipliers: [1, -1]\n",
        MINIMAL + "filters: []\n",
        MINIMAL + "filters:\n  - name: a\n  - name: a\n",
        MINIMAL + "filters:\n  - name: a\n    delta: 0\n",
        MINIMAL + "filters:\n  - name: a\n    v_mode: psychic\n",
        MINIMAL + "filters:\n  - name: a\n    reference: elsewhere\n",
        MINIMAL + "observation:\n  c_I: 0.01\n  c_I_fraction: 0.2\n",
        MINIMAL.replace("s: 7/29", "s: 7/0"),
        "inputs: [1\n",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(PoissonFilterConfigException):
        parse_config(text)


def test_invalid_inputs_are_model_errors():
    with pytest.raises(PoissonFilterModelException, match="T_i must exceed T_S"):
        parse_config(MINIMAL.replace("T_i: 365", "T_i: 28"))


def test_missing_file(tmp_path):
    with pytest.raises(PoissonFilterConfigException, match="could not read"):
        load_config(tmp_path / "absent.yaml")


def test_observation_rates(uganda_inputs):
    section = ObservationSection(c_I_fraction=0.2, c_H_fraction=0.6)
    c_I, c_H = section.rates(uganda_inputs)
    assert c_I == pytest.approx(0.2 / T_S)
    assert c_H == pytest.approx(0.6 / T_R)
    assert ObservationSection(c_I="1/100").rates(uganda_inputs) == (0.01, 0.0)


def test_base_multiplier():
    assert NoiseSection(multipliers=[0.5, 1, 2]).base_multiplier == 1.0
    assert NoiseSection(multipliers=[0.5, 2]).base_multiplier == 0.5
    assert NoiseSection(multipliers=3).multipliers == (3.0,)


def test_override():
    config = load_preset("uganda_sir")
    assert config.override() is config
    assert config.override(seed=None) is config
    changed = config.override(seed=5, n_steps=10, output_dir="elsewhere")
    assert (changed.seed, changed.n_steps, changed.output_dir) == (5, 10, "elsewhere")
    assert changed.inputs == config.inputs
    with pytest.raises(PoissonFilterConfigException):
        config.override(n_trials=0)


def test_beta_on_linear_variant_warns(caplog):
    with caplog.at_level(logging.WARNING):
        parse_config(MINIMAL + "beta: 1.0e-6\n")
    assert "ignored" in caplog.text


def test_filter_section_to_dict():
    section = FilterSection(name="kf", v_mode="fixed", delta="1/2")
    assert section.to_dict() == {
        "name": "kf",
        "v_mode": "fixed",
        "delta": 0.5,
        "reference": "noncontagious",
        "clamp_state": True,
    }
    assert attrs.evolve(section, clamp_state=False).clamp_state is False


def test_explicit_initial_state():
    config = parse_config(MINIMAL + "initial_state: [1, 2, 3]\n")
    assert config.initial_state == (1.0, 2.0, 3.0)
    assert isinstance(RunConfig.from_dict(config.to_dict()).initial_state, tuple)

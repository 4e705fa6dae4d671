import json

import pytest

from fungisynth.config import ConfigError, SimulationConfig, config_from_dict, load_config
from fungisynth.lifecycle import JitterLaw, Stage


def write(tmp_path, obj, name="c.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_empty_object_gives_defaults(tmp_path):
    c = load_config(write(tmp_path, {}))
    assert c == SimulationConfig()
    assert c.total_frames == 100 and c.lifecycle.initial_spores == 200
    assert c.lifecycle.spore_bounds == (0.1, 0.9, 0.1, 0.9)
    assert c.lifecycle.jitter_law is JitterLaw.UNIFORM and c.lifecycle.jitter_range == 0.01
    assert c.lifecycle.mycelium_rate == 2.0
    myc = c.branch_params(Stage.MYCELIUM)
    assert (myc.length_mu, myc.length_sigma, myc.width_lo, myc.width_hi) == (0.8, 0.15, 0.7, 1.0)
    hyp = c.branch_params(Stage.HYPHA)
    assert (hyp.width_lo, hyp.width_hi, hyp.decay_factor, hyp.decay_noise_sigma) == (0.6, 1.0, 0.7, 0.2)
    assert c.environment.temperature_mu == 1.0


def test_total_frames_violation_named(tmp_path):
    with pytest.raises(ConfigError, match="total_frames"):
        load_config(write(tmp_path, {"total_frames": 1}))


def test_round_trip(tmp_path):
    c = config_from_dict({"seed": 99, "lifecycle": {"initial_spores": 17, "jitter_law": "normal"},
                          "morphology": {"mycelium": {"max_depth": 3}}, "render": {"width": 100}})
    p = write(tmp_path, c.to_dict())
    again = load_config(p)
    assert again == c
    assert load_config(write(tmp_path, again.to_dict(), "d.json")) == c


def test_partial_stage_section_keeps_other_defaults():
    c = config_from_dict({"morphology": {"hypha": {"mean_sub_branches": 1.5}}})
    assert c.morphology.hypha.mean_sub_branches == 1.5
    assert c.morphology.hypha.decay_factor == 0.7


def test_malformed_json_reports_position(tmp_path):
    with pytest.raises(ConfigError, match=r"c\.json:2:\d+"):
        load_config(write(tmp_path, '{\n  "seed": ,\n}'))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.json")


@pytest.mark.parametrize("data,field", [
    ({"lifecycle": {"spore_bounds": [0.5, 0.2, 0.1, 0.9]}}, "spore_bounds"),
    ({"lifecycle": {"initial_spores": -1}}, "initial_spores"),
    ({"morphology": {"hypha": {"decay_factor": 1.5}}}, "decay_factor"),
    ({"morphology": {"mycelium": {"width_range": [0.9, 0.2]}}}, "width range"),
    ({"environment": {"temperature_sigma": -0.1}}, "temperature_sigma"),
    ({"render": {"width": 8}}, "width"),
    ({"render": {"palette": {"background": [2, 0, 0]}}}, "palette.background"),
    ({"render": {"z_order": ["spore", "spore", "hypha"]}}, "z_order"),
    ({"unknown_key": 1}, "unknown_key"),
])
def test_validation_names_field(data, field):
    with pytest.raises(ConfigError, match=field):
        config_from_dict(data)


def test_overrides_equal_edited_config():
    base = SimulationConfig()
    a = base.with_overrides(**{"seed": 3, "lifecycle.initial_spores": 10, "render.width": 64})
    b = config_from_dict({"seed": 3, "lifecycle": {"initial_spores": 10}, "render": {"width": 64}})
    assert a == b


def test_invalid_override_rejected():
    with pytest.raises(ConfigError, match="total_frames"):
        SimulationConfig().with_overrides(total_frames=1)

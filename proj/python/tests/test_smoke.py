import json
import math

import numpy as np
import pytest

import epildp


def test_models_and_equilibria():
    sis = epildp.sis()
    assert sis.name == "sis"
    assert sis.compartments == ["I"]
    assert sis.parameters["beta"] == 1.5

    siv = epildp.siv()
    eqs = epildp.find_equilibria(siv)
    assert len(eqs) == 3
    stable = sorted(e["point"][2] for e in eqs if e["stability"] == "stable")
    assert stable[0] == pytest.approx(0.0, abs=1e-12)
    assert stable[1] == pytest.approx(0.312861, abs=1e-5)
    r0, r0_plain = epildp.reproduction_numbers(siv)
    assert r0 < 1.0 < r0_plain


def test_nsfd_matches_closed_form_as_h_shrinks():
    model = epildp.sis(beta=40.0, gamma=20.0)
    errors = []
    for h in (0.1, 0.05, 0.025):
        path = epildp.nsfd(model, [0.3], h=h, T=4.0)
        exact = np.array([epildp.sis_exact(0.3, 40.0, 20.0, t) for t in path["t"]])
        assert path["states"].shape == (len(path["t"]), 1)
        assert np.all((path["states"] >= 0.0) & (path["states"] <= 1.0))
        errors.append(np.max(np.abs(path["states"][:, 0] - exact)))
    assert errors[0] > errors[1] > errors[2]


def test_cost_functions_agree():
    model = epildp.sis()
    for x, y in [(0.2, 0.1), (0.5, -0.3), (0.9, 0.0)]:
        general, mu = epildp.lagrangian(model, [x], [y])
        assert general == pytest.approx(epildp.lagrangian_sis(x, y, 1.5, 1.0), abs=1e-9)
        assert len(mu) == 2


def test_vbar_sis_coarse():
    result = epildp.vbar(epildp.sis(), dt=0.05, dx=0.02, horizons=[5.0, 10.0, 20.0])
    assert 0.06 < result["vbar"] < 0.09
    values = [v for _, v in result["table"]]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert result["path"]["states"][-1, 0] < 0.05


def test_simulation_is_reproducible():
    model = epildp.siv()
    a = epildp.simulate(model, 2000, [0.1, 0.2, 0.7], T=5.0, seed=3, simulator="tau_leap", sample_dt=0.5)
    b = epildp.simulate(model, 2000, [0.1, 0.2, 0.7], T=5.0, seed=3, simulator="tau_leap", sample_dt=0.5)
    np.testing.assert_array_equal(a["states"], b["states"])
    assert np.allclose(a["states"].sum(axis=1), 1.0)
    assert a["stats"]["repair_exhausted"] == 0

    summary = epildp.ensemble(epildp.sis(), 2000, [0.1], replicates=20, T=5.0, seed=1)
    assert summary["mean"].shape == (len(summary["t"]), 1)
    assert np.all(summary["min"] <= summary["max"])


def test_tau_select_scales_with_epsilon():
    model = epildp.sis()
    small = epildp.tau_select(model, 2000, [0.2], 0.01)
    large = epildp.tau_select(model, 2000, [0.2], 0.02)
    assert 2.0 - 1e-12 <= large / small <= 4.0 + 1e-12


def test_errors_are_typed():
    with pytest.raises(epildp.ConfigError):
        epildp.load_model("sis", {"zeta": 1.0})
    with pytest.raises(epildp.NotBistable):
        epildp.vbar(epildp.sis(beta=0.5))
    with pytest.raises(epildp.Error):
        epildp.simulate(epildp.sis(), 100, [2.0])


def test_model_json_round_trip():
    model = epildp.siv()
    again = epildp.parse_model(model.to_json())
    assert again.compartments == model.compartments
    assert again.rates([0.3, 0.4, 0.3]) == pytest.approx(model.rates([0.3, 0.4, 0.3]))


def test_cli_in_process(tmp_path):
    code, out, err = epildp.run_cli(["ode", "--T", "1", "--out", str(tmp_path)])
    assert code == 0, err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["outputs"] == ["trajectory.csv"]
    code, _, err = epildp.run_cli(["simulate", "--params", "zeta=1", "--out", str(tmp_path)])
    assert code == 2
    assert json.loads(err)["error"] == "ConfigError"

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rydsub.core import FieldSpec, scattering_probability
from rydsub.errors import InvalidParameter, OptimizationDegenerate
from rydsub.oracles import mc_decoherence, mc_pipeline
from rydsub.optimize import golden_max, log_grid_max
from rydsub.subtraction import (SubtractionReport, decoherence_probs, efficiency_surface,
                                fidelity, optimize_fidelity, optimize_fock, retrieval_probs,
                                storage_probs, subtract_prob_coherent_series,
                                subtract_prob_coherent_source, subtract_prob_fock)

unit = st.floats(0.0, 1.0)


def test_stage_examples():
    assert storage_probs(3, 1.0) == (1.0, 0.0)
    assert storage_probs(2, 0.8) == pytest.approx((0.64, 0.32))
    assert storage_probs(0, 0.3) == (1.0, 0.0)
    assert retrieval_probs(3, 0.9) == pytest.approx((0.729, 0.243))
    assert decoherence_probs(4, 0, 0.5) == (1.0, 0.0)
    assert decoherence_probs(3, 2, 1.0) == (0.0, 1.0)
    assert decoherence_probs(0, 5, 0.5) == (1.0, 0.0)


def test_hand_value():
    assert decoherence_probs(2, 2, 0.5) == (0.0625, 0.6875)


@given(st.integers(0, 12), unit)
def test_binomial_stage_bounds(n, eta):
    p0, p1 = storage_probs(n, eta)
    assert 0 <= p0 <= 1 and 0 <= p1 <= 1 and p0 + p1 <= 1 + 1e-12


@given(st.integers(0, 8), st.integers(0, 12), unit)
def test_decoherence_stage_bounds(n_g, n_s, p):
    p0, p1 = decoherence_probs(n_g, n_s, p)
    assert 0 <= p0 <= 1 and -1e-15 <= p1 <= 1 and p0 + p1 <= 1 + 1e-12


def test_fock_examples():
    for n_g in (1, 2, 5):
        assert subtract_prob_fock(n_g, 3, 1.0, 1.0, 1.0) == 1.0
        assert subtract_prob_fock(n_g, 0, 1.0, 1.0, 0.7) == 0.0
    with pytest.raises(InvalidParameter):
        subtract_prob_fock(0, 1, 1.0, 1.0, 0.5)


@given(st.integers(1, 6), st.integers(0, 10), unit, unit, unit)
def test_fock_probability_bounds(n_g, n_s, es, er, p):
    assert -1e-15 <= subtract_prob_fock(n_g, n_s, es, er, p) <= 1 + 1e-12


@given(st.integers(1, 6), st.integers(0, 10), unit, unit)
def test_efficiency_exchange_symmetry_without_scattering(n_g, n_s, es, er):
    a = subtract_prob_fock(n_g, n_s, es, er, 0.0)
    b = subtract_prob_fock(n_g, n_s, er, es, 0.0)
    assert a == pytest.approx(b, abs=1e-14)


def test_fock_matches_monte_carlo():
    exact = subtract_prob_fock(2, 5, 1.0, 1.0, 0.5)
    _, p1 = decoherence_probs(2, 5, 0.5)
    assert exact == p1
    assert mc_decoherence(2, 5, 0.5, 100_000, 7)["1"].within(exact)


def test_coherent_source_examples():
    assert subtract_prob_coherent_source(3, 0.0, 1.0, 1.0, 0.5) == 0.0
    for a_s in (0.3, 2.0, 7.0):
        got = subtract_prob_coherent_source(4, a_s, 1.0, 1.0, 1.0)
        assert got == pytest.approx(-math.expm1(-a_s), abs=1e-15)
    assert subtract_prob_coherent_source(4, math.inf, 1.0, 1.0, 1.0) == 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.floats(0.0, 12.0), unit, unit, unit)
def test_closed_form_matches_series(n_g, a_s, es, er, p):
    a = subtract_prob_coherent_source(n_g, a_s, es, er, p)
    b = subtract_prob_coherent_series(n_g, a_s, es, er, p)
    assert a == pytest.approx(b, abs=1e-11)


def test_fidelity_examples():
    assert fidelity(FieldSpec(0.0, 3.0), 0.5) == 1.0
    for ag in (0.5, 2.0, 4.0):
        assert fidelity(FieldSpec(ag, math.inf), 1.0) == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.0, 20.0), unit, unit, unit)
def test_fidelity_bounds(ag, a_s, es, er, p):
    assert 0.0 <= fidelity(FieldSpec(ag, a_s, es, er), p) <= 1.0


def test_optimum_beats_grid_and_is_interior():
    p = float(scattering_probability(1.0))
    rep = optimize_fidelity(2.0, p)
    for a in np.logspace(-3, math.log10(50), 40):
        assert rep.fidelity >= fidelity(FieldSpec(2.0, a), p) - 1e-12
    assert 1e-3 < rep.alpha_s_opt < 50
    assert all(0 <= v <= 1 for _, v in rep.per_fock)


def test_high_depth_fidelity():
    rep = optimize_fidelity(2.0, float(scattering_probability(5.0)))
    assert rep.fidelity > 0.95


def test_no_scattering_gives_vacuum_only():
    with pytest.warns(OptimizationDegenerate):
        rep = optimize_fidelity(2.0, 0.0)
    assert rep.fidelity == pytest.approx(math.exp(-2.0))
    assert rep.alpha_s_opt == 1e-3


def test_optimum_non_decreasing_in_depth():
    values = [optimize_fidelity(2.0, float(scattering_probability(d))).fidelity
              for d in np.linspace(0.25, 6.0, 12)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_surface():
    p = float(scattering_probability(1.0))
    eta = np.linspace(0, 1, 5)
    a_opt, surf = efficiency_surface(2, p, eta, eta)
    best_a, best = optimize_fock(2, p)
    assert a_opt == best_a
    assert surf[-1, -1] == pytest.approx(best)
    assert np.all((surf >= 0) & (surf <= 1))


def test_pipeline_matches_monte_carlo():
    rng = np.random.default_rng(11)
    for i in range(6):
        n_g = int(rng.integers(1, 6))
        a_s, p = float(rng.uniform(0, 8)), float(rng.uniform(0, 1))
        es, er = float(rng.uniform(0.5, 1)), float(rng.uniform(0.5, 1))
        mc = mc_pipeline(n_g, a_s, es, er, p, 100_000, 1000 + i)
        assert mc.within(subtract_prob_coherent_source(n_g, a_s, es, er, p))


def test_report_json(tmp_path):
    rep = optimize_fidelity(1.0, 0.8)
    text = rep.to_json(tmp_path / "r.json").read_text()
    assert '"alpha_s_opt"' in text and '"per_fock"' in text
    with pytest.raises(InvalidParameter):
        SubtractionReport(1.5, None, [])


def test_golden_section():
    x, v = golden_max(lambda t: -(t - 0.3) ** 2, -1.0, 2.0)
    assert x == pytest.approx(0.3, abs=1e-6)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        best = log_grid_max(lambda t: -math.log(t / 2.0) ** 2, 1e-2, 1e2)
    assert best.x == pytest.approx(2.0, rel=1e-6)
    with pytest.raises(InvalidParameter):
        log_grid_max(lambda t: t, 0.0, 1.0)

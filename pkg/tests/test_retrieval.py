import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rydsub.core import FieldSpec
from rydsub.errors import DegenerateInput, InvalidParameter
from rydsub.oracles import mc_retrieval, mc_scattered
from rydsub.retrieval import (EfficiencyCurve, efficiency_vs_scattered, eta_k,
                              ideal_subtraction_curve, mean_retrieved, mean_retrieved_fock,
                              no_protection_baseline, retrieval_efficiency, retrieved_sum,
                              retrieved_vs_stored, scattered_photons, source_for_scattered)

probs = st.floats(0.0, 1.0)


def test_eta_k_examples():
    assert eta_k(3, 0, 0.7, 0.4) == 0.4
    assert eta_k(1, 2, 1.0, 0.4) == 0.0
    assert eta_k(2, 5, 1.0, 0.4) == 0.4
    assert eta_k(2, 3, 0.5, 1.0) == 0.421875
    with pytest.raises(InvalidParameter):
        eta_k(0, 1, 0.5, 1.0)


@given(st.integers(1, 30), st.integers(0, 30), probs, st.floats(0, 1))
def test_eta_k_range(k, n_s, p, eta_r):
    assert 0.0 <= eta_k(k, n_s, p, eta_r) <= eta_r


def test_no_source_gives_eta_r_exactly():
    for ag in (0.3, 2.0, 7.5):
        assert retrieval_efficiency(FieldSpec(ag, 0.0, 1.0, 0.2), 0.5) == 0.2
        assert mean_retrieved(FieldSpec(ag, 0.0, 1.0, 0.2), 0.5) == pytest.approx(0.2 * ag)


def test_zero_gate_warns_and_returns_limit():
    with pytest.warns(DegenerateInput):
        value = retrieval_efficiency(FieldSpec(0.0, 2.0, 1.0, 0.5), 0.3)
    assert value == pytest.approx(0.5 * math.exp(-0.6))
    near = retrieval_efficiency(FieldSpec(1e-6, 2.0, 1.0, 0.5), 0.3)
    assert value == pytest.approx(near, rel=1e-5)


def test_small_gate_follows_baseline():
    alpha_g, p = 0.05, 0.5
    bar = np.linspace(0.0, 0.1, 11)
    curve = efficiency_vs_scattered(alpha_g, p, bar)
    np.testing.assert_allclose(curve.values, no_protection_baseline(bar, alpha_g), rtol=0.02)


def test_family_ordered_in_alpha_g():
    bar = np.linspace(0.1, 3.0, 30)
    curves = [efficiency_vs_scattered(ag, 0.5, bar).values for ag in (0.5, 1.0, 2.0, 4.0)]
    for lo, hi in zip(curves, curves[1:]):
        assert np.all(hi > lo)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 8.0), st.floats(0.0, 30.0), st.floats(0.01, 1.0), st.floats(0.05, 1.0))
def test_protection_bound(alpha_g, alpha_s, p, eta_r):
    eta = retrieval_efficiency(FieldSpec(alpha_g, alpha_s, 1.0, eta_r), p)
    bar = scattered_photons(FieldSpec(alpha_g, alpha_s), p)
    assert eta >= eta_r * math.exp(-bar / alpha_g) - 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 6.0), st.floats(0.0, 10.0), st.floats(0.0, 0.98), st.floats(0.0, 5.0))
def test_monotone_in_source(alpha_g, alpha_s, p, step):
    f = FieldSpec(alpha_g, alpha_s)
    base = retrieval_efficiency(f, p)
    assert retrieval_efficiency(f.replace(alpha_s=alpha_s + step), p) <= base + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 6.0), st.floats(0.01, 5.0), st.floats(0.01, 0.97))
def test_at_fixed_scattered_photons_larger_p_helps(alpha_g, bar, p):
    def eta(q):
        return retrieved_sum(alpha_g, float(source_for_scattered(bar, alpha_g, q)), q)

    assert eta(p + 0.02) >= eta(p) - 1e-12


def test_at_fixed_source_larger_p_can_raise_efficiency():
    # stronger scattering off the first excitation shields the later ones
    f = FieldSpec(2.0, 5.0)
    assert retrieval_efficiency(f, 0.52) > retrieval_efficiency(f, 0.5)
    assert retrieval_efficiency(FieldSpec(0.5, 0.5), 0.6) < retrieval_efficiency(FieldSpec(0.5, 0.5), 0.5)


def test_truncation_stability():
    from rydsub.core import poisson_cutoff

    for ag, a_s, p in ((3.0, 4.0, 0.4), (0.05, 10.0, 0.9), (12.0, 1.0, 0.2)):
        n = poisson_cutoff(ag)
        a = retrieved_sum(ag, a_s, p)
        b = retrieved_sum(ag, a_s, p, cutoff=2 * n)
        assert abs(a - b) < 1e-10


def test_ideal_curve_limit():
    for ag in (0.5, 1.0, 2.0, 4.0):
        got = mean_retrieved(FieldSpec(ag, math.inf, 1.0, 0.3), 1.0)
        assert got == pytest.approx(ideal_subtraction_curve(ag, 0.3), abs=1e-12)
    diff = mean_retrieved(FieldSpec(2.0, 0.0), 1.0) - mean_retrieved(FieldSpec(2.0, math.inf), 1.0)
    assert diff == pytest.approx(1 - math.exp(-2.0))


def test_scattered_photons():
    assert scattered_photons(FieldSpec(2.0, 3.0), 0.0) == 0.0
    assert scattered_photons(FieldSpec(200.0, 3.0), 0.5) == pytest.approx(3.0)
    bar = scattered_photons(FieldSpec(1.3, 2.2), 0.4)
    assert source_for_scattered(bar, 1.3, 0.4) == pytest.approx(2.2)
    with pytest.raises(InvalidParameter):
        source_for_scattered(1.0, 1.0, 0.0)


def test_fock_counts_match_monte_carlo():
    for n_g, n_s, p, eta_r, seed in ((3, 4, 0.5, 0.7, 1), (5, 2, 0.8, 1.0, 2), (1, 6, 0.3, 0.5, 3)):
        total, per_k = mc_retrieval(n_g, n_s, p, eta_r, 100_000, seed)
        assert total.within(mean_retrieved_fock(n_g, n_s, p, eta_r))
        for k, res in enumerate(per_k, start=1):
            assert res.within(eta_k(k, n_s, p, eta_r))


def test_scattered_matches_monte_carlo():
    assert mc_scattered(3.0, 0.4, n_g=1, seed=4).within(1.2)
    exact = scattered_photons(FieldSpec(1.5, 3.0), 0.4)
    assert mc_scattered(3.0, 0.4, alpha_g=1.5, seed=5).within(exact)


def test_curve_csv(tmp_path):
    curve = retrieved_vs_stored(1.0, 0.5, [0.0, 1.0, 2.0], eta_R=0.2)
    path = curve.to_csv(tmp_path / "c.csv", "mean_retrieved")
    text = path.read_text()
    assert "# eta_R=0.2" in text and "alpha_g,mean_retrieved" in text
    with pytest.raises(InvalidParameter):
        EfficiencyCurve("x", [1.0, 1.0], [0.0, 0.0])


def test_p_out_of_range():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(InvalidParameter):
            retrieval_efficiency(FieldSpec(1.0, 1.0), 1.5)


def test_tiny_efficiencies_keep_relative_accuracy():
    from scipy.stats import poisson

    alpha_g, p = 0.05, 0.5
    alpha_s = float(source_for_scattered(3.0, alpha_g, p))
    n = np.arange(0, 40)
    inner = [np.sum(np.exp(-alpha_s * p * (1 - p) ** np.arange(m))) for m in n]
    direct = float(np.sum(poisson.pmf(n, alpha_g) * inner)) / alpha_g
    assert direct < 1e-8
    assert retrieved_sum(alpha_g, alpha_s, p) == pytest.approx(direct, rel=1e-9)

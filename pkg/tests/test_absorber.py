import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rydsub.absorber import (AbsorberParams, absorb_prob, absorber_fidelity,
                             absorber_subtract_fock, optimize_absorber, residual_prob)
from rydsub.core import scattering_probability
from rydsub.errors import BoundaryHit, InvalidParameter, OptimizationDegenerate
from rydsub.oracles import mc_absorber
from rydsub.subtraction import optimize_fidelity


def test_probability_examples():
    assert absorb_prob(AbsorberParams(1.0, 2.0, 1.0)) == pytest.approx(1 - math.exp(-0.5))
    assert residual_prob(AbsorberParams(1.0, 0.0, 0.0)) == pytest.approx(1 - math.exp(-2))
    assert absorb_prob(AbsorberParams(3.0, 1e12, 5.0)) < 1e-20


@given(st.floats(0, 20), st.floats(0, 1e3))
def test_zero_bandwidth_identity(d_b, delta):
    params = AbsorberParams(d_b, delta, 0.0)
    assert absorb_prob(params) == residual_prob(params)


@given(st.floats(0, 20), st.floats(0, 100), st.floats(0, 100), st.floats(0.01, 10))
def test_probabilities_bounded_and_monotone_in_detuning(d_b, delta, ratio, step):
    a = AbsorberParams(d_b, delta, ratio)
    b = AbsorberParams(d_b, delta + step, ratio)
    for f in (absorb_prob, residual_prob):
        assert 0 <= f(a) <= 1
        assert f(b) <= f(a)


def test_fock_examples():
    params = AbsorberParams(2.0, 3.0, 10.0)
    assert absorber_subtract_fock(1, params) == pytest.approx(absorb_prob(params))
    assert absorber_subtract_fock(3, AbsorberParams(1.0, 1e9, 0.0)) == pytest.approx(0.0)
    # hand value with p = 0.9, p~ = 0.1
    from rydsub.absorber import _fock
    assert _fock(3, 0.9, 0.1) == pytest.approx(0.819, abs=1e-15)
    assert _fock(4, 0.3, 0.0) == pytest.approx(1 - 0.7 ** 4)
    with pytest.raises(InvalidParameter):
        absorber_subtract_fock(0, params)


def test_fock_recursion():
    params = AbsorberParams(2.5, 4.0, 12.0)
    p, q = absorb_prob(params), residual_prob(params)
    prev = absorber_subtract_fock(1, params)
    for n in range(2, 11):
        cur = absorber_subtract_fock(n, params)
        assert abs(cur - (p * (1 - q) ** (n - 1) + (1 - p) * prev)) < 1e-12
        prev = cur


def test_fock_matches_monte_carlo():
    assert mc_absorber(3, 0.9, 0.1, 100_000, 3).within(0.819)
    params = AbsorberParams(3.0, 2.0, 11.0)
    got = mc_absorber(5, absorb_prob(params), residual_prob(params), 100_000, 4)
    assert got.within(absorber_subtract_fock(5, params))


def test_fidelity_limits():
    params = AbsorberParams(2.0, 3.0, 10.0)
    assert absorber_fidelity(0.0, params) == 1.0
    assert 0 <= absorber_fidelity(2.0, params) <= 1


def test_params_validation():
    with pytest.raises(InvalidParameter):
        AbsorberParams(-1.0, 1.0, 1.0)
    with pytest.raises(InvalidParameter):
        AbsorberParams(1.0, 1.0, 5.0, ratio_min=10.0)
    with pytest.raises(InvalidParameter):
        optimize_absorber(2.0, 1.0, ratio_min=0.0)


def test_zero_depth_gives_vacuum_only():
    with pytest.warns(OptimizationDegenerate):
        rep = optimize_absorber(2.0, 0.0)
    assert rep.fidelity == pytest.approx(math.exp(-2.0))


def test_optimum_respects_constraint_and_beats_grid():
    rep = optimize_absorber(2.0, 3.0, ratio_min=10.0)
    loc = rep.location
    assert loc["eit_over_dephasing"] >= 10.0
    params = AbsorberParams(3.0, loc["delta_over_gamma"], loc["eit_over_dephasing"], 10.0)
    assert rep.fidelity == pytest.approx(absorber_fidelity(2.0, params), abs=1e-14)
    for d in np.logspace(-1, 3, 25):
        for r in np.logspace(1, 3, 9):
            assert rep.fidelity >= absorber_fidelity(2.0, AbsorberParams(3.0, d, r)) - 1e-12


def test_tighter_constraint_cannot_help():
    loose = optimize_absorber(2.0, 3.0, ratio_min=2.0).fidelity
    tight = optimize_absorber(2.0, 3.0, ratio_min=10.0).fidelity
    assert loose >= tight


def test_no_boundary_warning_in_default_range():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error", BoundaryHit)
        for d_b in (0.25, 1.0, 6.0, 10.0):
            optimize_absorber(2.0, d_b)


def test_below_decoherence_mechanism():
    for d_b in (1.0, 5.0):
        absorber = optimize_absorber(2.0, d_b).fidelity
        decoherence = optimize_fidelity(2.0, float(scattering_probability(d_b))).fidelity
        assert absorber < decoherence

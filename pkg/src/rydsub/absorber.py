"""Saturable-absorber photon subtractor.

One incoherently stored excitation blockades the medium; later photons see a
far-detuned two-level medium and are lost only with the residual
probability. The fidelity is optimised over the detuning and over the ratio
of EIT bandwidth to dephasing, which is held above a lower bound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .core import poisson_cutoff
from .errors import BoundaryHit, InvalidParameter, OptimizationDegenerate
from .optimize import FLAT_TOL, golden_max
from .subtraction import POISSON_TAIL, SubtractionReport

DETUNING_BOUNDS = (0.1, 1e3)
RATIO_MAX = 1e3
DEFAULT_RATIO_MIN = 10.0
GRID = 33
SWEEPS = 20


@dataclass(frozen=True)
class AbsorberParams:
    """``ratio_min`` may be 0 here so the Gamma_EIT = 0 case is expressible;
    ``optimize_absorber`` requires it to be positive."""

    d_b: float
    delta_over_gamma: float
    eit_over_dephasing: float
    ratio_min: float = 0.0

    def __post_init__(self):
        for name in ("d_b", "delta_over_gamma", "eit_over_dephasing", "ratio_min"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} must be finite")
        if self.d_b < 0:
            raise InvalidParameter("d_b must be >= 0")
        if self.ratio_min < 0 or self.eit_over_dephasing < self.ratio_min:
            raise InvalidParameter("need eit_over_dephasing >= ratio_min >= 0")


def _absorb(d_b, delta, ratio):
    return -math.expm1(-2.0 * d_b * (1.0 + ratio) / ((1.0 + ratio) ** 2 + delta ** 2))


def absorb_prob(params: AbsorberParams) -> float:
    return _absorb(params.d_b, params.delta_over_gamma, params.eit_over_dephasing)


def residual_prob(params: AbsorberParams) -> float:
    return _absorb(params.d_b, params.delta_over_gamma, 0.0)


def _fock(n_g: int, p: float, p_res: float) -> float:
    k = np.arange(1, n_g + 1)
    return float(np.sum(p * (1.0 - p) ** (k - 1) * (1.0 - p_res) ** (n_g - k)))


def absorber_subtract_fock(n_g: int, params: AbsorberParams) -> float:
    """Probability that exactly one of n_g photons is absorbed."""
    if n_g < 1:
        raise InvalidParameter("n_g must be >= 1")
    return _fock(int(n_g), absorb_prob(params), residual_prob(params))


def _fidelity(alpha_g, p, p_res, tail=POISSON_TAIL):
    if alpha_g == 0:
        return 1.0
    n_max = max(poisson_cutoff(alpha_g, tail), 1)
    total = math.exp(-alpha_g)
    # P1(n) = p (1-p~)^{n-1} + (1-p) P1(n-1)
    prob = 0.0
    w = poisson.pmf(np.arange(1, n_max + 1), alpha_g)
    for n in range(1, n_max + 1):
        prob = p * (1.0 - p_res) ** (n - 1) + (1.0 - p) * prob
        total += w[n - 1] * prob
    return min(total, 1.0)


def absorber_fidelity(alpha_g: float, params: AbsorberParams) -> float:
    return _fidelity(alpha_g, absorb_prob(params), residual_prob(params))


def optimize_absorber(alpha_g: float, d_b: float,
                      ratio_min: float = DEFAULT_RATIO_MIN) -> SubtractionReport:
    """Maximise the absorber fidelity over detuning and the bandwidth ratio.

    A 33 x 33 log grid is followed by alternating golden-section line
    searches in log coordinates. Ending on the ``ratio_min`` edge is the
    expected active constraint; ending on any other edge warns ``BoundaryHit``.
    """
    if not ratio_min > 0:
        raise InvalidParameter("ratio_min must be > 0")
    if ratio_min >= RATIO_MAX:
        raise InvalidParameter(f"ratio_min must be below {RATIO_MAX}")
    lo_d, hi_d = map(math.log, DETUNING_BOUNDS)
    lo_r, hi_r = math.log(ratio_min), math.log(RATIO_MAX)

    def objective(ld, lr):
        return _fidelity(alpha_g, _absorb(d_b, math.exp(ld), math.exp(lr)),
                         _absorb(d_b, math.exp(ld), 0.0))

    gd = np.linspace(lo_d, hi_d, GRID)
    gr = np.linspace(lo_r, hi_r, GRID)
    table = np.array([[objective(a, b) for b in gr] for a in gd])
    snapshot = {"alpha_g": alpha_g, "d_b": d_b, "ratio_min": ratio_min,
                "detuning_bounds": list(DETUNING_BOUNDS), "ratio_max": RATIO_MAX}
    if np.ptp(table) <= FLAT_TOL:
        warnings.warn("absorber fidelity is flat over the domain", OptimizationDegenerate,
                      stacklevel=2)
        ld, lr, best = lo_d, lo_r, float(table[0, 0])
    else:
        i, j = np.unravel_index(int(np.argmax(table)), table.shape)
        ld, lr, best = gd[i], gr[j], float(table[i, j])
        step_d, step_r = gd[1] - gd[0], gr[1] - gr[0]
        for _ in range(SWEEPS):
            prev = best
            t, v = golden_max(lambda s: objective(s, lr),
                              max(lo_d, ld - step_d), min(hi_d, ld + step_d))
            if v >= best:
                ld, best = t, v
            t, v = golden_max(lambda s: objective(ld, s),
                              max(lo_r, lr - step_r), min(hi_r, lr + step_r))
            if v >= best:
                lr, best = t, v
            if best - prev <= FLAT_TOL:
                break
        edge = 1e-6
        if (ld - lo_d < edge or hi_d - ld < edge or hi_r - lr < edge):
            warnings.warn("absorber optimum lies on the search boundary", BoundaryHit,
                          stacklevel=2)
    # golden section only approaches an edge; land exactly on the ratio bound
    delta = math.exp(ld)
    ratio = ratio_min if lr - lo_r < 1e-8 else math.exp(lr)
    params = AbsorberParams(d_b, delta, ratio, ratio_min)
    p, p_res = absorb_prob(params), residual_prob(params)
    best = _fidelity(alpha_g, p, p_res)
    n_max = max(poisson_cutoff(alpha_g, POISSON_TAIL), 1) if alpha_g > 0 else 0
    fock = [(n, _fock(n, p, p_res)) for n in range(1, n_max + 1)]
    return SubtractionReport(min(best, 1.0), None, fock, snapshot, {
        "delta_over_gamma": delta, "eit_over_dephasing": params.eit_over_dephasing,
        "p": p, "p_residual": p_res,
    })

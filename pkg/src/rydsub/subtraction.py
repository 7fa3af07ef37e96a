"""Single-photon subtraction through scattering-induced decoherence.

A gate Fock state loses exactly one photon in one of three ways: one photon
fails to store, one stored excitation is decohered by the source, or one
coherent excitation fails to retrieve. All three are combined here, then
averaged over coherent source and gate statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import poisson

from . import io
from .core import FieldSpec, poisson_cutoff
from .errors import InvalidParameter
from .optimize import log_grid_max

POISSON_TAIL = 1e-12
ALPHA_S_MIN = 1e-3
ALPHA_S_MAX = 50.0


def _check(n, p=None, eta=None):
    if n < 0 or int(n) != n:
        raise InvalidParameter(f"photon number must be a non-negative integer, got {n}")
    if p is not None and not 0 <= p <= 1:
        raise InvalidParameter(f"p must lie in [0, 1], got {p}")
    if eta is not None and not 0 <= eta <= 1:
        raise InvalidParameter(f"efficiency must lie in [0, 1], got {eta}")


def _binomial_loss(n: int, eta: float) -> tuple:
    # (all survive, exactly one lost)
    if n == 0:
        return 1.0, 0.0
    return eta ** n, n * (1.0 - eta) * eta ** (n - 1)


def storage_probs(n_g: int, eta_S: float) -> tuple:
    _check(n_g, eta=eta_S)
    return _binomial_loss(int(n_g), eta_S)


def retrieval_probs(n_g: int, eta_R: float) -> tuple:
    _check(n_g, eta=eta_R)
    return _binomial_loss(int(n_g), eta_R)


def _hit_probs(n_g: int, p: float) -> tuple:
    """Per-photon probabilities: scatter off excitation k (array), pass all."""
    k = np.arange(1, n_g + 1)
    return p * np.power(1.0 - p, k - 1), (1.0 - p) ** n_g


def decoherence_probs(n_g: int, n_s: int, p: float) -> tuple:
    """(no excitation decohered, exactly one decohered) after n_s source photons."""
    _check(n_g, p)
    _check(n_s)
    if n_g == 0:
        return 1.0, 0.0
    hit, miss = _hit_probs(int(n_g), p)
    p0 = miss ** n_s
    return p0, float(np.sum((hit + miss) ** n_s - p0))


def subtract_prob_fock(n_g: int, n_s: int, eta_S: float, eta_R: float, p: float) -> float:
    """Probability that exactly one of n_g gate photons is removed."""
    if n_g < 1:
        raise InvalidParameter("n_g must be >= 1")
    s0, s1 = storage_probs(n_g, eta_S)
    r0_less, _ = retrieval_probs(n_g - 1, eta_R)
    r0, r1 = retrieval_probs(n_g, eta_R)
    d0_less, _ = decoherence_probs(n_g - 1, n_s, p)
    d0, d1 = decoherence_probs(n_g, n_s, p)
    return s1 * d0_less * r0_less + s0 * d1 * r0_less + s0 * d0 * r1


def _pgf(alpha_s: float, c):
    """Poisson average of c**n_s with mean alpha_s: exp(-alpha_s (1 - c))."""
    c = np.asarray(c, dtype=float)
    loss = 1.0 - c
    if math.isinf(alpha_s):
        return np.where(loss <= 0.0, 1.0, 0.0)
    return np.exp(-alpha_s * loss)


def _coherent_decoherence(n_g: int, alpha_s: float, p: float) -> tuple:
    if n_g == 0:
        return 1.0, 0.0
    hit, miss = _hit_probs(n_g, p)
    d0 = float(_pgf(alpha_s, miss))
    return d0, float(np.sum(_pgf(alpha_s, hit + miss) - d0))


def subtract_prob_coherent_source(n_g: int, alpha_s: float, eta_S: float, eta_R: float,
                                  p: float) -> float:
    """Fock-state success probability averaged over a coherent source.

    Every n_s dependence is a power c**n_s, so the Poisson average is taken
    in closed form; ``alpha_s = inf`` is the intense-source limit.
    """
    if n_g < 1:
        raise InvalidParameter("n_g must be >= 1")
    if not alpha_s >= 0:
        raise InvalidParameter("alpha_s must be >= 0")
    _check(n_g, p, eta_S)
    _check(n_g, eta=eta_R)
    s0, s1 = _binomial_loss(n_g, eta_S)
    r0_less, _ = _binomial_loss(n_g - 1, eta_R)
    r0, r1 = _binomial_loss(n_g, eta_R)
    d0_less, _ = _coherent_decoherence(n_g - 1, alpha_s, p)
    d0, d1 = _coherent_decoherence(n_g, alpha_s, p)
    return s1 * d0_less * r0_less + s0 * d1 * r0_less + s0 * d0 * r1


def subtract_prob_coherent_series(n_g: int, alpha_s: float, eta_S: float, eta_R: float,
                                  p: float, tail: float = POISSON_TAIL) -> float:
    """Same average by explicit truncated Poisson sum over n_s (cross-check)."""
    n_max = poisson_cutoff(alpha_s, tail)
    ns = np.arange(n_max + 1)
    w = poisson.pmf(ns, alpha_s)
    return float(sum(wi * subtract_prob_fock(n_g, int(n), eta_S, eta_R, p)
                     for n, wi in zip(ns, w)))


def _gate_terms(alpha_g: float, tail: float):
    n_max = max(poisson_cutoff(alpha_g, tail), 1)
    ns = np.arange(1, n_max + 1)
    return ns, poisson.pmf(ns, alpha_g)


def per_fock(fields: FieldSpec, p: float, tail: float = POISSON_TAIL) -> list:
    ns, _ = _gate_terms(fields.alpha_g, tail)
    return [(int(n), subtract_prob_coherent_source(int(n), fields.alpha_s, fields.eta_S,
                                                   fields.eta_R, p)) for n in ns]


def fidelity(fields: FieldSpec, p: float, tail: float = POISSON_TAIL) -> float:
    """Coherent-gate subtraction fidelity; the vacuum term counts as success."""
    if fields.alpha_g == 0:
        return 1.0
    ns, w = _gate_terms(fields.alpha_g, tail)
    probs = np.array([subtract_prob_coherent_source(int(n), fields.alpha_s, fields.eta_S,
                                                    fields.eta_R, p) for n in ns])
    value = math.exp(-fields.alpha_g) + float(np.dot(w, probs))
    return min(max(value, 0.0), 1.0)


@dataclass
class SubtractionReport:
    fidelity: float
    alpha_s_opt: float | None
    per_fock: list
    params: dict = field(default_factory=dict)
    location: dict = field(default_factory=dict)

    def __post_init__(self):
        if not -1e-12 <= self.fidelity <= 1 + 1e-12:
            raise InvalidParameter(f"fidelity {self.fidelity} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "alpha_s_opt": self.alpha_s_opt,
            "per_fock": [list(t) for t in self.per_fock],
            "params": self.params,
            "location": self.location,
        }

    def to_json(self, path) -> Path:
        return io.write_json(path, self.to_dict())


def optimize_fidelity(alpha_g: float, p: float, eta_S: float = 1.0, eta_R: float = 1.0,
                      bounds: tuple = (ALPHA_S_MIN, ALPHA_S_MAX)) -> SubtractionReport:
    """Maximise the fidelity over the mean source photon number."""
    lo, hi = bounds
    if not 0 < lo < hi:
        raise InvalidParameter("alpha_s bounds must satisfy 0 < lo < hi")
    base = FieldSpec(alpha_g, 0.0, eta_S, eta_R)
    best = log_grid_max(lambda a: fidelity(base.replace(alpha_s=a), p), lo, hi)
    opt = base.replace(alpha_s=best.x)
    return SubtractionReport(best.value, best.x, per_fock(opt, p),
                             {**opt.to_dict(), "p": p, "bounds": list(bounds)},
                             {"alpha_s": best.x})


def optimize_fock(n_g: int, p: float, eta_S: float = 1.0, eta_R: float = 1.0,
                  bounds: tuple = (ALPHA_S_MIN, ALPHA_S_MAX)) -> tuple:
    """(alpha_s_opt, P1) maximising the Fock-state success probability."""
    best = log_grid_max(lambda a: subtract_prob_coherent_source(n_g, a, eta_S, eta_R, p),
                        *bounds)
    return best.x, best.value


def efficiency_surface(n_g: int, p: float, eta_S_axis, eta_R_axis,
                       bounds: tuple = (ALPHA_S_MIN, ALPHA_S_MAX)) -> tuple:
    """Success probability over (eta_S, eta_R) at the alpha_s optimal for perfect efficiencies.

    Returns ``(alpha_s_opt, table)`` with ``table[i, j]`` at
    ``(eta_S_axis[i], eta_R_axis[j])``.
    """
    alpha_s, _ = optimize_fock(n_g, p, 1.0, 1.0, bounds)
    table = np.array([[subtract_prob_coherent_source(n_g, alpha_s, es, er, p)
                       for er in eta_R_axis] for es in eta_S_axis])
    return alpha_s, table

"""Sequential retrieval model for many stored gate excitations.

A source photon reaches excitation k (counted from the entrance) only if it
passed the k-1 excitations before it, so the k-th excitation stays coherent
after n_s photons with probability [1 - p (1-p)^{k-1}]^{n_s}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import poisson

from . import io
from .core import FieldSpec, poisson_cutoff
from .errors import DegenerateInput, InvalidParameter

POISSON_TAIL = 1e-12


def _check_p(p):
    if not 0 <= p <= 1:
        raise InvalidParameter(f"p must lie in [0, 1], got {p}")


def eta_k(k: int, n_s: int, p: float, eta_R: float) -> float:
    """Retrieval efficiency of the k-th excitation after n_s source photons."""
    if k < 1 or n_s < 0:
        raise InvalidParameter("need k >= 1 and n_s >= 0")
    _check_p(p)
    return eta_R * (1.0 - p * (1.0 - p) ** (k - 1)) ** n_s


def _reach(p: float, k: np.ndarray) -> np.ndarray:
    # p (1-p)^{k-1}, with 0^0 = 1 so that p = 1 hits only the first excitation
    return p * np.power(1.0 - p, k - 1)


def _loss(alpha_s: float, x: np.ndarray) -> np.ndarray:
    """1 - exp(-alpha_s x), exact zero where x == 0 (also for alpha_s = inf)."""
    out = np.zeros_like(x)
    nz = x > 0
    out[nz] = -np.expm1(-alpha_s * x[nz])
    return out


def retrieved_sum(alpha_g: float, alpha_s: float, p: float, tail: float = POISSON_TAIL,
                  cutoff: int | None = None) -> float:
    """sum_{n_g} Pois(n_g) sum_{k<=n_g} exp(-alpha_s p (1-p)^{k-1}), divided by alpha_g.

    The double sum is reordered as sum_k P(N >= k) exp(...), and written as
    1 - (1/alpha_g) sum_k P(N >= k) [1 - exp(...)] so that alpha_s = 0 gives
    exactly one. ``cutoff`` overrides the last gate photon number kept.
    """
    n_max = poisson_cutoff(alpha_g, tail) if cutoff is None else cutoff
    k = np.arange(1, n_max + 2)
    at_least = poisson.sf(k - 1, alpha_g)
    reach = _reach(p, k)
    value = 1.0 - np.sum(at_least * _loss(alpha_s, reach)) / alpha_g
    if value < 0.5:
        # small results lose their digits to cancellation; sum the survivors directly
        kept = 1.0 - _loss(alpha_s, reach)
        value = np.sum(at_least * kept) / np.sum(at_least)
    return float(value)


def retrieval_efficiency(fields: FieldSpec, p: float, tail: float = POISSON_TAIL) -> float:
    """Total retrieval efficiency for coherent gate and source pulses.

    For ``alpha_g = 0`` the alpha_g -> 0 limit ``eta_R exp(-alpha_s p)`` is
    returned with a ``DegenerateInput`` warning.
    """
    _check_p(p)
    if fields.alpha_g == 0:
        warnings.warn("alpha_g = 0: returning the alpha_g -> 0 limit", DegenerateInput,
                      stacklevel=2)
        return fields.eta_R * float(1.0 - _loss(fields.alpha_s, np.array([p]))[0])
    return fields.eta_R * retrieved_sum(fields.alpha_g, fields.alpha_s, p, tail)


def mean_retrieved(fields: FieldSpec, p: float, tail: float = POISSON_TAIL) -> float:
    """Mean number of retrieved gate photons, alpha_g * eta."""
    _check_p(p)
    if fields.alpha_g == 0:
        return 0.0
    return fields.alpha_g * fields.eta_R * retrieved_sum(fields.alpha_g, fields.alpha_s, p, tail)


def mean_retrieved_fock(n_g: int, n_s: int, p: float, eta_R: float) -> float:
    """Mean retrieved photons from Fock states |n_g>, |n_s>: sum_k eta_k."""
    return float(sum(eta_k(k, n_s, p, eta_R) for k in range(1, n_g + 1)))


def scattered_photons(fields: FieldSpec, p: float) -> float:
    """Mean number of source photons scattered by the stored excitations.

    A photon passes n_g excitations with probability (1-p)^{n_g}; the Poisson
    average of that is exp(-alpha_g p).
    """
    _check_p(p)
    return fields.alpha_s * float(-np.expm1(-fields.alpha_g * p))


def source_for_scattered(alpha_s_bar, alpha_g: float, p: float):
    """Invert ``scattered_photons`` for alpha_s at fixed alpha_g and p."""
    frac = -math.expm1(-alpha_g * p)
    if frac == 0:
        raise InvalidParameter("no source photon scatters when alpha_g * p = 0")
    return np.asarray(alpha_s_bar, dtype=float) / frac


def no_protection_baseline(alpha_s_bar, alpha_g: float, eta_R: float = 1.0):
    """eta_R exp(-alpha_s_bar / alpha_g): every scattered photon decoheres a gate photon."""
    return eta_R * np.exp(-np.asarray(alpha_s_bar, dtype=float) / alpha_g)


@dataclass
class EfficiencyCurve:
    axis_name: str
    axis: np.ndarray
    values: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.axis.size > 1 and np.any(np.diff(self.axis) <= 0):
            raise InvalidParameter("curve axis must be strictly increasing")
        if self.params.get("normalized") and np.any((self.values < 0) | (self.values > 1)):
            raise InvalidParameter("normalised efficiencies must lie in [0, 1]")

    def to_csv(self, path, name: str = "value") -> Path:
        rows = np.column_stack([self.axis, self.values])
        return io.write_csv(path, [self.axis_name, name], rows, self.params)


def efficiency_vs_scattered(alpha_g: float, p: float, alpha_s_bar,
                            eta_R: float = 1.0) -> EfficiencyCurve:
    """eta / eta_R against the mean number of scattered source photons."""
    alpha_s = source_for_scattered(alpha_s_bar, alpha_g, p)
    values = [retrieved_sum(alpha_g, a, p) for a in alpha_s]
    return EfficiencyCurve("alpha_s_bar", alpha_s_bar, values,
                           {"alpha_g": alpha_g, "p": p, "eta_R": eta_R, "normalized": True})


def retrieved_vs_stored(alpha_s: float, p: float, alpha_g_axis,
                        eta_R: float = 1.0) -> EfficiencyCurve:
    values = [mean_retrieved(FieldSpec(a, alpha_s, 1.0, eta_R), p) for a in alpha_g_axis]
    return EfficiencyCurve("alpha_g", alpha_g_axis, values,
                           {"alpha_s": alpha_s, "p": p, "eta_R": eta_R})


def ideal_subtraction_curve(alpha_g, eta_R: float = 1.0):
    """eta_R (alpha_g - 1 + e^{-alpha_g}): p = 1 with an intense source."""
    alpha_g = np.asarray(alpha_g, dtype=float)
    return eta_R * (alpha_g + np.expm1(-alpha_g))

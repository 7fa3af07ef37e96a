"""Dimensionless parameters, the rescaled van der Waals potential and the
per-excitation scattering probability.

All lengths are in units of the blockade radius z_b, where the rescaled
potential equals one.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
import numpy as np
from scipy import integrate

from .errors import InvalidParameter

# decay exponent of A = exp(-c d_b): c = -2 Re[(2 pi / 3) (-1)^(11/12)]
SCATTERING_EXPONENT = 4.0 * math.pi / 3.0 * math.cos(math.pi / 12.0)
APPROX_EXPONENT = 4.0


@dataclass(frozen=True)
class ModelParams:
    d_b: float = 1.0
    length: float = 20.0
    quad_rel_tol: float = 1e-10
    grid_points: int = 64
    v_cap: float = 1e9

    def __post_init__(self):
        if not (self.d_b >= 0 and math.isfinite(self.d_b)):
            raise InvalidParameter(f"d_b must be finite and >= 0, got {self.d_b}")
        if not (self.length > 0 and math.isfinite(self.length)):
            raise InvalidParameter(f"length must be > 0, got {self.length}")
        if not 0 < self.quad_rel_tol < 1:
            raise InvalidParameter("quad_rel_tol must lie in (0, 1)")
        if int(self.grid_points) != self.grid_points or self.grid_points < 8:
            raise InvalidParameter("grid_points must be an integer >= 8")
        # upper limit keeps v_cap**2 finite in the bounded integrand forms
        if not 1e6 <= self.v_cap <= 1e150:
            raise InvalidParameter("v_cap must lie in [1e6, 1e150]")

    def replace(self, **changes) -> ModelParams:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class GateConfig:
    """Positions of the stored excitations, kept in ascending order."""

    positions: tuple

    def __post_init__(self):
        pos = tuple(sorted(float(p) for p in self.positions))
        if not pos:
            raise InvalidParameter("a gate configuration needs at least one excitation")
        if any(not math.isfinite(p) for p in pos):
            raise InvalidParameter("positions must be finite")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise InvalidParameter(f"positions must be distinct, got {pos}")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def of(cls, value) -> GateConfig:
        if isinstance(value, GateConfig):
            return value
        if np.ndim(value) == 0:
            value = [value]
        return cls(tuple(value))

    @property
    def n_g(self) -> int:
        return len(self.positions)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=float)

    def check_inside(self, length: float) -> None:
        if self.positions[0] < 0 or self.positions[-1] > length:
            raise InvalidParameter(
                f"positions {self.positions} fall outside the medium [0, {length}]")

    def min_spacing(self) -> float:
        p = self.positions
        return min((b - a for a, b in zip(p, p[1:])), default=math.inf)


@dataclass(frozen=True)
class FieldSpec:
    """Mean photon numbers of the gate and source pulses plus linear efficiencies."""

    alpha_g: float
    alpha_s: float = 0.0
    eta_S: float = 1.0
    eta_R: float = 1.0

    def __post_init__(self):
        if not self.alpha_g >= 0:
            raise InvalidParameter("alpha_g must be >= 0")
        if not self.alpha_s >= 0:
            raise InvalidParameter("alpha_s must be >= 0")
        for name in ("eta_S", "eta_R"):
            if not 0 <= getattr(self, name) <= 1:
                raise InvalidParameter(f"{name} must lie in [0, 1]")

    def replace(self, **changes) -> FieldSpec:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def rescaled_potential(r, params: ModelParams | None = None, v_cap: float | None = None):
    """min(|r|^-6, v_cap); accepts scalars or arrays."""
    if v_cap is None:
        v_cap = (params or ModelParams()).v_cap
    r = np.asarray(r, dtype=float)
    r2 = r * r
    with np.errstate(divide="ignore"):
        out = np.minimum(1.0 / (r2 * r2 * r2), v_cap)
    return out[()] if out.ndim == 0 else out


def total_potential(z, config, params: ModelParams | None = None):
    """Sum of the rescaled potential from every excitation in ``config``."""
    config = GateConfig.of(config)
    params = params or ModelParams()
    z = np.asarray(z, dtype=float)
    out = sum(rescaled_potential(z - x, v_cap=params.v_cap) for x in config.positions)
    return out[()] if np.ndim(out) == 0 else out


def scattering_probability(d_b, exact: bool = True):
    """p = 1 - exp(-c d_b), with c the exact constant or the rounded value 4."""
    c = SCATTERING_EXPONENT if exact else APPROX_EXPONENT
    d_b = np.asarray(d_b, dtype=float)
    if np.any(d_b < 0):
        raise InvalidParameter("d_b must be >= 0")
    out = -np.expm1(-c * d_b)
    return out[()] if out.ndim == 0 else out


def transmission_factor(d_b, exact: bool = True):
    """A = 1 - p, the probability a source photon passes one excitation."""
    c = SCATTERING_EXPONENT if exact else APPROX_EXPONENT
    return np.exp(-c * np.asarray(d_b, dtype=float))[()]


def scattering_exponent_by_quadrature(v_cap: float = 1e9) -> float:
    """Recover the decay exponent by integrating V/(i-V) - V/(i+V) over the line.

    The integrand equals -2 V^2 / (1 + V^2); it is even, so twice the
    half-line integral is taken.
    """
    def f(r):
        v = float(rescaled_potential(r, v_cap=v_cap))
        return 2.0 * v * v / (1.0 + v * v)

    head, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(f, 1.0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 2.0 * (head + tail)


def poisson_cutoff(mean: float, tail: float = 1e-12) -> int:
    """Smallest n with P(N > n) < tail for N ~ Poisson(mean)."""
    from scipy.stats import poisson

    if mean <= 0:
        return 0
    n = int(poisson.isf(tail, mean))
    while poisson.sf(n, mean) >= tail:
        n += 1
    return n

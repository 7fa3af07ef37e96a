"""Transmission amplitude and decoherence kernel of stored spin waves.

``phi(x, y)`` is the factor by which one passing source photon multiplies
the density-matrix element between gate configurations ``x`` and ``y``.
Two exact representations are integrated:

* ``"direct"``: 1 + d_b * int -i (Sx - Sy) / ((i + Sx)(i - Sy)) e^{E(z)} dz
* ``"split"``:  e^{E(L)} - 2 d_b * int [Sx/(i + Sx)] [Sy/(i - Sy)] e^{E(z)} dz

with ``E(z) = d_b * int_0^z [Sy/(i - Sy) - Sx/(i + Sx)]``. They are related by
an integration by parts. The split form has no subtractive cancellation, so
it keeps relative accuracy when the kernel is exponentially small (large
d_b); it is the default.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .core import GateConfig, ModelParams, scattering_probability, total_potential
from .errors import DiluteViolation, DimensionMismatch, QuadratureFailure

_FORMS = {"split": 0, "direct": 1}

EDGE_MARGIN = 2.0
DILUTE_SPACING = 2.0


@dataclass(frozen=True)
class PhiValue:
    value: complex
    n_g: int
    quadrature_estimate_error: float = 0.0
    panels: int = 0
    flags: tuple = field(default=())

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)


def _flags(params: ModelParams, *configs: GateConfig) -> tuple:
    out = []
    for cfg in configs:
        if cfg.positions[0] < EDGE_MARGIN or cfg.positions[-1] > params.length - EDGE_MARGIN:
            out.append("near_boundary")
        if cfg.min_spacing() < DILUTE_SPACING:
            out.append("overlapping_blockade")
    return tuple(sorted(set(out)))


def propagation_exponent(z: float, config, params: ModelParams) -> complex:
    """d_b * int_0^z Sx/(i - Sx) dz' for the configuration ``config``."""
    config = GateConfig.of(config)
    z = float(z)
    if not 0.0 <= z <= params.length:
        raise ValueError(f"z={z} outside [0, {params.length}]")
    value, err, ok = kernels.exponent_kernel(
        config.as_array(), z, params.d_b, params.quad_rel_tol, params.v_cap)
    if not ok:
        raise QuadratureFailure(f"propagation exponent did not converge for {config}")
    return value


def transmission_amplitude(z: float, config, params: ModelParams) -> complex:
    """Normalised spin-wave amplitude e~(z, x) = exp(E_x(z)) / (1 + i S(z)).

    The physical eigenvalue is this times -G/Omega_s, a constant that cancels
    in every ratio computed here.
    """
    config = GateConfig.of(config)
    s = float(total_potential(z, config, params))
    return complex(np.exp(propagation_exponent(z, config, params)) / (1.0 + 1j * s))


def transmission_profile(zs, config, params: ModelParams) -> np.ndarray:
    """e~(z, x) on an array of coordinates.

    The exponent is accumulated over consecutive sorted coordinates, so each
    stretch of the medium is integrated once.
    """
    config = GateConfig.of(config)
    zs = np.asarray(zs, dtype=float)
    order = np.argsort(zs, kind="stable")
    srt = zs[order]
    if srt.size and (srt[0] < 0 or srt[-1] > params.length):
        raise ValueError("coordinates must lie inside the medium")
    xs = config.as_array()
    exps = np.empty(srt.size, dtype=complex)
    running = 0.0j
    prev = 0.0
    for i, z in enumerate(srt):
        if z > prev:
            # shift so the kernel integrates [prev, z]
            part, _, ok = kernels.exponent_kernel(
                xs - prev, z - prev, params.d_b, params.quad_rel_tol, params.v_cap)
            if not ok:
                raise QuadratureFailure(f"propagation exponent failed at z={z}")
            running += part
            prev = z
        exps[i] = running
    s = total_potential(srt, config, params)
    out = np.empty_like(exps)
    out[order] = np.exp(exps) / (1.0 + 1j * s)
    return out


def _pair(x, y, params: ModelParams):
    x = GateConfig.of(x)
    y = GateConfig.of(y)
    if x.n_g != y.n_g:
        raise DimensionMismatch(f"n_g differs: {x.n_g} vs {y.n_g}")
    x.check_inside(params.length)
    y.check_inside(params.length)
    return x, y


def phi_raw(xs, ys, params: ModelParams, form: str = "split") -> PhiValue:
    """Kernel for raw position arrays; coincident excitations are allowed."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise DimensionMismatch(f"n_g differs: {xs.size} vs {ys.size}")
    value, err, panels, ok = kernels.phi_kernel(
        xs, ys, params.d_b, params.length, params.quad_rel_tol, params.v_cap, _FORMS[form])
    if not ok:
        raise QuadratureFailure(f"phi did not converge for x={xs}, y={ys}")
    return PhiValue(value, xs.size, err, panels)


def phi(x, y, params: ModelParams, form: str = "split") -> PhiValue:
    """Decoherence kernel Phi_{n_g}(x, y); equals 1 on the diagonal."""
    x, y = _pair(x, y, params)
    out = phi_raw(x.as_array(), y.as_array(), params, form)
    return PhiValue(out.value, out.n_g, out.quadrature_estimate_error, out.panels,
                    _flags(params, x, y))


def phi_approx_sum(x, y, params: ModelParams) -> PhiValue:
    """Dilute-limit kernel 1 + sum_k A^{k-1} phi_1(x_k, y_k).

    Each single-excitation term is weighted by the probability (1-p)^{k-1}
    that a source photon reaches the k-th excitation unscattered.
    """
    x, y = _pair(x, y, params)
    if min(x.min_spacing(), y.min_spacing()) < DILUTE_SPACING:
        warnings.warn(f"configurations {x.positions} / {y.positions} are not dilute",
                      DiluteViolation, stacklevel=2)
    a = 1.0 - scattering_probability(params.d_b)
    total = 1.0 + 0.0j
    err = 0.0
    for k, (xk, yk) in enumerate(zip(x.positions, y.positions)):
        if xk == yk:
            continue
        term = phi_raw([xk], [yk], params)
        total += a ** k * (term.value - 1.0)
        err += a ** k * term.quadrature_estimate_error
    return PhiValue(complex(total), x.n_g, float(err), 0, _flags(params, x, y))


def phi_infinite_db(x, y, resolution: float | None = None) -> PhiValue:
    """Infinite-d_b limit: 1 when the first excitations coincide, else 0."""
    x = GateConfig.of(x)
    y = GateConfig.of(y)
    if x.n_g != y.n_g:
        raise DimensionMismatch(f"n_g differs: {x.n_g} vs {y.n_g}")
    if resolution is None:
        resolution = 1.0 / ModelParams().grid_points
    same = math.isclose(x.positions[0], y.positions[0], rel_tol=0.0,
                        abs_tol=0.5 * resolution)
    return PhiValue(1.0 + 0.0j if same else 0.0j, x.n_g)

"""Density matrices of stored gate excitations after source-photon scattering."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .core import ModelParams, scattering_probability
from .errors import GridMismatch, IndexOutOfRange, InvalidParameter, RydsubError
from .kernel import phi_raw

HERMITIAN_TOL = 1e-10


class InvariantViolation(RydsubError, ArithmeticError):
    pass


@dataclass(frozen=True)
class SpinWaveMode:
    """Single-excitation spatial mode.

    ``kind`` is ``"gaussian"`` (``width`` is the standard deviation),
    ``"flat"`` (``width`` is the full extent) or ``"table"`` (``table`` holds
    ``(z, amplitude)`` pairs, linearly interpolated).
    """

    kind: str = "gaussian"
    center: float = 10.0
    width: float = 3.0
    table: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "flat", "table"):
            raise InvalidParameter(f"unknown mode kind {self.kind!r}")
        if self.kind == "table":
            if not self.table or len(self.table) < 2:
                raise InvalidParameter("a table mode needs at least two samples")
        elif not self.width > 0:
            raise InvalidParameter("mode width must be > 0")

    def support(self, length: float) -> tuple:
        if self.kind == "gaussian":
            lo, hi = self.center - 4 * self.width, self.center + 4 * self.width
        elif self.kind == "flat":
            lo, hi = self.center - self.width / 2, self.center + self.width / 2
        else:
            zs = [z for z, _ in self.table]
            lo, hi = min(zs), max(zs)
        lo, hi = max(lo, 0.0), min(hi, length)
        if hi <= lo:
            raise InvalidParameter("mode support does not overlap the medium")
        return lo, hi

    def grid(self, length: float, points_per_zb: int = 8) -> np.ndarray:
        if points_per_zb < 8:
            raise InvalidParameter("need at least 8 grid points per blockade radius")
        lo, hi = self.support(length)
        n = int(math.ceil((hi - lo) * points_per_zb)) + 1
        return np.linspace(lo, hi, n)

    def profile(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-0.25 * ((z - self.center) / self.width) ** 2)
        if self.kind == "flat":
            return (np.abs(z - self.center) <= self.width / 2 + 1e-12).astype(float)
        zs, amps = zip(*sorted(self.table))
        return np.interp(z, zs, amps, left=0.0, right=0.0)

    def norm(self, axis) -> float:
        dz = axis[1] - axis[0]
        return math.sqrt(float(np.sum(np.abs(self.profile(axis)) ** 2) * dz))

    def amplitude(self, axis) -> np.ndarray:
        """Mode sampled on ``axis`` and normalised so that sum |C|^2 dz = 1."""
        return self.profile(axis) / self.norm(axis)


@dataclass
class DensityMatrixGrid:
    axis: np.ndarray
    values: np.ndarray
    n_s: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def spacing(self) -> float:
        return float(self.axis[1] - self.axis[0])

    def trace(self) -> float:
        return float(np.real(np.trace(self.values)) * self.spacing)

    def purity(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.spacing ** 2)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.values - self.values.conj().T)))

    def check(self) -> None:
        scale = max(float(np.max(np.abs(self.values))), 1.0)
        if self.hermiticity_error() > HERMITIAN_TOL * scale:
            raise InvariantViolation("density matrix is not Hermitian")
        if np.min(np.real(np.diag(self.values))) < -1e-12:
            raise InvariantViolation("negative population on the diagonal")

    def to_csv(self, path, meta: dict | None = None) -> Path:
        header = ["x"]
        for y in self.axis:
            header += [f"re(y={y!r})", f"im(y={y!r})"]
        rows = np.empty((self.axis.size, 1 + 2 * self.axis.size))
        rows[:, 0] = self.axis
        rows[:, 1::2] = self.values.real
        rows[:, 2::2] = self.values.imag
        return io.write_csv(path, header, rows, {"n_s": self.n_s, **self.meta, **(meta or {})})

    @classmethod
    def from_csv(cls, path) -> DensityMatrixGrid:
        meta, _, data = io.read_csv(path)
        values = data[:, 1::2] + 1j * data[:, 2::2]
        n_s = int(meta.pop("n_s", "0"))
        meta.pop("rydsub_version", None)
        return cls(data[:, 0].copy(), values, n_s, meta)

    def to_json(self, path, meta: dict | None = None) -> Path:
        return io.write_json(path, {
            "n_s": self.n_s,
            "meta": {**self.meta, **(meta or {})},
            "axis": self.axis,
            "re": self.values.real,
            "im": self.values.imag,
        })

    @classmethod
    def from_json(cls, path) -> DensityMatrixGrid:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        values = np.asarray(raw["re"]) + 1j * np.asarray(raw["im"])
        return cls(np.asarray(raw["axis"], dtype=float), values, raw["n_s"], raw["meta"])


def _kernel_power(table: np.ndarray, n_s: int) -> np.ndarray:
    if n_s == 0:
        return np.ones_like(table)
    out = np.zeros_like(table)
    nz = table != 0
    # exp(n log Phi) with the principal branch; no repeated multiplication
    out[nz] = np.exp(n_s * np.log(table[nz]))
    return out


def evolve_density(rho0: DensityMatrixGrid, n_s: int, phi_table) -> DensityMatrixGrid:
    """rho_{n_s} = Phi^{n_s} * rho_0, elementwise."""
    if n_s < 0 or int(n_s) != n_s:
        raise InvalidParameter("n_s must be a non-negative integer")
    table = np.asarray(phi_table)
    if table.shape != rho0.values.shape:
        raise GridMismatch(f"kernel table {table.shape} vs density {rho0.values.shape}")
    out = DensityMatrixGrid(rho0.axis, rho0.values * _kernel_power(table, int(n_s)),
                            int(n_s), dict(rho0.meta))
    out.check()
    return out


def _row_values(i, axis, spectators, params):
    xs = np.empty(len(spectators) + 1)
    ys = np.empty_like(xs)
    xs[1:] = spectators
    ys[1:] = spectators
    xs[0] = axis[i]
    row = np.empty(axis.size - i, dtype=complex)
    for j in range(i, axis.size):
        ys[0] = axis[j]
        row[j - i] = phi_raw(xs, ys, params).value
    return row


def kernel_table(axis, params: ModelParams, spectators=(), threads: int = 1) -> np.ndarray:
    """Phi((x_i, *spectators), (x_j, *spectators)) on ``axis``, Hermitian-filled.

    Spectators are excitations whose position is the same in both
    configurations; they may lie outside the medium.
    """
    axis = np.asarray(axis, dtype=float)
    spectators = np.asarray(spectators, dtype=float)
    n = axis.size
    table = np.empty((n, n), dtype=complex)
    rows = range(n)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: _row_values(i, axis, spectators, params), rows))
    else:
        results = [_row_values(i, axis, spectators, params) for i in rows]
    for i, row in enumerate(results):
        table[i, i:] = row
        table[i:, i] = row.conj()
    return table


def two_excitation_slice(r: float, n_s: int, mode: SpinWaveMode, params: ModelParams,
                         points_per_zb: int = 8, threads: int = 1,
                         table: np.ndarray | None = None) -> DensityMatrixGrid:
    """rho_{n_s}(x, r, y, r) for two excitations stored in the same mode.

    ``r`` is held fixed in both configurations. A precomputed kernel table
    (from ``kernel_table`` with ``spectators=[r]``) can be passed to evolve
    several ``n_s`` values without recomputing it.
    """
    if not math.isfinite(r):
        raise InvalidParameter("r must be finite")
    axis = mode.grid(params.length, points_per_zb)
    psi = mode.amplitude(axis)
    psi_r = float(mode.profile(r)) / mode.norm(axis)
    rho0 = DensityMatrixGrid(axis, abs(psi_r) ** 2 * np.outer(psi, psi.conj()), 0, {
        "r": r, "mode": mode.kind, "mode_center": mode.center,
        "mode_width": mode.width, "points_per_zb": points_per_zb,
    })
    if table is None:
        table = kernel_table(axis, params, [r], threads)
    return evolve_density(rho0, n_s, table)


def reduced_density(k: int, n_g: int, n_s: int, p: float, mode_k: SpinWaveMode,
                    params: ModelParams, phi_model: str = "kernel",
                    points_per_zb: int = 8, threads: int = 1) -> DensityMatrixGrid:
    """Reduced matrix of the k-th excitation, [1 + A^{k-1} phi(x, y)]^{n_s} rho_0.

    ``A = 1 - p``. With ``phi_model="kernel"`` phi is the single-excitation
    kernel minus one at ``params.d_b``; with ``"piecewise"`` it is 0 on the
    diagonal and A - 1 elsewhere (complete localisation).
    """
    if not 1 <= k <= n_g:
        raise IndexOutOfRange(f"k={k} outside 1..{n_g}")
    if not 0 <= p <= 1:
        raise InvalidParameter("p must lie in [0, 1]")
    axis = mode_k.grid(params.length, points_per_zb)
    psi = mode_k.amplitude(axis)
    rho0 = DensityMatrixGrid(axis, np.outer(psi, psi.conj()), 0, {
        "k": k, "n_g": n_g, "p": p, "phi_model": phi_model,
    })
    a = 1.0 - p
    if phi_model == "kernel":
        small = kernel_table(axis, params, (), threads) - 1.0
    elif phi_model == "piecewise":
        small = np.full((axis.size, axis.size), a - 1.0, dtype=complex)
        np.fill_diagonal(small, 0.0)
    else:
        raise InvalidParameter(f"unknown phi_model {phi_model!r}")
    weight = a ** (k - 1)
    return evolve_density(rho0, n_s, 1.0 + weight * small)


def default_slice_p(params: ModelParams) -> float:
    return float(scattering_probability(params.d_b))

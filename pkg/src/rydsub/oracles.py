"""Brute-force cross-checks for the analytic models.

``ode_transmission`` integrates the steady-state propagation equation with
fixed-step RK4. The ``mc_*`` functions simulate photons one by one: a
source photon scatters off the k-th stored excitation with probability
p (1-p)^{k-1} and passes all of them otherwise. Excitations that have been
scattered off stay in place and keep blocking later photons.

Random numbers come from Philox streams keyed by (seed, block index), with
a fixed number of trials per block, so results do not depend on how many
threads run the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .core import GateConfig, ModelParams, total_potential
from .errors import InvalidParameter, StepTooCoarse

BLOCK = 8192
MIN_TRIALS = 1000
MAX_STEP = 1.0 / 32.0
STEP_TOL = 1e-6


@dataclass(frozen=True)
class McResult:
    trials: int
    estimate: float
    std_error: float
    seed: int

    def within(self, value: float, sigmas: float = 3.0) -> bool:
        """True if ``value`` lies within ``sigmas`` standard errors.

        A zero standard error (every trial agreed) requires the value to
        match to 1e-12.
        """
        return abs(self.estimate - value) <= max(sigmas * self.std_error, 1e-12)


def _bernoulli(hits: np.ndarray, seed: int) -> McResult:
    n = hits.size
    est = float(np.count_nonzero(hits)) / n
    return McResult(n, est, math.sqrt(est * (1.0 - est) / n), seed)


def _sample_mean(values: np.ndarray, seed: int) -> McResult:
    n = values.size
    sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
    return McResult(n, float(np.mean(values)), sd / math.sqrt(n), seed)


# -- ODE oracle --------------------------------------------------------------

def rk4_transmission(config, params: ModelParams, step: float) -> complex:
    """E(L)/E(0) for dE/dz = d_b [1/(1 + i S) - 1] E by fixed-step RK4."""
    xs = GateConfig.of(config).as_array() if config is not None else np.empty(0)
    return kernels.rk4_field(xs, params.d_b, params.length, step, params.v_cap)


def ode_transmission(config, params: ModelParams, step: float = 1.0 / 64.0) -> complex:
    """RK4 field ratio E(L)/E(0), checked against a run at half the step.

    Raises ``StepTooCoarse`` if ``step`` exceeds 1/32 or the two runs differ
    by more than 1e-6; the half-step value is returned.
    """
    if not 0 < step <= MAX_STEP:
        raise StepTooCoarse(f"step {step} must lie in (0, {MAX_STEP}]")
    coarse = rk4_transmission(config, params, step)
    fine = rk4_transmission(config, params, step / 2.0)
    if abs(coarse - fine) > STEP_TOL:
        raise StepTooCoarse(f"step-doubling difference {abs(coarse - fine):.3e} > {STEP_TOL}")
    return fine


def ode_amplitude(config, params: ModelParams, step: float = 1.0 / 64.0) -> complex:
    """ODE field ratio times the local factor 1/(1 + i S(L)), comparable to
    ``transmission_amplitude(L, ...)``."""
    s = float(total_potential(params.length, config, params)) if config is not None else 0.0
    return ode_transmission(config, params, step) / (1.0 + 1j * s)


def convergence_order(config, params: ModelParams, step: float = 1.0 / 32.0) -> float:
    """Observed order from runs at step, step/2 and step/4."""
    e1 = rk4_transmission(config, params, step)
    e2 = rk4_transmission(config, params, step / 2.0)
    e3 = rk4_transmission(config, params, step / 4.0)
    return math.log2(abs(e1 - e2) / abs(e2 - e3))


# -- Monte Carlo -------------------------------------------------------------

def _check_mc(trials, p=None):
    if trials < MIN_TRIALS:
        raise InvalidParameter(f"need at least {MIN_TRIALS} trials")
    if p is not None and not 0 <= p <= 1:
        raise InvalidParameter("p must lie in [0, 1]")


def _rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _run_blocks(fn, trials: int, seed: int, threads: int):
    sizes = [BLOCK] * (trials // BLOCK)
    if trials % BLOCK:
        sizes.append(trials % BLOCK)
    jobs = list(enumerate(sizes))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: fn(_rng(seed, j[0]), j[1]), jobs))
    else:
        parts = [fn(_rng(seed, b), n) for b, n in jobs]
    return np.concatenate(parts)


def _ladder_cdf(m: int, p: float) -> np.ndarray:
    """CDF over outcomes 0..m-1 (scatter off that excitation) and m (pass)."""
    k = np.arange(m)
    cdf = np.cumsum(np.append(p * (1.0 - p) ** k, (1.0 - p) ** m))
    cdf[-1] = 1.0
    return cdf


def _scatter(rng, stored: np.ndarray, n_s: np.ndarray, n_max: int, p: float) -> np.ndarray:
    """Excitation index hit by each source photon; ``n_max`` marks a pass."""
    width = int(n_s.max()) if n_s.size else 0
    u = rng.random((stored.size, width))
    out = np.full(u.shape, n_max, dtype=np.int64)
    for m in np.unique(stored):
        rows = stored == m
        idx = np.searchsorted(_ladder_cdf(int(m), p), u[rows], side="right")
        idx[idx == m] = n_max
        out[rows] = idx
    return out


def mc_decoherence(n_g: int, n_s: int, p: float, trials: int = 100_000, seed: int = 0,
                   threads: int = 1) -> dict:
    """Distribution of the number of distinct decohered excitations.

    Returns McResults keyed ``"0"``, ``"1"`` and ``">=2"``.
    """
    _check_mc(trials, p)

    def block(rng, n):
        stored = np.full(n, n_g, dtype=np.int64)
        counts = np.full(n, n_s, dtype=np.int64)
        hits = _scatter(rng, stored, counts, n_g, p)
        return kernels.tally_decohered(hits, counts, n_g)

    d = _run_blocks(block, trials, seed, threads)
    return {"0": _bernoulli(d == 0, seed), "1": _bernoulli(d == 1, seed),
            ">=2": _bernoulli(d >= 2, seed)}


def mc_retrieval(n_g: int, n_s: int, p: float, eta_R: float = 1.0, trials: int = 100_000,
                 seed: int = 0, threads: int = 1) -> tuple:
    """Retrieved photons for Fock inputs.

    Returns ``(total, per_k)``: the mean retrieved count and, for each
    excitation k, the fraction of trials in which it was retrieved.
    """
    _check_mc(trials, p)

    def block(rng, n):
        stored = np.full(n, n_g, dtype=np.int64)
        hits = _scatter(rng, stored, np.full(n, n_s, dtype=np.int64), n_g, p)
        hit = np.zeros((n, n_g + 1), dtype=bool)
        hit[np.arange(n)[:, None], hits] = True
        ok = rng.random((n, n_g)) < eta_R
        return ~hit[:, :n_g] & ok

    got = _run_blocks(block, trials, seed, threads)
    per_k = [_bernoulli(got[:, k], seed) for k in range(n_g)]
    return _sample_mean(got.sum(axis=1).astype(float), seed), per_k


def mc_scattered(alpha_s: float, p: float, n_g: int | None = None, alpha_g: float | None = None,
                 trials: int = 100_000, seed: int = 0, threads: int = 1) -> McResult:
    """Mean number of scattered source photons for a coherent source.

    The gate is either the Fock state ``n_g`` or a coherent state of mean
    ``alpha_g``; exactly one of them must be given.
    """
    _check_mc(trials, p)
    if (n_g is None) == (alpha_g is None):
        raise InvalidParameter("give exactly one of n_g and alpha_g")

    def block(rng, n):
        gate = np.full(n, n_g) if n_g is not None else rng.poisson(alpha_g, n)
        n_s = rng.poisson(alpha_s, n)
        # each photon independently passes all excitations with (1-p)^gate
        return rng.binomial(n_s, 1.0 - (1.0 - p) ** gate)

    return _sample_mean(_run_blocks(block, trials, seed, threads).astype(float), seed)


def mc_pipeline(n_g: int, alpha_s: float, eta_S: float, eta_R: float, p: float,
                trials: int = 100_000, seed: int = 0, threads: int = 1) -> McResult:
    """Storage, source scattering and retrieval; success if exactly one photon is lost."""
    _check_mc(trials, p)
    if n_g == 0:
        return McResult(trials, 1.0, 0.0, seed)

    def block(rng, n):
        stored = rng.binomial(n_g, eta_S, n)
        n_s = rng.poisson(alpha_s, n)
        hits = _scatter(rng, stored, n_s, n_g, p)
        decohered = kernels.tally_decohered(hits, n_s, n_g)
        coherent = stored - decohered
        retrieved = rng.binomial(coherent, eta_R)
        return (n_g - retrieved) == 1

    return _bernoulli(_run_blocks(block, trials, seed, threads), seed)


def mc_absorber(n_g: int, p: float, p_res: float, trials: int = 100_000, seed: int = 0,
                threads: int = 1) -> McResult:
    """Sequential saturable absorber; success if exactly one photon is removed."""
    _check_mc(trials, p)

    def block(rng, n):
        u = rng.random((n, n_g))
        absorbed = np.zeros(n, dtype=bool)
        lost = np.zeros(n, dtype=np.int64)
        for j in range(n_g):
            take = ~absorbed & (u[:, j] < p)
            leak = absorbed & (u[:, j] < p_res)
            lost += take | leak
            absorbed |= take
        return lost == 1

    return _bernoulli(_run_blocks(block, trials, seed, threads), seed)

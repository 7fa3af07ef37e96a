import numpy as np
import pytest

from rydsub.core import ModelParams
from rydsub.density import (DensityMatrixGrid, InvariantViolation, SpinWaveMode, evolve_density,
                            kernel_table, reduced_density, two_excitation_slice)
from rydsub.errors import GridMismatch, IndexOutOfRange, InvalidParameter

NARROW = SpinWaveMode("gaussian", 10.0, 1.0)


@pytest.fixture(scope="module")
def slice_table():
    params = ModelParams(d_b=2.0)
    axis = NARROW.grid(params.length)
    return params, axis, kernel_table(axis, params, [10.0])


def test_mode_normalised():
    axis = NARROW.grid(20.0)
    amp = NARROW.amplitude(axis)
    assert np.sum(amp ** 2) * (axis[1] - axis[0]) == pytest.approx(1.0)


def test_mode_grid_resolution():
    with pytest.raises(InvalidParameter):
        NARROW.grid(20.0, points_per_zb=4)
    axis = NARROW.grid(20.0, points_per_zb=8)
    assert axis[1] - axis[0] <= 1 / 8 + 1e-12


def test_mode_kinds():
    flat = SpinWaveMode("flat", 10.0, 4.0)
    assert flat.support(20.0) == (8.0, 12.0)
    table = SpinWaveMode("table", table=((2.0, 0.0), (4.0, 1.0), (6.0, 0.0)))
    assert table.profile(4.0) == pytest.approx(1.0)
    with pytest.raises(InvalidParameter):
        SpinWaveMode("cosine")
    with pytest.raises(InvalidParameter):
        SpinWaveMode("gaussian", 50.0, 1.0).support(20.0)


def test_zero_photons_gives_separable_reference(slice_table):
    params, axis, table = slice_table
    rho = two_excitation_slice(10.0, 0, NARROW, params, table=table)
    psi = NARROW.amplitude(axis)
    scale = (NARROW.profile(10.0) / NARROW.norm(axis)) ** 2
    np.testing.assert_allclose(rho.values, scale * np.outer(psi, psi), atol=1e-14)


def test_slice_invariants(slice_table):
    params, axis, table = slice_table
    rho0 = two_excitation_slice(10.0, 0, NARROW, params, table=table)
    for n_s in (1, 3, 5):
        rho = two_excitation_slice(10.0, n_s, NARROW, params, table=table)
        rho.check()
        np.testing.assert_allclose(np.diag(rho.values), np.diag(rho0.values), atol=1e-12)
        assert rho.purity() <= rho0.purity() + 1e-12
        assert np.all(np.abs(rho.values) <= np.abs(rho0.values) + 1e-12)


def test_downstream_coherence_survives(slice_table):
    params, axis, table = slice_table
    rho = two_excitation_slice(10.0, 5, NARROW, params, table=table)
    x, y = np.meshgrid(axis, axis, indexing="ij")
    off = x != y
    down = np.abs(rho.values[(x > 10.5) & (y > 10.5) & off]).mean()
    up = np.abs(rho.values[(x < 9.5) & (y < 9.5) & off]).mean()
    assert down > up


def test_r_outside_medium_reduces_to_single_excitation():
    params = ModelParams(d_b=2.0)
    rho = two_excitation_slice(40.0, 3, NARROW, params)
    # a spectator beyond the medium is never reached: the kernel is single-excitation
    axis = rho.axis
    single = kernel_table(axis, params)
    rho_single = evolve_density(DensityMatrixGrid(axis, np.outer(NARROW.amplitude(axis),
                                                                   NARROW.amplitude(axis))),
                                3, single)
    scale = rho.values[0, 0] / rho_single.values[0, 0]
    np.testing.assert_allclose(rho.values, scale * rho_single.values, atol=1e-12)


def test_evolve_rejects_mismatch():
    rho = DensityMatrixGrid(np.linspace(0, 1, 4), np.eye(4, dtype=complex))
    with pytest.raises(GridMismatch):
        evolve_density(rho, 1, np.ones((3, 3)))
    with pytest.raises(InvalidParameter):
        evolve_density(rho, -1, np.ones((4, 4)))


def test_check_detects_non_hermitian():
    vals = np.eye(3, dtype=complex)
    vals[0, 1] = 0.5
    with pytest.raises(InvariantViolation):
        DensityMatrixGrid(np.linspace(0, 1, 3), vals).check()


def test_csv_and_json_round_trip(tmp_path, slice_table):
    params, axis, table = slice_table
    rho = two_excitation_slice(10.0, 2, NARROW, params, table=table)
    back = DensityMatrixGrid.from_csv(rho.to_csv(tmp_path / "r.csv"))
    np.testing.assert_array_equal(back.values, rho.values)
    np.testing.assert_array_equal(back.axis, rho.axis)
    assert back.n_s == 2
    back = DensityMatrixGrid.from_json(rho.to_json(tmp_path / "r.json"))
    np.testing.assert_array_equal(back.values, rho.values)


def test_kernel_table_threads_identical():
    params = ModelParams(d_b=1.0)
    axis = np.linspace(8, 12, 17)
    np.testing.assert_array_equal(kernel_table(axis, params, [9.0], threads=1),
                                  kernel_table(axis, params, [9.0], threads=4))


def test_reduced_density_models():
    params = ModelParams(d_b=3.0)
    mode = SpinWaveMode("gaussian", 10.0, 0.8)
    first = reduced_density(1, 2, 4, 0.9, mode, params, "piecewise")
    second = reduced_density(2, 2, 4, 0.9, mode, params, "piecewise")
    # the second excitation keeps more coherence than the first
    assert second.purity() > first.purity()
    kern = reduced_density(1, 1, 2, 0.9, mode, params, "kernel")
    kern.check()
    with pytest.raises(IndexOutOfRange):
        reduced_density(3, 2, 1, 0.5, mode, params)
    with pytest.raises(InvalidParameter):
        reduced_density(1, 2, 1, 0.5, mode, params, "other")

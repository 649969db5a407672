"""Spinor field observables: mass, densities, currents, error norms."""

import numpy as np
import pytest

from diracsplit.algebra import dirac_matrix, pauli
from diracsplit.fields import (
    SpinorField,
    component_densities,
    current_density,
    error_norms,
    mass,
    probability_density,
)
from diracsplit.grids import PeriodicGrid


def constant_field(grid, values):
    return SpinorField.from_components(
        grid, [np.full(grid.shape, v, dtype=np.complex128) for v in values])


def test_mass_of_unit_component():
    for m in (16, 64, 1024):
        grid = PeriodicGrid.line(-32.0, 32.0, m)
        f = constant_field(grid, (1.0, 0.0))
        assert mass(f) == pytest.approx(64.0, rel=1e-14)


def test_density_of_gaussian_pair():
    grid = PeriodicGrid.line(-32.0, 32.0, 1024)
    x = grid.axis_points(0)
    f = SpinorField.from_components(
        grid, [np.exp(-x**2 / 2.0), np.exp(-((x - 1.0) ** 2) / 2.0)])
    rho = probability_density(f)
    j0 = np.argmin(np.abs(x))
    assert x[j0] == 0.0
    assert rho[j0] == pytest.approx(1.0 + np.exp(-1.0), rel=1e-14)
    percomp = component_densities(f)
    assert np.allclose(percomp.sum(axis=-1), rho)


def test_current_unit_examples():
    grid = PeriodicGrid.line(0.0, 1.0, 8)
    inv = 1.0 / np.sqrt(2.0)
    j = current_density(constant_field(grid, (inv, inv)))
    assert np.allclose(j[..., 0], 1.0)
    assert np.allclose(j[..., 1], 0.0)
    j = current_density(constant_field(grid, (inv, 1j * inv)))
    assert np.allclose(j[..., 0], 0.0)
    assert np.allclose(j[..., 1], 1.0)


def _matrix_current(field, mats):
    out = []
    for m in mats:
        form = np.einsum("...i,ij,...j->...", field.data.conj(), m, field.data)
        assert np.max(np.abs(form.imag)) <= 1e-13  # Hermitian form
        out.append(form.real)
    return np.stack(out, axis=-1)


def test_current_matches_hermitian_form_two_comp():
    rng = np.random.default_rng(11)
    grid = PeriodicGrid.box([(-1.0, 1.0, 8), (0.0, 2.0, 6)])
    data = rng.standard_normal(grid.shape + (2,)) + 1j * rng.standard_normal(grid.shape + (2,))
    f = SpinorField(grid, data)
    ref = _matrix_current(f, [pauli(1), pauli(2)])
    assert np.max(np.abs(current_density(f) - ref)) <= 1e-13


def test_current_matches_hermitian_form_four_comp():
    rng = np.random.default_rng(12)
    for axes, nj in (([(-1.0, 1.0, 8)], 2),
                     ([(-1.0, 1.0, 6), (0.0, 1.0, 4)], 2),
                     ([(-1.0, 1.0, 4), (0.0, 1.0, 4), (0.0, 1.0, 4)], 3)):
        grid = PeriodicGrid.box(axes)
        data = rng.standard_normal(grid.shape + (4,)) + 1j * rng.standard_normal(grid.shape + (4,))
        f = SpinorField(grid, data)
        mats = [dirac_matrix(f"alpha{j}") for j in range(1, nj + 1)]
        ref = _matrix_current(f, mats)
        got = current_density(f)
        assert got.shape[-1] == nj
        assert np.max(np.abs(got - ref)) <= 1e-13


def test_error_norms_zero_for_identical():
    grid = PeriodicGrid.line(-4.0, 4.0, 32)
    rng = np.random.default_rng(3)
    data = rng.standard_normal(grid.shape + (2,)) + 1j * rng.standard_normal(grid.shape + (2,))
    f = SpinorField(grid, data)
    e = error_norms(f, f.copy())
    assert e.e_phi == 0.0 and e.e_rho == 0.0 and e.e_j == 0.0


def test_error_norms_hand_value():
    grid = PeriodicGrid.line(0.0, 2.0, 8)  # h = 1/4
    a = constant_field(grid, (1.0, 0.0))
    b = constant_field(grid, (0.0, 0.0))
    e = error_norms(a, b)
    # e_phi = sqrt(h * M * 1) = sqrt(2); rho difference 1 everywhere
    assert e.e_phi == pytest.approx(np.sqrt(2.0), rel=1e-14)
    assert e.e_rho == pytest.approx(np.sqrt(2.0), rel=1e-14)
    assert e.e_j == 0.0


def test_error_norms_mismatch_rejected():
    a = constant_field(PeriodicGrid.line(0.0, 1.0, 8), (1.0, 0.0))
    b = constant_field(PeriodicGrid.line(0.0, 1.0, 16), (1.0, 0.0))
    with pytest.raises(ValueError):
        error_norms(a, b)


def test_two_component_3d_rejected():
    grid = PeriodicGrid.box([(0.0, 1.0, 4)] * 3)
    with pytest.raises(ValueError):
        SpinorField.zeros(grid, ncomp=2)

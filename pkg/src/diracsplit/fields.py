"""Spinor lattice fields and their observables.

Fields carry two or four complex components per grid point, stored as a
(*grid.shape, ncomp) array with the component index last.  Observables
follow the quadratic-form conventions of the solver: total mass is the
cell-volume-weighted l2 norm squared, the current components are the
Hermitian forms against sigma_l (alpha_l for four components).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grids import PeriodicGrid


@dataclass
class SpinorField:
    grid: PeriodicGrid
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.shape[:-1] != self.grid.shape or data.shape[-1] not in (2, 4):
            raise ValueError(
                f"data shape {data.shape} does not match grid {self.grid.shape} "
                "with 2 or 4 components"
            )
        if data.shape[-1] == 2 and self.grid.ndim == 3:
            raise ValueError("two-component fields exist in one or two dimensions")
        object.__setattr__(self, "data", data)

    @property
    def ncomp(self):
        return self.data.shape[-1]

    def copy(self):
        return SpinorField(self.grid, self.data.copy())

    @classmethod
    def zeros(cls, grid, ncomp=2):
        return cls(grid, np.zeros(grid.shape + (ncomp,), dtype=np.complex128))

    @classmethod
    def from_components(cls, grid, components):
        return cls(grid, np.stack([np.broadcast_to(c, grid.shape)
                                   for c in components], axis=-1))


def mass(field):
    """Cell volume times the summed squared modulus over points and components."""
    return field.grid.cell_volume * float(np.sum(np.abs(field.data) ** 2))


def component_densities(field):
    """Per-component densities |phi_c|^2, shape (*grid.shape, ncomp)."""
    return np.abs(field.data) ** 2


def probability_density(field):
    """Total density summed over components."""
    return component_densities(field).sum(axis=-1)


def current_density(field):
    """Current components J_l as a (*grid.shape, K) real array.

    J_l = Phi^* sigma_l Phi for two components (alpha_l for four);
    l runs over {1, 2} on 1d/2d grids and {1, 2, 3} on 3d grids.
    """
    d = field.grid.ndim
    ncurr = 2 if d <= 2 else 3
    out = np.empty(field.grid.shape + (ncurr,), dtype=np.float64)
    f = field.data
    if field.ncomp == 2:
        cross = np.conj(f[..., 0]) * f[..., 1]
        out[..., 0] = 2.0 * cross.real
        out[..., 1] = 2.0 * cross.imag
        if ncurr == 3:
            out[..., 2] = np.abs(f[..., 0]) ** 2 - np.abs(f[..., 1]) ** 2
    else:
        c14 = np.conj(f[..., 0]) * f[..., 3]
        c23 = np.conj(f[..., 1]) * f[..., 2]
        out[..., 0] = 2.0 * (c14 + c23).real
        out[..., 1] = 2.0 * (c14 - c23).imag
        if ncurr == 3:
            c13 = np.conj(f[..., 0]) * f[..., 2]
            c24 = np.conj(f[..., 1]) * f[..., 3]
            out[..., 2] = 2.0 * (c13 - c24).real
    return out


class ErrorNorms(NamedTuple):
    e_phi: float
    e_rho: float
    e_j: float


def error_norms(num, ref):
    """Discrete l2 distances between two fields on the same grid.

    e_phi compares the spinors componentwise, e_rho the total densities,
    e_j all current components; each is sqrt(cell_volume * sum of squares).
    """
    if num.grid != ref.grid or num.ncomp != ref.ncomp:
        raise ValueError("fields must share grid and component count")
    vol = num.grid.cell_volume
    e_phi = np.sqrt(vol * np.sum(np.abs(num.data - ref.data) ** 2))
    e_rho = np.sqrt(vol * np.sum((probability_density(num) - probability_density(ref)) ** 2))
    e_j = np.sqrt(vol * np.sum((current_density(num) - current_density(ref)) ** 2))
    return ErrorNorms(float(e_phi), float(e_rho), float(e_j))

"""Spin matrix constants and closed-form matrix exponentials.

The propagator factors of the solver are exponentials of matrices of the
form -i*v0*I - i*(b . sigma) (two components) or
-i*v0*I + i*(a . alpha) - i*b*beta (four components).  Both square to a
multiple of the identity plus a scalar shift, so the exponential reduces
to a cosine/sine pair.  ``exp_dense`` is a generic scaling-and-squaring
exponential kept as an independent cross-check for the closed forms.
"""

from __future__ import annotations

import numpy as np

_I2 = np.eye(2, dtype=np.complex128)
_I4 = np.eye(4, dtype=np.complex128)

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


def pauli(j):
    """Pauli matrix sigma_j for j in {1, 2, 3} (fresh copy)."""
    if j not in (1, 2, 3):
        raise ValueError(f"pauli index must be 1, 2 or 3, got {j}")
    return _SIGMA[j - 1].copy()


def _block(upper_right, lower_left):
    out = np.zeros((4, 4), dtype=np.complex128)
    out[:2, 2:] = upper_right
    out[2:, :2] = lower_left
    return out


def dirac_matrix(name):
    """4x4 matrix by name: 'alpha1', 'alpha2', 'alpha3', 'beta' or 'gamma'.

    alpha_j has sigma_j on the off-diagonal blocks, beta = diag(I, -I),
    gamma has identity blocks off the diagonal.
    """
    if name == "beta":
        out = np.zeros((4, 4), dtype=np.complex128)
        out[:2, :2] = _I2
        out[2:, 2:] = -_I2
        return out
    if name == "gamma":
        return _block(_I2, _I2)
    if name in ("alpha1", "alpha2", "alpha3"):
        s = _SIGMA[int(name[-1]) - 1]
        return _block(s, s)
    raise ValueError(f"unknown matrix name {name!r}")


def exp_dense(mat, s=1.0):
    """exp(s*mat) for a 2x2 or 4x4 complex matrix.

    Scaling and squaring with a 13-term Taylor series on the scaled
    matrix.  Accurate to ~1e-13 relative for ||s*mat|| up to 10.
    """
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.shape not in ((2, 2), (4, 4)):
        raise ValueError(f"expected a 2x2 or 4x4 matrix, got shape {mat.shape}")
    x = s * mat
    norm = np.linalg.norm(x, np.inf)
    n_squarings = 0
    if norm > 0.25:
        n_squarings = int(np.ceil(np.log2(norm / 0.25)))
        x = x / (2.0**n_squarings)
    eye = np.eye(mat.shape[0], dtype=np.complex128)
    result = eye.copy()
    term = eye.copy()
    for k in range(1, 14):
        term = term @ x / k
        result += term
    for _ in range(n_squarings):
        result = result @ result
    return result


def _sinc(x):
    """sin(x)/x, series branch near zero so the limit is exact."""
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)
    if out.ndim == 0:
        return float(out)
    return out


def exp_pauli_affine(v0, b, s):
    """exp(s * (-i*v0*I - i*(b . sigma))) as a 2x2 matrix.

    v0 is real, b a real 3-vector.  With r = |b| the result is
    exp(-i*s*v0) * (cos(s*r) I - i*sin(s*r)/r * (b . sigma)).
    """
    b1, b2, b3 = (float(v) for v in b)
    r = np.sqrt(b1 * b1 + b2 * b2 + b3 * b3)
    phase = np.exp(-1j * s * float(v0))
    c = np.cos(s * r)
    f = -1j * s * _sinc(s * r)
    return phase * np.array(
        [[c + f * b3, f * (b1 - 1j * b2)], [f * (b1 + 1j * b2), c - f * b3]],
        dtype=np.complex128,
    )


def exp_dirac_affine(v0, a, bcoef, s):
    """exp(s * (-i*v0*I + i*(a . alpha) - i*bcoef*beta)) as a 4x4 matrix.

    a . alpha and bcoef*beta anticommute, so the traceless part squares
    to (|a|^2 + bcoef^2) I and the same cosine/sine reduction applies.
    """
    a1, a2, a3 = (float(v) for v in a)
    bcoef = float(bcoef)
    r = np.sqrt(a1 * a1 + a2 * a2 + a3 * a3 + bcoef * bcoef)
    phase = np.exp(-1j * s * float(v0))
    c = np.cos(s * r)
    f = s * _sinc(s * r)
    sig = a1 * _SIGMA[0] + a2 * _SIGMA[1] + a3 * _SIGMA[2]
    out = np.zeros((4, 4), dtype=np.complex128)
    out[:2, :2] = (c - 1j * f * bcoef) * _I2
    out[2:, 2:] = (c + 1j * f * bcoef) * _I2
    out[:2, 2:] = 1j * f * sig
    out[2:, :2] = 1j * f * sig
    return phase * out

"""Electromagnetic potential models V(t, x), A(t, x).

A model evaluates the scalar potential, the magnetic potential
components and their spatial gradients on broadcastable coordinate
arrays (sparse meshes are fine; results broadcast against the grid
shape, absent components come back as 0-d zeros).  Models are immutable
and hashable, which lets the propagators cache grid evaluations of
time-independent models.  Physical constants ride along on the model:
c (speed of light), m (mass), e (charge); the defaults give the
dimensionless form of the equation.

A model has a native dimension (the coordinates it actually reads) but
evaluates on any grid of equal or higher dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exprlang

_AXIS_NAMES = ("x", "y", "z")
_ZERO = np.float64(0.0)


@dataclass(frozen=True)
class PotentialModel:
    c: float = 1.0
    m: float = 1.0
    e: float = 1.0

    def __post_init__(self):
        if self.c <= 0 or self.m < 0:
            raise ValueError("constants require c > 0 and m >= 0")

    # overridden per model where they differ
    native_dim = 1
    time_dependent = False
    magnetic_zero = True

    def scalar(self, t, xs):
        raise NotImplementedError

    def magnetic(self, t, xs):
        """Magnetic components [A_1 .. A_d] for d = len(xs)."""
        return [_ZERO for _ in xs]

    def scalar_gradient(self, t, xs):
        """[dV/dx_1 .. dV/dx_d]."""
        raise NotImplementedError

    def magnetic_gradient(self, t, xs):
        """dA_k/dx_j as a nested list indexed [k][j]."""
        return [[_ZERO for _ in xs] for _ in xs]

    def check_dimension(self, d):
        if d < self.native_dim:
            raise ValueError(
                f"{type(self).__name__} needs at least {self.native_dim} "
                f"space dimensions, grid has {d}"
            )


@dataclass(frozen=True)
class ZeroPotential(PotentialModel):
    """V = 0, A = 0 in any dimension."""

    def scalar(self, t, xs):
        return _ZERO

    def scalar_gradient(self, t, xs):
        return [_ZERO for _ in xs]


@dataclass(frozen=True)
class TimeDependent1D(PotentialModel):
    """Rational time-dependent pair used by the 1d convergence studies.

    V(t, x) = (1 - t*x) / (1 + t^2 x^2)
    A_1(t, x) = (t*x + 1)^2 / (1 + t^2 x^2)
    """

    time_dependent = True
    magnetic_zero = False

    def scalar(self, t, xs):
        x = xs[0]
        return (1.0 - t * x) / (1.0 + (t * x) ** 2)

    def magnetic(self, t, xs):
        x = xs[0]
        out = [(t * x + 1.0) ** 2 / (1.0 + (t * x) ** 2)]
        out.extend(_ZERO for _ in xs[1:])
        return out

    def scalar_gradient(self, t, xs):
        x = xs[0]
        tx = t * x
        dv = -t * (1.0 + 2.0 * tx - tx * tx) / (1.0 + tx * tx) ** 2
        out = [dv]
        out.extend(_ZERO for _ in xs[1:])
        return out

    def magnetic_gradient(self, t, xs):
        x = xs[0]
        tx = t * x
        da = 2.0 * t * (tx + 1.0) * (1.0 - tx) / (1.0 + tx * tx) ** 2
        grad = [[_ZERO for _ in xs] for _ in xs]
        grad[0][0] = da
        return grad


@dataclass(frozen=True)
class KleinStep(PotentialModel):
    """Static smoothed potential step V(x) = V0/2 (1 + tanh(x/L)), A = 0."""

    V0: float = 0.0
    L: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.L <= 0:
            raise ValueError(f"step width L must be positive, got {self.L}")

    def scalar(self, t, xs):
        return 0.5 * self.V0 * (1.0 + np.tanh(xs[0] / self.L))

    def scalar_gradient(self, t, xs):
        dv = 0.5 * self.V0 / self.L / np.cosh(xs[0] / self.L) ** 2
        out = [dv]
        out.extend(_ZERO for _ in xs[1:])
        return out


def honeycomb_theta(case, t):
    """Lattice orientation angle for the three honeycomb drive cases."""
    if case == 1:
        return np.pi
    if case == 2:
        return np.pi + np.pi * t
    if case == 3:
        return np.pi + np.pi * np.cos(np.pi * t)
    raise ValueError(f"honeycomb case must be 1, 2 or 3, got {case}")


@dataclass(frozen=True)
class Honeycomb2D(PotentialModel):
    """Superposition of three plane cosines at 120-degree spacing.

    V(t, x) = sum_k cos(kappa * e_k(t) . x) with kappa = 4*pi/sqrt(3) and
    unit vectors e_k at angles theta(t) + 2*pi*(k-1)/3.  Case 1 keeps
    theta = pi fixed; case 2 rotates uniformly (period 1/3); case 3
    rocks back and forth (period 2).  A = 0.
    """

    case: int = 1

    native_dim = 2

    def __post_init__(self):
        super().__post_init__()
        if self.case not in (1, 2, 3):
            raise ValueError(f"honeycomb case must be 1, 2 or 3, got {self.case}")

    @property
    def time_dependent(self):
        return self.case != 1

    @property
    def period(self):
        return {1: 0.0, 2: 1.0 / 3.0, 3: 2.0}[self.case]

    def _angles(self, t):
        theta = honeycomb_theta(self.case, t)
        return theta + 2.0 * np.pi / 3.0 * np.arange(3)

    def scalar(self, t, xs):
        kappa = 4.0 * np.pi / np.sqrt(3.0)
        x, y = xs[0], xs[1]
        out = _ZERO
        for ang in self._angles(t):
            out = out + np.cos(kappa * (np.cos(ang) * x + np.sin(ang) * y))
        return out

    def scalar_gradient(self, t, xs):
        kappa = 4.0 * np.pi / np.sqrt(3.0)
        x, y = xs[0], xs[1]
        gx, gy = _ZERO, _ZERO
        for ang in self._angles(t):
            ex, ey = np.cos(ang), np.sin(ang)
            slope = -kappa * np.sin(kappa * (ex * x + ey * y))
            gx = gx + slope * ex
            gy = gy + slope * ey
        out = [gx, gy]
        out.extend(_ZERO for _ in xs[2:])
        return out


def _as_expr(src):
    return exprlang.parse(src) if isinstance(src, str) else src


@dataclass(frozen=True)
class CustomPotential(PotentialModel):
    """Potentials from expression strings in t, x, y, z.

    Gradients come from symbolic differentiation of the parsed trees.
    Omitted magnetic components are identically zero.
    """

    v_expr: exprlang.Expr = field(default=exprlang.Num(0.0))
    a_exprs: tuple = ()

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "v_expr", _as_expr(self.v_expr))
        object.__setattr__(self, "a_exprs", tuple(_as_expr(a) for a in self.a_exprs))

    def _free(self):
        out = exprlang.free_variables(self.v_expr)
        for a in self.a_exprs:
            out |= exprlang.free_variables(a)
        return out

    @property
    def native_dim(self):
        used = self._free()
        d = len(self.a_exprs)
        for k, name in enumerate(_AXIS_NAMES):
            if name in used:
                d = max(d, k + 1)
        return max(d, 1)

    @property
    def time_dependent(self):
        return "t" in self._free()

    @property
    def magnetic_zero(self):
        return all(exprlang._const(a) == 0.0 for a in self.a_exprs)

    def _env(self, t, xs):
        env = {"t": t}
        for k, x in enumerate(xs):
            env[_AXIS_NAMES[k]] = x
        return env

    def scalar(self, t, xs):
        return np.asarray(exprlang.evaluate(self.v_expr, self._env(t, xs)),
                          dtype=np.float64)

    def magnetic(self, t, xs):
        env = self._env(t, xs)
        out = []
        for k in range(len(xs)):
            if k < len(self.a_exprs):
                out.append(np.asarray(exprlang.evaluate(self.a_exprs[k], env),
                                      dtype=np.float64))
            else:
                out.append(_ZERO)
        return out

    def scalar_gradient(self, t, xs):
        env = self._env(t, xs)
        out = []
        for k in range(len(xs)):
            d = exprlang.differentiate(self.v_expr, _AXIS_NAMES[k])
            out.append(np.asarray(exprlang.evaluate(d, env), dtype=np.float64))
        return out

    def magnetic_gradient(self, t, xs):
        env = self._env(t, xs)
        grad = []
        for k in range(len(xs)):
            row = []
            for j in range(len(xs)):
                if k < len(self.a_exprs):
                    d = exprlang.differentiate(self.a_exprs[k], _AXIS_NAMES[j])
                    row.append(np.asarray(exprlang.evaluate(d, env), dtype=np.float64))
                else:
                    row.append(_ZERO)
            grad.append(row)
        return grad


def evaluate(model, t, point):
    """Point evaluation: (V, [A_1 .. A_d]) at time t and position tuple."""
    xs = [np.asarray(float(v)) for v in point]
    model.check_dimension(len(xs))
    v = float(np.asarray(model.scalar(t, xs)))
    a = [float(np.asarray(ak)) for ak in model.magnetic(t, xs)]
    return v, a

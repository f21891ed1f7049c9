"""One-step schemes for pH systems and the Radau IIA reference integrator."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .core import InputSignal, PHSystem, TimeGrid, Trajectory
from .discrete_gradients import (DEFAULT_DIAG_TOL, DiscreteGradient, DiscreteGradientPair,
                                 midpoint_dg, pair_for)
from .newton import NewtonError, NewtonSettings, newton_solve

Array = np.ndarray

SCHEMES = ("dgp", "classical_dg", "implicit_midpoint", "radau5")
PREDICTORS = ("previous_state", "explicit_euler")


class StepError(RuntimeError):
    """An implicit step could not be solved."""

    def __init__(self, msg, state=None, cause=None):
        super().__init__(msg)
        self.state = state
        self.cause = cause


class SingularMassMatrixError(StepError):
    pass


class IntegrationError(RuntimeError):
    """A step failed; ``trajectory`` holds the steps completed before ``index``."""

    def __init__(self, msg, index: int, trajectory: Trajectory):
        super().__init__(msg)
        self.index = index
        self.trajectory = trajectory


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "dgp"
    newton: NewtonSettings = field(default_factory=NewtonSettings)
    predictor: str = "previous_state"
    tol_diag: float = DEFAULT_DIAG_TOL

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if self.predictor not in PREDICTORS:
            raise ValueError(f"unknown predictor {self.predictor!r}")


@dataclass(frozen=True)
class BarCoefficients:
    """Two-point approximations of ``J``, ``R`` and ``B``."""

    Jbar: Callable[[Array, Array], Array]
    Rbar: Callable[[Array, Array], Array]
    Bbar: Callable[[Array, Array], Array]


def midpoint_bars(sys: PHSystem) -> BarCoefficients:
    """Evaluate ``J``, ``R``, ``B`` at the midpoint of the two states."""
    return BarCoefficients(
        Jbar=lambda x, xh: sys.J(0.5 * (x + xh)),
        Rbar=lambda x, xh: sys.R(0.5 * (x + xh)),
        Bbar=lambda x, xh: sys.B(0.5 * (x + xh)),
    )


def _solve(F, guess, cfg, xk):
    try:
        return newton_solve(F, guess, cfg.newton)
    except NewtonError as exc:
        raise StepError(f"implicit step failed: {exc}", state=xk, cause=exc) from exc


# discrete gradient pair scheme ------------------------------------------------

def dgp_residual(pair: DiscreteGradientPair, bars: BarCoefficients, xk, u_mid, dt):
    """Residual ``Ebar (xh - xk) - dt (Jbar - Rbar) zbar - dt Bbar u`` of the DGP step."""
    def F(xh):
        Eb, zb = pair.evaluate(xk, xh)
        return (Eb @ (xh - xk) - dt * ((bars.Jbar(xk, xh) - bars.Rbar(xk, xh)) @ zb)
                - dt * (bars.Bbar(xk, xh) @ u_mid))
    return F


def dgp_step(sys: PHSystem, pair: DiscreteGradientPair, bars: BarCoefficients, xk, u_mid,
             dt: float, cfg: SchemeConfig, guess=None) -> Tuple[Array, Array]:
    """Advance one step of the discrete gradient pair scheme.

    Returns the new state and the midpoint output ``Bbar^T zbar``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    xk = np.asarray(xk, dtype=float)
    u_mid = np.asarray(u_mid, dtype=float)
    guess = _predict(sys, xk, u_mid, dt, cfg) if guess is None else guess
    res = _solve(dgp_residual(pair, bars, xk, u_mid, dt), guess, cfg, xk)
    x_next = res.solution
    zb = pair.zbar(xk, x_next)
    return x_next, bars.Bbar(xk, x_next).T @ zb


# classical discrete gradient scheme --------------------------------------------

def classical_dg_step(dg: DiscreteGradient, Jconst, xk, dt: float, cfg: SchemeConfig) -> Array:
    """Solve ``xh = xk + dt J dg(xk, xh)`` for a constant skew ``J``."""
    xk = np.asarray(xk, dtype=float)
    Jconst = np.asarray(Jconst, dtype=float)
    F = lambda xh: xh - xk - dt * (Jconst @ dg(xk, xh))
    return _solve(F, xk.copy(), cfg, xk).solution


def transformed_dg_step(sys: PHSystem, dg: DiscreteGradient, xk, u_mid, dt: float,
                        cfg: SchemeConfig, guess=None) -> Tuple[Array, Array]:
    """Discrete gradient step on the explicit form of the system.

    With ``Jt = E^-1 J E^-T``, ``Rt = E^-1 R E^-T``, ``Bt = E^-1 B`` at the
    midpoint, solves ``xh - xk = dt (Jt - Rt) dg + dt Bt u``. Reduces to the
    plain conservative scheme when ``E = I``, ``R = 0`` and ``J`` is constant.
    """
    xk = np.asarray(xk, dtype=float)
    u_mid = np.asarray(u_mid, dtype=float)

    def coeffs(xh):
        mid = 0.5 * (xk + xh)
        E = sys.E(mid)
        Jt = _tilde(E, sys.J(mid), mid)
        Rt = _tilde(E, sys.R(mid), mid)
        Bt = _esolve(E, sys.B(mid), mid)
        return Jt, Rt, Bt

    def F(xh):
        Jt, Rt, Bt = coeffs(xh)
        return xh - xk - dt * ((Jt - Rt) @ dg(xk, xh)) - dt * (Bt @ u_mid)

    guess = _predict(sys, xk, u_mid, dt, cfg) if guess is None else guess
    x_next = _solve(F, guess, cfg, xk).solution
    _, _, Bt = coeffs(x_next)
    return x_next, Bt.T @ dg(xk, x_next)


# implicit midpoint rule ---------------------------------------------------------

def implicit_midpoint_step(sys: PHSystem, xk, u_mid, dt: float, cfg: SchemeConfig,
                           guess=None) -> Tuple[Array, Array]:
    """Implicit midpoint step ``E(mid)(xh - xk) = dt (J - R)(mid) z(mid) + dt B(mid) u``.

    The midpoint output is ``B(mid)^T z(mid)``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    xk = np.asarray(xk, dtype=float)
    u_mid = np.asarray(u_mid, dtype=float)

    def F(xh):
        mid = 0.5 * (xk + xh)
        return sys.E(mid) @ (xh - xk) - dt * sys.rhs(mid, u_mid)

    guess = _predict(sys, xk, u_mid, dt, cfg) if guess is None else guess
    x_next = _solve(F, guess, cfg, xk).solution
    mid = 0.5 * (xk + x_next)
    return x_next, sys.B(mid).T @ sys.z(mid)


# explicit form and Radau IIA ----------------------------------------------------

@dataclass(frozen=True)
class ExplicitODE:
    """``x' = rhs(x, u)`` with output ``output(x)``."""

    n: int
    m: int
    rhs: Callable[[Array, Array], Array]
    output: Optional[Callable[[Array], Array]] = None


def _esolve(E, rhs, x):
    try:
        return np.linalg.solve(E, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMassMatrixError(f"mass matrix is singular at x = {x}", state=x) from exc


def _tilde(E, M, x):
    # E^-1 M E^-T via two solves
    return _esolve(E, _esolve(E, M, x).T, x).T


def transform_to_explicit(sys: PHSystem) -> ExplicitODE:
    """Explicit form ``x' = E^-1 [(J - R) z + B u]`` evaluated by a linear solve."""
    return ExplicitODE(
        n=sys.n, m=sys.m,
        rhs=lambda x, u: _esolve(sys.E(x), sys.rhs(x, u), x),
        output=sys.output,
    )


_S6 = np.sqrt(6.0)
RADAU_A = np.array([
    [(88 - 7 * _S6) / 360, (296 - 169 * _S6) / 1800, (-2 + 3 * _S6) / 225],
    [(296 + 169 * _S6) / 1800, (88 + 7 * _S6) / 360, (-2 - 3 * _S6) / 225],
    [(16 - _S6) / 36, (16 + _S6) / 36, 1 / 9],
])
RADAU_B = RADAU_A[-1].copy()
RADAU_C = np.array([(4 - _S6) / 10, (4 + _S6) / 10, 1.0])


def radau5_step(ode: ExplicitODE, xk, u: InputSignal, t: float, dt: float,
                cfg: SchemeConfig) -> Array:
    """One step of the 3-stage Radau IIA method (order 5).

    Newton unknowns are the stage increments ``Z_i = X_i - xk``; the method
    is stiffly accurate, so the new state is ``xk + Z_3``.
    """
    xk = np.asarray(xk, dtype=float)
    n = xk.size
    us = [np.asarray(u(t + c * dt), dtype=float) for c in RADAU_C]

    def F(Zflat):
        Z = Zflat.reshape(3, n)
        fs = np.stack([ode.rhs(xk + Z[i], us[i]) for i in range(3)])
        return (Z - dt * (RADAU_A @ fs)).ravel()

    f0 = ode.rhs(xk, us[0])
    guess = (RADAU_C[:, None] * dt * f0[None, :]).ravel()
    Z = _solve(F, guess, cfg, xk).solution.reshape(3, n)
    return xk + Z[-1]


def _predict(sys, xk, u_mid, dt, cfg):
    if cfg.predictor == "explicit_euler":
        return xk + dt * _esolve(sys.E(xk), sys.rhs(xk, u_mid), xk)
    return xk.copy()


# driver ----------------------------------------------------------------------------

def integrate(sys: PHSystem, cfg: SchemeConfig, grid: TimeGrid, u: InputSignal, x0,
              pair: Optional[DiscreteGradientPair] = None,
              bars: Optional[BarCoefficients] = None) -> Trajectory:
    """Integrate over ``grid`` with the scheme selected in ``cfg``.

    Inputs are sampled at interval midpoints. For ``radau5`` the recorded
    midpoint output is ``B^T z`` at the average of the two node states.

    Raises
    ------
    IntegrationError
        At the first failing step, carrying the partial trajectory.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.n,):
        raise ValueError(f"initial state must have shape ({sys.n},)")
    q = grid.q
    X = np.empty((q, sys.n))
    U = np.empty((q - 1, sys.m))
    Y = np.empty((q - 1, sys.m))
    X[0] = x0
    t, h, tm = grid.points, grid.steps, grid.midpoints

    if cfg.scheme == "dgp":
        pair = pair or pair_for(sys, cfg.tol_diag)
        bars = bars or midpoint_bars(sys)
        step = lambda k, xk, um: dgp_step(sys, pair, bars, xk, um, h[k], cfg)
    elif cfg.scheme == "classical_dg":
        dg = midpoint_dg(sys.H, sys.gradH, cfg.tol_diag)
        step = lambda k, xk, um: transformed_dg_step(sys, dg, xk, um, h[k], cfg)
    elif cfg.scheme == "implicit_midpoint":
        step = lambda k, xk, um: implicit_midpoint_step(sys, xk, um, h[k], cfg)
    else:
        ode = transform_to_explicit(sys)

        def step(k, xk, um):
            xn = radau5_step(ode, xk, u, t[k], h[k], cfg)
            mid = 0.5 * (xk + xn)
            return xn, sys.B(mid).T @ sys.z(mid)

    for k in range(q - 1):
        U[k] = u(tm[k])
        try:
            X[k + 1], Y[k] = step(k, X[k], U[k])
        except (StepError, ArithmeticError) as exc:
            partial = TimeGrid(t[:k + 1]) if k >= 1 else None
            traj = None
            if partial is not None:
                traj = Trajectory(partial, X[:k + 1].copy(), U[:k].copy(), Y[:k].copy(),
                                  scheme=cfg.scheme)
            raise IntegrationError(f"step {k} (t = {t[k]:.6g}) failed: {exc}", k, traj) from exc
    return Trajectory(grid, X, U, Y, scheme=cfg.scheme)

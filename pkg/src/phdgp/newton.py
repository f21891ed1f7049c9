"""Damped Newton iteration for the implicit per-step equations."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

Array = np.ndarray


@dataclass(frozen=True)
class NewtonSettings:
    """Stopping and damping parameters.

    Attributes
    ----------
    tol_residual : float
        Success threshold on the max-norm of ``F``.
    tol_step : float
        Stagnation threshold: an update smaller than this (relative to
        ``1 + |x|``) that fails to halve the residual ends the iteration
        unsuccessfully.
    max_iter : int
        Maximum number of Newton updates.
    fd_jacobian_h : float
        Relative forward-difference step for the Jacobian.
    damping : int
        Maximum number of step halvings in the line search.
    polish : int
        Extra updates with the last Jacobian once converged; each is kept
        only if it lowers the residual.
    """

    tol_residual: float = 1e-13
    tol_step: float = 1e-8
    max_iter: int = 50
    fd_jacobian_h: float = 1e-7
    damping: int = 10
    polish: int = 1

    def __post_init__(self):
        if self.tol_residual <= 0 or self.tol_step <= 0 or self.fd_jacobian_h <= 0:
            raise ValueError("Newton tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.damping < 0 or self.polish < 0:
            raise ValueError("damping and polish must be non-negative")

    def with_tol(self, tol_residual: float) -> "NewtonSettings":
        return replace(self, tol_residual=tol_residual)


@dataclass
class NewtonResult:
    solution: Array
    iterations: int
    residual_norm: float
    converged: bool
    message: str = ""


class NewtonError(RuntimeError):
    """Newton iteration failed; ``result`` holds the best iterate found."""

    def __init__(self, msg: str, result: NewtonResult):
        super().__init__(msg)
        self.result = result


def fd_jacobian(F, x, Fx, h):
    n = x.size
    Jac = np.empty((Fx.size, n))
    for j in range(n):
        step = h * (1.0 + abs(x[j]))
        xp = x.copy()
        xp[j] += step
        # recompute the actual step to cancel representation error in x + step
        Jac[:, j] = (F(xp) - Fx) / (xp[j] - x[j])
    return Jac


def newton_solve(F: Callable[[Array], Array], x0, settings: Optional[NewtonSettings] = None,
                 jac: Optional[Callable[[Array], Array]] = None,
                 raise_on_failure: bool = True) -> NewtonResult:
    """Solve ``F(x) = 0`` by Newton's method with halving line search.

    The Jacobian is ``jac(x)`` if given, forward differences otherwise.
    Success means ``max|F(x)| <= tol_residual``; nothing else sets
    ``converged``.

    Raises
    ------
    NewtonError
        On non-convergence or a singular Newton matrix, unless
        ``raise_on_failure`` is False, in which case the unconverged
        result is returned.
    """
    s = settings or NewtonSettings()
    x = np.array(x0, dtype=float)
    Fx = np.asarray(F(x), dtype=float)
    r = float(np.max(np.abs(Fx))) if Fx.size else 0.0
    best = (x.copy(), r)

    def fail(msg, it):
        res = NewtonResult(best[0], it, best[1], False, msg)
        if raise_on_failure:
            raise NewtonError(msg, res)
        return res

    if not np.isfinite(r):
        return fail("residual is not finite at the initial guess", 0)
    it = 0
    Jx = None
    while r > s.tol_residual:
        if it >= s.max_iter:
            return fail(f"no convergence after {it} iterations (|F| = {best[1]:.3e})", it)
        it += 1
        Jx = jac(x) if jac is not None else fd_jacobian(F, x, Fx, s.fd_jacobian_h)
        try:
            dx = np.linalg.solve(Jx, -Fx)
        except np.linalg.LinAlgError:
            return fail(f"singular Jacobian at iteration {it} (cond = {np.linalg.cond(Jx):.3e})", it)
        if not np.all(np.isfinite(dx)):
            return fail(f"non-finite Newton update at iteration {it}", it)

        lam = 1.0
        for _ in range(s.damping + 1):
            x_new = x + lam * dx
            F_new = np.asarray(F(x_new), dtype=float)
            r_new = float(np.max(np.abs(F_new)))
            # Armijo-type sufficient decrease in the max norm
            if np.isfinite(r_new) and r_new <= (1.0 - 1e-4 * lam) * r:
                break
            lam *= 0.5
        if not np.isfinite(r_new):
            return fail(f"residual became non-finite at iteration {it}", it)

        step = float(np.max(np.abs(x_new - x)))
        stalled = r_new > 0.5 * r
        x, Fx, r = x_new, F_new, r_new
        if r < best[1]:
            best = (x.copy(), r)
        if r > s.tol_residual and stalled and step <= s.tol_step * (1.0 + float(np.max(np.abs(x)))):
            return fail(f"stagnated at |F| = {best[1]:.3e} after {it} iterations", it)

    for _ in range(s.polish if r > 0.0 else 0):
        if Jx is None:
            Jx = jac(x) if jac is not None else fd_jacobian(F, x, Fx, s.fd_jacobian_h)
        try:
            x_new = x + np.linalg.solve(Jx, -Fx)
        except np.linalg.LinAlgError:
            break
        F_new = np.asarray(F(x_new), dtype=float)
        r_new = float(np.max(np.abs(F_new)))
        if not r_new < r:
            break
        x, Fx, r = x_new, F_new, r_new
    return NewtonResult(x, it, r, True, "converged")

"""Discrete gradients and discrete gradient pairs.

A discrete gradient of ``H`` is a two-point map ``dg(x, xhat)`` with
``dg(x, x) = grad H(x)`` and ``dg(x, xhat)^T (xhat - x) = H(xhat) - H(x)``.

A discrete gradient pair ``(Ebar, zbar)`` for a factorization
``E(x)^T z(x) = grad H(x)`` satisfies ``Ebar(x, x) = E(x)``,
``zbar(x, x) = z(x)`` and ``zbar^T Ebar (xhat - x) = H(xhat) - H(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

from .core import PHSystem

Array = np.ndarray

DEFAULT_DIAG_TOL = 1e-14


class MassMatrixError(ArithmeticError):
    """The mass matrix is not positive definite along the secant direction."""

    def __init__(self, msg, x=None, xhat=None):
        super().__init__(msg)
        self.x = x
        self.xhat = xhat


def _on_diagonal(x, xhat, tol):
    return np.linalg.norm(xhat - x) <= tol * (1.0 + np.linalg.norm(x))


def midpoint_discrete_gradient(H, gradH, x, xhat, tol_diag: float = DEFAULT_DIAG_TOL) -> Array:
    """Gonzalez midpoint discrete gradient.

    ``grad H(mid) + (H(xhat) - H(x) - grad H(mid)^T d) / |d|^2 * d`` with
    ``mid = (x + xhat) / 2`` and ``d = xhat - x``; ``grad H(x)`` when
    ``|d| <= tol_diag * (1 + |x|)``.
    """
    x = np.asarray(x, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    if _on_diagonal(x, xhat, tol_diag):
        return np.asarray(gradH(x), dtype=float)
    d = xhat - x
    g = np.asarray(gradH(0.5 * (x + xhat)), dtype=float)
    return g + ((H(xhat) - H(x) - g @ d) / (d @ d)) * d


@dataclass(frozen=True)
class DiscreteGradient:
    """A discrete gradient ``dg(x, xhat)`` together with the ``H`` it belongs to."""

    dg: Callable[[Array, Array], Array]
    H: Callable[[Array], float]
    gradH: Callable[[Array], Array]

    def __call__(self, x, xhat) -> Array:
        return self.dg(x, xhat)


def midpoint_dg(H, gradH, tol_diag: float = DEFAULT_DIAG_TOL) -> DiscreteGradient:
    return DiscreteGradient(
        dg=lambda x, xhat: midpoint_discrete_gradient(H, gradH, x, xhat, tol_diag),
        H=H, gradH=gradH)


@dataclass(frozen=True)
class DiscreteGradientPair:
    """Two-point surrogates ``(Ebar, zbar)`` for the factorization ``E^T z = grad H``."""

    Ebar: Callable[[Array, Array], Array]
    zbar: Callable[[Array, Array], Array]
    H: Callable[[Array], float]
    E: Callable[[Array], Array]
    z: Callable[[Array], Array]
    joint: Optional[Callable[[Array, Array], Tuple[Array, Array]]] = None

    def evaluate(self, x, xhat) -> Tuple[Array, Array]:
        """Both members at once; uses ``joint`` when the construction shares work."""
        if self.joint is not None:
            return self.joint(x, xhat)
        return self.Ebar(x, xhat), self.zbar(x, xhat)


class _MidpointPair:
    # Shares the midpoint evaluation of E between Ebar and zbar.

    def __init__(self, H, E, z, tol_diag):
        self.H, self.E, self.z, self.tol_diag = H, E, z, tol_diag

    def Ebar(self, x, xhat):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.E(0.5 * (x + np.asarray(xhat, dtype=float))), dtype=float)

    def evaluate(self, x, xhat):
        x = np.asarray(x, dtype=float)
        xhat = np.asarray(xhat, dtype=float)
        mid = 0.5 * (x + xhat)
        Ebar = np.asarray(self.E(mid), dtype=float)
        if _on_diagonal(x, xhat, self.tol_diag):
            return Ebar, np.asarray(self.z(x), dtype=float)
        d = xhat - x
        Ed = Ebar @ d
        denom = d @ Ed
        if not denom > 0.0:
            raise MassMatrixError(
                f"mass matrix not positive definite at midpoint (d^T E d = {denom:.3e})",
                x=x, xhat=xhat)
        zm = np.asarray(self.z(mid), dtype=float)
        return Ebar, zm + ((self.H(xhat) - self.H(x) - zm @ Ed) / denom) * d

    def zbar(self, x, xhat):
        return self.evaluate(x, xhat)[1]


def midpoint_discrete_gradient_pair(H, E, z, tol_diag: float = DEFAULT_DIAG_TOL) -> DiscreteGradientPair:
    """Midpoint discrete gradient pair for a pointwise SPD mass matrix.

    ``Ebar(x, xhat) = E(mid)`` and
    ``zbar(x, xhat) = z(mid) + (H(xhat) - H(x) - z(mid)^T Ebar d) / (d^T Ebar d) * d``,
    falling back to ``z(x)`` on the diagonal band ``|d| <= tol_diag (1 + |x|)``.

    Evaluating ``zbar`` raises :class:`MassMatrixError` if ``d^T Ebar d <= 0``.
    """
    impl = _MidpointPair(H, E, z, tol_diag)
    return DiscreteGradientPair(Ebar=impl.Ebar, zbar=impl.zbar, H=H, E=E, z=z,
                                joint=impl.evaluate)


def pair_for(sys: PHSystem, tol_diag: float = DEFAULT_DIAG_TOL) -> DiscreteGradientPair:
    return midpoint_discrete_gradient_pair(sys.H, sys.E, sys.z, tol_diag)


@dataclass
class PairDefects:
    """Largest absolute violations of the three pair axioms."""

    mass_consistency: float
    effort_consistency: float
    secant: float


def verify_pair_axioms(pair: DiscreteGradientPair,
                       samples: Iterable[Tuple[Array, Array]]) -> PairDefects:
    """Evaluate the pair axioms on ``(x, xhat)`` samples.

    Diagonal consistency is checked at both ``x`` and ``xhat`` of every
    sample; the secant identity is checked on the pair itself.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample pair")
    dE = dz = sec = 0.0
    for x, xhat in samples:
        x = np.asarray(x, dtype=float)
        xhat = np.asarray(xhat, dtype=float)
        for p in (x, xhat):
            Ed, zd = pair.evaluate(p, p)
            dE = max(dE, float(np.max(np.abs(Ed - pair.E(p)))))
            dz = max(dz, float(np.max(np.abs(zd - pair.z(p)))))
        Eb, zb = pair.evaluate(x, xhat)
        sec = max(sec, abs(float(zb @ (Eb @ (xhat - x))) - (pair.H(xhat) - pair.H(x))))
    return PairDefects(dE, dz, sec)


def verify_dg_axioms(dg: DiscreteGradient, samples) -> Tuple[float, float]:
    """Return ``(consistency_defect, secant_defect)`` for a discrete gradient."""
    cons = sec = 0.0
    for x, xhat in samples:
        x = np.asarray(x, dtype=float)
        xhat = np.asarray(xhat, dtype=float)
        for p in (x, xhat):
            cons = max(cons, float(np.max(np.abs(dg(p, p) - dg.gradH(p)))))
        sec = max(sec, abs(float(dg(x, xhat) @ (xhat - x)) - (dg.H(xhat) - dg.H(x))))
    return cons, sec

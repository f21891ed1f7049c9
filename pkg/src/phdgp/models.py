"""Bundled test models.

Parameters marked as defaults here are local choices for exercising the
schemes, not values taken from any published experiment.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

from .core import (DEFAULT_STRUCT_TOL, InputSignal, PHSystem, StructureError, check_ph_structure,
                   random_states, zero_input)

Array = np.ndarray


@dataclass(frozen=True)
class ModelSpec:
    """A constructed system with its reference initial state, input and sample box."""

    name: str
    system: PHSystem
    x0: Array
    input: InputSignal
    box: Tuple[float, float] = (-1.0, 1.0)
    params: Dict = field(default_factory=dict)

    def sample_states(self, count: int, rng: np.random.Generator) -> Array:
        return random_states(self.box, self.system.n, count, rng)


def make_pendulum() -> PHSystem:
    """Mathematical pendulum, ``H(q, p) = p^2/2 + 1 - cos q``, conservative."""
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    I2, Z2, B = np.eye(2), np.zeros((2, 2)), np.zeros((2, 0))

    def gradH(x):
        return np.array([np.sin(x[0]), x[1]])

    return PHSystem(
        n=2, m=0,
        E=lambda x: I2, J=lambda x: J, R=lambda x: Z2, B=lambda x: B,
        H=lambda x: 0.5 * x[1] ** 2 + (1.0 - np.cos(x[0])),
        gradH=gradH, z=gradH, name="pendulum",
    )


def make_lti_ph(n: int = 3, seed: int = 0) -> PHSystem:
    """Linear pH system with constant SPD ``E``, quadratic ``H = x^T Q x / 2``.

    Matrices are drawn from ``seed`` so the system is reproducible.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    E = np.eye(n) + A @ A.T / n
    C = rng.standard_normal((n, n))
    Q = np.eye(n) + C @ C.T / n
    S = rng.standard_normal((n, n))
    J = S - S.T
    D = rng.standard_normal((n, n)) / np.sqrt(n)
    R = 0.1 * D @ D.T
    B = rng.standard_normal((n, 1))
    Zmat = np.linalg.solve(E, Q)
    return PHSystem(
        n=n, m=1,
        E=lambda x: E, J=lambda x: J, R=lambda x: R, B=lambda x: B,
        H=lambda x: 0.5 * x @ Q @ x, gradH=lambda x: Q @ x, z=lambda x: Zmat @ x,
        name="lti",
    )


def make_synthetic_nonlinear_ph(n: int = 4, alpha: float = 1.0, delta: float = 0.1) -> PHSystem:
    """Nonlinear pH system with state-dependent SPD mass matrix.

    ``E(x) = I + alpha g g^T`` with ``g = sin(x)``,
    ``H(x) = |x|^2/2 + sum(cosh x_i) - n``, ``z = E^-1 grad H``,
    tridiagonal skew ``J`` (+1 above, -1 below the diagonal),
    ``R = delta I`` and ``B = e_1``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    J = np.diag(np.ones(n - 1), 1) - np.diag(np.ones(n - 1), -1)
    R = delta * np.eye(n)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    eye = np.eye(n)

    def E(x):
        g = np.sin(x)
        return eye + alpha * np.outer(g, g)

    def gradH(x):
        return x + np.sinh(x)

    def z(x):
        # Sherman-Morrison solve of (I + alpha g g^T) z = grad H
        g = np.sin(x)
        gh = gradH(x)
        return gh - (alpha * (g @ gh) / (1.0 + alpha * (g @ g))) * g

    return PHSystem(
        n=n, m=1, E=E, J=lambda x: J, R=lambda x: R, B=lambda x: B,
        H=lambda x: 0.5 * (x @ x) + float(np.sum(np.cosh(x))) - n,
        gradH=gradH, z=z, name="synthetic",
    )


def advection_diffusion_matrices(N: int, c: float, d: float):
    """Assemble ``(J, R, B, h)`` for the cell-centered discretization on ``(0, 1)``.

    ``N`` cells of width ``h``; interior face fluxes ``c (x_i + x_{i+1})/2 -
    d (x_{i+1} - x_i)/h``; inflow face flux ``c g``; outflow face flux
    ``c x_N``. With ``E = h I`` and ``z = x`` the semi-discrete system is
    ``h x' = (J - R) x + B g``.
    """
    h = 1.0 / N
    A = np.zeros((N, N))
    for i in range(N - 1):
        # flux through face between cells i and i+1, leaves i, enters i+1
        flux = np.zeros(N)
        flux[i] += 0.5 * c + d / h
        flux[i + 1] += 0.5 * c - d / h
        A[i] -= flux
        A[i + 1] += flux
    A[N - 1, N - 1] -= c
    B = np.zeros((N, 1))
    B[0, 0] = c
    J = 0.5 * (A - A.T)
    R = -0.5 * (A + A.T)
    return J, R, B, h


def make_advection_diffusion_fd(N: int = 20, c: float = 1.0, d: float = 0.05) -> PHSystem:
    """Linear advection-diffusion on ``(0, 1)`` in pH form.

    Robin inflow ``c x - d x_xi = c g`` at 0 and Neumann ``x_xi = 0`` at 1
    enter through the boundary face fluxes. ``E = h I``, ``H = h |x|^2 / 2``,
    ``z = x``; the input is ``g`` and the output ``c x_1``.

    Raises
    ------
    StructureError
        If the assembled ``R`` is not positive semidefinite (e.g. ``c < 0``).
    """
    if N < 3:
        raise ValueError("need at least 3 grid cells")
    if d < 0:
        raise ValueError("diffusion coefficient must be non-negative")
    J, R, B, h = advection_diffusion_matrices(N, c, d)
    lam = float(np.min(np.linalg.eigvalsh(R)))
    if lam < -DEFAULT_STRUCT_TOL:
        raise StructureError(f"dissipation matrix not PSD for c={c}, d={d}, N={N} "
                             f"(min eigenvalue {lam:.3e})")
    E = h * np.eye(N)
    return PHSystem(
        n=N, m=1, E=lambda x: E, J=lambda x: J, R=lambda x: R, B=lambda x: B,
        H=lambda x: 0.5 * h * (x @ x), gradH=lambda x: h * x, z=lambda x: np.array(x, dtype=float),
        name="advection_diffusion",
    )


def _sine_input(freq=1.0, amp=1.0):
    return lambda t: np.array([amp * np.sin(2.0 * np.pi * freq * t)])


def pendulum_spec() -> ModelSpec:
    return ModelSpec("pendulum", make_pendulum(), np.array([1.0, 0.5]), zero_input(0),
                     box=(-2.0, 2.0))


def lti_spec(n: int = 3, seed: int = 0) -> ModelSpec:
    x0 = np.linspace(1.0, -0.5, n)
    return ModelSpec("lti", make_lti_ph(n, seed), x0, _sine_input(),
                     params={"n": n, "seed": seed})


def synthetic_spec(n: int = 4, alpha: float = 1.0, delta: float = 0.1) -> ModelSpec:
    x0 = np.linspace(0.8, -0.4, n)
    return ModelSpec("synthetic", make_synthetic_nonlinear_ph(n, alpha, delta), x0,
                     _sine_input(), params={"n": n, "alpha": alpha, "delta": delta})


def advection_diffusion_spec(N: int = 20, c: float = 1.0, d: float = 0.05) -> ModelSpec:
    xi = (np.arange(N) + 0.5) / N
    x0 = np.exp(-((xi - 0.5) / 0.15) ** 2)
    return ModelSpec("advection_diffusion", make_advection_diffusion_fd(N, c, d), x0,
                     _sine_input(), params={"N": N, "c": c, "d": d})


MODELS: Dict[str, Callable[..., ModelSpec]] = {
    "pendulum": pendulum_spec,
    "lti": lti_spec,
    "synthetic": synthetic_spec,
    "advection_diffusion": advection_diffusion_spec,
}


def get_model(name: str, **params) -> ModelSpec:
    try:
        factory = MODELS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; available: {', '.join(sorted(MODELS))}") from None
    return factory(**params)


def validate_model(spec: ModelSpec, count: int = 1000, seed: int = 0,
                   tol: float = DEFAULT_STRUCT_TOL):
    """Structure report of ``spec.system`` at ``count`` random states in its box."""
    rng = np.random.default_rng(seed)
    return check_ph_structure(spec.system, spec.sample_states(count, rng), tol)

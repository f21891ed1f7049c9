"""Port-Hamiltonian system data model, time grids, trajectories and structure checks.

A nonlinear port-Hamiltonian (pH) system with state-dependent mass matrix reads

    E(x) x' = (J(x) - R(x)) z(x) + B(x) u,
         y  = B(x)^T z(x),

with J = -J^T, R = R^T >= 0 and E^T z = grad H pointwise.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

Array = np.ndarray
InputSignal = Callable[[float], Array]

DEFAULT_STRUCT_TOL = 1e-8


class StructureError(ValueError):
    """Callback output is inconsistent with the declared dimensions or structure."""


@dataclass(frozen=True)
class PHSystem:
    """Callback bundle describing a pH system with ``n`` states and ``m`` ports.

    Every callback takes a state vector of shape ``(n,)``. ``B`` must return
    an ``(n, m)`` array, also when ``m == 0``.
    """

    n: int
    m: int
    E: Callable[[Array], Array]
    J: Callable[[Array], Array]
    R: Callable[[Array], Array]
    z: Callable[[Array], Array]
    B: Callable[[Array], Array]
    H: Callable[[Array], float]
    gradH: Callable[[Array], Array]
    name: str = "ph-system"

    def __post_init__(self):
        if self.n < 1:
            raise StructureError(f"state dimension must be positive, got n={self.n}")
        if self.m < 0:
            raise StructureError(f"port dimension must be non-negative, got m={self.m}")

    def output(self, x: Array) -> Array:
        return self.B(x).T @ self.z(x)

    def rhs(self, x: Array, u: Array) -> Array:
        """Right-hand side ``(J - R) z + B u`` of the state equation."""
        return (self.J(x) - self.R(x)) @ self.z(x) + self.B(x) @ u


def zero_input(m: int) -> InputSignal:
    zeros = np.zeros(m)
    return lambda t: zeros


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing time points ``0 = t_1 < ... < t_q``."""

    points: Array

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a time grid needs at least two points")
        if pts[0] != 0.0:
            raise ValueError(f"time grid must start at 0, got {pts[0]}")
        if np.any(np.diff(pts) <= 0.0):
            raise ValueError("time grid must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, t_end: float, dt: float, rtol: float = 1e-9) -> "TimeGrid":
        """Uniform grid with step ``dt``; ``dt`` must divide ``t_end``."""
        if dt <= 0 or t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        steps = int(round(t_end / dt))
        if steps < 1 or abs(steps * dt - t_end) > rtol * t_end:
            raise ValueError(f"dt={dt!r} does not divide t_end={t_end!r}")
        return cls(np.linspace(0.0, t_end, steps + 1))

    @property
    def q(self) -> int:
        return self.points.size

    @property
    def steps(self) -> Array:
        return np.diff(self.points)

    @property
    def midpoints(self) -> Array:
        return 0.5 * (self.points[:-1] + self.points[1:])


@dataclass
class Trajectory:
    """Node states plus the port data sampled at interval midpoints.

    ``states`` has shape ``(q, n)``; ``inputs_mid`` and ``outputs_mid`` have
    shape ``(q - 1, m)``.
    """

    grid: TimeGrid
    states: Array
    inputs_mid: Array
    outputs_mid: Array
    scheme: str = ""

    def __post_init__(self):
        q = self.grid.q
        if self.states.shape[0] != q:
            raise ValueError(f"expected {q} states, got {self.states.shape[0]}")
        if self.inputs_mid.shape[0] != q - 1 or self.outputs_mid.shape[0] != q - 1:
            raise ValueError("midpoint port data must have q - 1 rows")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def m(self) -> int:
        return self.inputs_mid.shape[1]


@dataclass
class StructureReport:
    """Worst structure defects over a set of sample states.

    ``factorization_defect`` is ``|E^T z - grad H| / (1 + |grad H|)``.
    ``psd_defect`` is ``max(0, -min_eig_R)``.
    """

    tol: float
    skew_defect: float
    skew_state: Array
    symmetry_defect: float
    symmetry_state: Array
    min_eig_R: float
    min_eig_state: Array
    factorization_defect: float
    factorization_state: Array

    @property
    def psd_defect(self) -> float:
        return max(0.0, -self.min_eig_R)

    @property
    def passed(self) -> bool:
        return max(self.skew_defect, self.symmetry_defect, self.psd_defect,
                   self.factorization_defect) <= self.tol

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} (tol={self.tol:.1e}): skew={self.skew_defect:.3e} "
                f"sym={self.symmetry_defect:.3e} min_eig(R)={self.min_eig_R:.3e} "
                f"E^T z - gradH={self.factorization_defect:.3e}")


def _checked(value, shape, what):
    arr = np.asarray(value, dtype=float)
    if arr.shape != shape:
        raise StructureError(f"{what} returned shape {arr.shape}, expected {shape}")
    return arr


def evaluate_coefficients(sys: PHSystem, x: Array):
    """Evaluate all callbacks at ``x`` with dimension checks."""
    n, m = sys.n, sys.m
    x = _checked(x, (n,), "state")
    E = _checked(sys.E(x), (n, n), "E")
    J = _checked(sys.J(x), (n, n), "J")
    R = _checked(sys.R(x), (n, n), "R")
    z = _checked(sys.z(x), (n,), "z")
    B = _checked(sys.B(x), (n, m), "B")
    g = _checked(sys.gradH(x), (n,), "gradH")
    H = float(np.asarray(sys.H(x)))
    return E, J, R, z, B, H, g


def check_ph_structure(sys: PHSystem, samples: Sequence[Array],
                       tol: float = DEFAULT_STRUCT_TOL) -> StructureReport:
    """Check ``J = -J^T``, ``R = R^T >= 0`` and ``E^T z = grad H`` on samples.

    Raises
    ------
    StructureError
        If a callback returns an array of the wrong shape.
    """
    if len(samples) == 0:
        raise ValueError("need at least one sample state")
    if tol <= 0:
        raise ValueError("tol must be positive")
    worst = {"skew": (-1.0, None), "sym": (-1.0, None), "fac": (-1.0, None)}
    min_eig, min_state = np.inf, None
    for x in samples:
        x = np.asarray(x, dtype=float)
        E, J, R, z, B, _, g = evaluate_coefficients(sys, x)
        skew = float(np.max(np.abs(J + J.T)))
        sym = float(np.max(np.abs(R - R.T)))
        fac = float(np.linalg.norm(E.T @ z - g) / (1.0 + np.linalg.norm(g)))
        eig = float(np.min(np.linalg.eigvalsh(0.5 * (R + R.T))))
        for key, val in (("skew", skew), ("sym", sym), ("fac", fac)):
            if val > worst[key][0]:
                worst[key] = (val, x.copy())
        if eig < min_eig:
            min_eig, min_state = eig, x.copy()
    return StructureReport(
        tol=tol,
        skew_defect=worst["skew"][0], skew_state=worst["skew"][1],
        symmetry_defect=worst["sym"][0], symmetry_state=worst["sym"][1],
        min_eig_R=min_eig, min_eig_state=min_state,
        factorization_defect=worst["fac"][0], factorization_state=worst["fac"][1],
    )


def gradient_fd_error(sys: PHSystem, samples: Sequence[Array], h: float = 1e-5) -> float:
    """Largest relative error of ``gradH`` against central differences of ``H``.

    The difference step is scaled by the state magnitude, ``h * (1 + |x_i|)``.
    """
    worst = 0.0
    for x in samples:
        x = np.asarray(x, dtype=float)
        g = np.asarray(sys.gradH(x), dtype=float)
        fd = np.empty(sys.n)
        for i in range(sys.n):
            step = h * (1.0 + abs(x[i]))
            e = np.zeros(sys.n)
            e[i] = step
            fd[i] = (sys.H(x + e) - sys.H(x - e)) / (2.0 * step)
        worst = max(worst, float(np.max(np.abs(fd - g)) / (1.0 + np.max(np.abs(g)))))
    return worst


def continuous_power_residual(sys: PHSystem, x: Array, xdot: Array,
                              u: Optional[Array] = None) -> float:
    """``grad H(x)^T xdot + z^T R z - z^T B u``; zero along exact solutions."""
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    u = np.zeros(sys.m) if u is None else np.asarray(u, dtype=float)
    if xdot.shape != (sys.n,) or u.shape != (sys.m,):
        raise StructureError("dimension mismatch in power residual arguments")
    _, _, R, z, B, _, g = evaluate_coefficients(sys, x)
    return float(g @ xdot + z @ R @ z - z @ B @ u)


def random_states(box, n: int, count: int, rng: np.random.Generator) -> Array:
    """Uniform samples from the box ``[lo, hi]^n``."""
    lo, hi = box
    return rng.uniform(lo, hi, size=(count, n))


# CSV serialization ------------------------------------------------------------

_FMT = "{:.17g}"


def _write_rows(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_FMT.format(float(v)) for v in row])


def write_trajectory_csv(traj: Trajectory, states_path, ports_path) -> None:
    """Write ``t,x_1..x_n`` and ``t_mid,u_1..u_m,y_1..y_m`` files (17 digits)."""
    n, m = traj.n, traj.m
    _write_rows(Path(states_path), ["t"] + [f"x_{i + 1}" for i in range(n)],
                np.column_stack([traj.grid.points, traj.states]))
    _write_rows(Path(ports_path),
                ["t_mid"] + [f"u_{i + 1}" for i in range(m)] + [f"y_{i + 1}" for i in range(m)],
                np.column_stack([traj.grid.midpoints, traj.inputs_mid, traj.outputs_mid]))


def _read_rows(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = np.array([[float(v) for v in row] for row in r], dtype=float)
    return header, data.reshape(-1, len(header))


def read_trajectory_csv(states_path, ports_path, scheme: str = "") -> Trajectory:
    _, s = _read_rows(states_path)
    header, p = _read_rows(ports_path)
    m = (len(header) - 1) // 2
    return Trajectory(grid=TimeGrid(s[:, 0]), states=s[:, 1:].copy(),
                      inputs_mid=p[:, 1:1 + m].copy(), outputs_mid=p[:, 1 + m:].copy(),
                      scheme=scheme)

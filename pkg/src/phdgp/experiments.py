"""Power-balance and convergence studies with CSV output."""
from __future__ import annotations

import json
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .core import PHSystem, TimeGrid, Trajectory, _write_rows
from .discrete_gradients import midpoint_dg, pair_for
from .integrators import SchemeConfig, _tilde, integrate, midpoint_bars
from .models import ModelSpec
from .newton import NewtonSettings

Array = np.ndarray


@dataclass
class PowerBalanceReport:
    """Per-interval terms of ``dH/dt + dissipation - supply = residual``."""

    scheme: str
    t_mid: Array
    lhs: Array
    dissipation: Array
    supply: Array
    residual: Array

    @property
    def max_abs_residual(self) -> float:
        return float(np.max(np.abs(self.residual)))

    def rows(self):
        return np.column_stack([self.t_mid, self.lhs, self.dissipation, self.supply, self.residual])

    def to_csv(self, path) -> None:
        _write_rows(Path(path), ["t_mid", "lhs", "dissipation", "supply", "residual"], self.rows())


def power_balance(sys: PHSystem, traj: Trajectory, scheme: Optional[str] = None,
                  tol_diag: Optional[float] = None) -> PowerBalanceReport:
    """Evaluate the discrete power balance along a trajectory.

    The effort used in the dissipation term depends on the scheme: ``zbar``
    of the midpoint pair for ``dgp``, the midpoint discrete gradient with
    the transformed ``R`` for ``classical_dg``, and ``z(mid)`` otherwise.
    The supply is ``y^T u`` from the recorded midpoint port data.
    """
    scheme = scheme or traj.scheme
    kw = {} if tol_diag is None else {"tol_diag": tol_diag}
    X, dt = traj.states, traj.grid.steps
    q = traj.grid.q
    lhs = np.empty(q - 1)
    diss = np.empty(q - 1)
    if scheme == "dgp":
        pair, bars = pair_for(sys, **kw), midpoint_bars(sys)
    elif scheme == "classical_dg":
        dg = midpoint_dg(sys.H, sys.gradH, **kw)
    for k in range(q - 1):
        x, xh = X[k], X[k + 1]
        lhs[k] = (sys.H(xh) - sys.H(x)) / dt[k]
        mid = 0.5 * (x + xh)
        if scheme == "dgp":
            zb = pair.zbar(x, xh)
            diss[k] = zb @ bars.Rbar(x, xh) @ zb
        elif scheme == "classical_dg":
            g = dg(x, xh)
            diss[k] = g @ _tilde(sys.E(mid), sys.R(mid), mid) @ g
        else:
            zm = sys.z(mid)
            diss[k] = zm @ sys.R(mid) @ zm
    supply = np.einsum("ij,ij->i", traj.outputs_mid, traj.inputs_mid)
    return PowerBalanceReport(scheme, traj.grid.midpoints, lhs, diss, supply, lhs + diss - supply)


def _map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_power_balance(model: ModelSpec, schemes: Sequence[str], dt: float, t_end: float,
                      newton: Optional[NewtonSettings] = None,
                      workers: int = 1) -> Dict[str, PowerBalanceReport]:
    grid = TimeGrid.uniform(t_end, dt)
    newton = newton or NewtonSettings()

    def one(scheme):
        traj = integrate(model.system, SchemeConfig(scheme, newton), grid, model.input, model.x0)
        return scheme, power_balance(model.system, traj, scheme)

    return dict(sorted(_map(one, list(schemes), workers)))


@dataclass
class ConvergenceTable:
    scheme: str
    dt: Array
    rel_error: Array
    eoc: Array
    reference: str = ""

    def rows(self):
        return np.column_stack([self.dt, self.rel_error, self.eoc])

    def to_csv(self, path) -> None:
        _write_rows(Path(path), ["dt", "rel_error", "eoc"], self.rows())


def eoc(dts: Sequence[float], errors: Sequence[float]) -> Array:
    """Observed orders ``log(e_{i-1}/e_i) / log(dt_{i-1}/dt_i)``; NaN in the first row.

    For halved steps this is ``log2(e_{i-1}/e_i)``.
    """
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    out = np.full(dts.size, np.nan)
    for i in range(1, dts.size):
        out[i] = math.log(errors[i - 1] / errors[i]) / math.log(dts[i - 1] / dts[i])
    return out


def relative_snapshot_error(X: Array, Xref: Array) -> float:
    """``|X - Xref|_F / |Xref|_F`` for snapshot matrices of equal shape."""
    return float(np.linalg.norm(X - Xref) / np.linalg.norm(Xref))


def _stride(dt, dt_ref, what):
    ratio = dt / dt_ref
    k = int(round(ratio))
    if k < 1 or abs(k - ratio) > 1e-9 * ratio:
        raise ValueError(f"{what} dt={dt!r} is not an integer multiple of dt_ref={dt_ref!r}")
    return k


def run_convergence(model: ModelSpec, schemes: Sequence[str], dt_list: Sequence[float],
                    reference: Optional[SchemeConfig] = None, dt_ref: Optional[float] = None,
                    t_end: float = 1.0, newton: Optional[NewtonSettings] = None,
                    workers: int = 1, return_reference: bool = False):
    """Relative errors against a fine reference solution and observed orders.

    Errors are Frobenius norms of snapshot differences taken at the nodes of
    each coarse grid, relative to the reference snapshots at those nodes.

    Raises
    ------
    ValueError
        If a step does not divide ``t_end`` or is not a multiple of ``dt_ref``.
    """
    newton = newton or NewtonSettings()
    dts = sorted((float(d) for d in dt_list), reverse=True)
    if len(set(dts)) != len(dts):
        raise ValueError("dt_list contains duplicates")
    reference = reference or SchemeConfig("radau5", newton)
    dt_ref = dts[-1] / 8 if dt_ref is None else float(dt_ref)
    if dt_ref > dts[-1] / 4 * (1 + 1e-12):
        raise ValueError("dt_ref must be at most min(dt_list) / 4")
    strides = [_stride(d, dt_ref, "step") for d in dts]
    grids = [TimeGrid.uniform(t_end, d) for d in dts]
    ref_grid = TimeGrid.uniform(t_end, dt_ref)

    ref = integrate(model.system, reference, ref_grid, model.input, model.x0)

    def one(job):
        scheme, i = job
        traj = integrate(model.system, SchemeConfig(scheme, newton), grids[i], model.input, model.x0)
        snap = ref.states[::strides[i]]
        return job, relative_snapshot_error(traj.states, snap)

    jobs = [(s, i) for s in schemes for i in range(len(dts))]
    errs = dict(_map(one, jobs, workers))
    desc = f"{reference.scheme} dt_ref={dt_ref!r}"
    tables = {}
    for s in sorted(schemes):
        e = np.array([errs[(s, i)] for i in range(len(dts))])
        tables[s] = ConvergenceTable(s, np.array(dts), e, eoc(dts, e), desc)
    if return_reference:
        return tables, ref
    return tables


def halving_dts(dt_max: float = 0.1, levels: int = 10) -> List[float]:
    return [dt_max / 2 ** i for i in range(levels)]


def write_manifest(path, model: ModelSpec, schemes, newton: NewtonSettings, grid: dict,
                   seed, wall_time_s: float, **extra) -> None:
    manifest = {
        "model": model.name,
        "params": model.params,
        "scheme": list(schemes),
        "newton": {k: getattr(newton, k) for k in
                   ("tol_residual", "tol_step", "max_iter", "fd_jacobian_h", "damping", "polish")},
        "grid": grid,
        "seed": seed,
        "wall_time_s": wall_time_s,
        "versions": {"phdgp": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
    }
    manifest.update(extra)
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0

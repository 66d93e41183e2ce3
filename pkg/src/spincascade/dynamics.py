"""Time evolution under stage generators plus closed-form reference solutions.

Propagation is spectral: the generator is diagonalized once per trajectory,
eigenvalues certified as null are pinned to exactly zero (trace preservation
guarantees a structural zero in exact arithmetic), and each state is then
projected back to the Hermitian unit-trace manifold.  The projection removes
pure floating-point residue; its raw magnitude is gated against a roundoff
budget so a genuinely broken generator still raises, and positivity is never
adjusted, only checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig as _dense_eig
from scipy.linalg import expm as _dense_expm

from .errors import ArgumentError, NoRelaxationError, NumericalIntegrityError
from .liouville import SuperOperator, devectorize, vectorize
from .model import PhysicalParams, predicted_timescales

_RAW_RESIDUE_BUDGET = 1e-6
_MIN_EIG_FLOOR = -1e-10
_PIN_TOL = 1e-11
_EIG_RESIDUAL_TOL = 1e-9
_EIG_COND_LIMIT = 1e8


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times, tagged linear or logarithmic."""

    points: np.ndarray
    spacing: str = "linear"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 1:
            raise ArgumentError("TimeGrid needs a 1-d array of at least one time")
        if np.any(~np.isfinite(pts)):
            raise ArgumentError("TimeGrid points must be finite")
        if np.any(pts < 0):
            raise ArgumentError("TimeGrid points must be >= 0")
        if pts.size > 1 and np.any(np.diff(pts) <= 0):
            raise ArgumentError("TimeGrid points must be strictly increasing")
        if self.spacing not in ("linear", "logarithmic"):
            raise ArgumentError(f"spacing must be linear or logarithmic, got {self.spacing!r}")
        if self.spacing == "logarithmic" and pts[0] <= 0:
            raise ArgumentError("logarithmic grids need a positive first point")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @classmethod
    def linear(cls, t_min: float, t_max: float, points: int) -> "TimeGrid":
        return cls(np.linspace(t_min, t_max, points), "linear")

    @classmethod
    def logarithmic(cls, t_min: float, t_max: float, points: int) -> "TimeGrid":
        return cls(np.geomspace(t_min, t_max, points), "logarithmic")

    @property
    def span(self) -> tuple:
        return float(self.points[0]), float(self.points[-1])


@dataclass
class Trajectory:
    """States (and, once attached, observables) on a time grid."""

    grid: TimeGrid
    states: list
    observables: list | None = None
    stage: str = "composite"


def default_cascade_grid(p: PhysicalParams, points: int = 2000) -> TimeGrid:
    """Log grid over [1e-7 s, 10 x max(T1, T_alpha)], the full cascade span."""
    ts = predicted_timescales(p)
    horizon = max(t for t in (ts["T1"], ts["T_alpha"]) if not math.isinf(t)) \
        if not (math.isinf(ts["T1"]) and math.isinf(ts["T_alpha"])) else 1.0
    return TimeGrid.logarithmic(1e-7, 10 * horizon, points)


def matrix_exponential(s: SuperOperator, t: float) -> np.ndarray:
    """exp(S t) by scaling-and-squaring Pade approximation."""
    if t < 0:
        raise ArgumentError(f"time must be >= 0, got {t}")
    return _dense_expm(s.matrix * t)


def _check_density_matrix(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ArgumentError(f"density matrix must be 4x4, got {rho.shape}")
    if abs(np.trace(rho) - 1) > 1e-10:
        raise ArgumentError(f"density matrix trace is {np.trace(rho):.12g}, not 1")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise ArgumentError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < _MIN_EIG_FLOOR:
        raise ArgumentError("density matrix has a negative eigenvalue")
    return rho


class _SpectralPropagator:
    """exp(L t) v evaluated in a certified eigenbasis with pinned null modes."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix
        self.norm = np.linalg.norm(matrix, 2)
        self.ok = False
        if self.norm == 0:
            self.w = np.zeros(16, dtype=complex)
            self.v = np.eye(16, dtype=complex)
            self.vinv = np.eye(16, dtype=complex)
            self.ok = True
            return
        w, v = _dense_eig(matrix)
        residual = np.linalg.norm(matrix @ v - v * w, 2) / self.norm
        if residual > _EIG_RESIDUAL_TOL or np.linalg.cond(v) > _EIG_COND_LIMIT:
            return
        w = w.copy()
        w[np.abs(w) < _PIN_TOL * self.norm] = 0.0
        self.w, self.v, self.vinv = w, v, np.linalg.inv(v)
        self.ok = True

    def apply(self, t: float, coeffs: np.ndarray) -> np.ndarray:
        if self.ok:
            return (self.v * np.exp(self.w * t)) @ coeffs
        return _dense_expm(self.matrix * t) @ self._v0

    def prepare(self, v0: np.ndarray) -> np.ndarray:
        if self.ok:
            return self.vinv @ v0
        self._v0 = v0
        return v0


def propagate(s: SuperOperator, rho0: np.ndarray, grid: TimeGrid) -> Trajectory:
    """Evolve rho0 on the grid; states satisfy the density-matrix invariants.

    Raises NumericalIntegrityError (with the first offending time) when the
    raw trace or Hermiticity residue exceeds the roundoff budget or when a
    state develops a negative eigenvalue below the -1e-10 floor.
    """
    rho0 = _check_density_matrix(rho0)
    prop = _SpectralPropagator(s.matrix)
    coeffs = prop.prepare(vectorize(rho0))
    states = []
    for t in grid.points:
        raw = devectorize(prop.apply(float(t), coeffs))
        trace_residue = abs(np.trace(raw) - 1)
        herm_residue = np.abs(raw - raw.conj().T).max()
        if trace_residue > _RAW_RESIDUE_BUDGET or herm_residue > _RAW_RESIDUE_BUDGET:
            raise NumericalIntegrityError(
                f"propagation residue exceeded budget at t = {t:.6e} s "
                f"(trace {trace_residue:.3e}, hermiticity {herm_residue:.3e})",
                t_offending=float(t),
            )
        rho = 0.5 * (raw + raw.conj().T)
        rho = rho / np.trace(rho).real
        min_eig = np.linalg.eigvalsh(rho).min()
        if min_eig < _MIN_EIG_FLOOR:
            raise NumericalIntegrityError(
                f"state lost positivity at t = {t:.6e} s (min eigenvalue {min_eig:.3e})",
                t_offending=float(t),
            )
        states.append(rho)
    return Trajectory(grid=grid, states=states, stage=s.stage)


def analytic_mzz_pre(p: PhysicalParams, t, mzz0: float):
    """Closed-form early-stage M_zz: damped oscillation at kappa1 settling on
    the first plateau.  Normalized so the t = 0 value is mzz0."""
    ts = predicted_timescales(p)
    kappa1 = ts["kappa1"]
    if kappa1 == 0:
        return mzz0 * np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else mzz0
    ratio = 2 * p.omega1**2 / kappa1**2
    damping = kappa1**2 * p.tau_c
    t = np.asarray(t, dtype=float)
    out = mzz0 * (1 - ratio * (1 - np.cos(kappa1 * t) * np.exp(-t * damping)))
    return out if out.ndim else float(out)


def analytic_mzz_constrained(p: PhysicalParams, t, mzz0: float):
    """Closed-form constrained-stage M_zz: relaxation onto the equipartition
    plateau mzz0/3 at rate 1/T_alpha, riding on the early-stage solution."""
    ts = predicted_timescales(p)
    t = np.asarray(t, dtype=float)
    decay = np.exp(-t / ts["T_alpha"]) if not math.isinf(ts["T_alpha"]) else np.ones_like(t)
    pre = analytic_mzz_pre(p, t, mzz0)
    out = mzz0 / 3 - decay * (mzz0 / 3 - pre)
    return out if out.ndim else float(out)


def steady_state_sl(p: PhysicalParams) -> dict:
    """Closed-form fixed point of the lattice pumping channels alone."""
    total = p.p_plus + p.p_minus
    if total <= 0:
        raise NoRelaxationError("p_plus + p_minus must be > 0 for a pumped steady state")
    mz = (p.p_minus - p.p_plus) / total
    return {"M_z": mz, "M_zz": mz * mz / 4, "T1": 1.0 / total}

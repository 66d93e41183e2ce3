"""Observables and their dynamics: extraction from states, quasi-conserved
quantity tracking, equation-of-motion coefficient extraction, plateau
detection, decay-rate fitting, and the omega0*tau_c contour sweep.

Observable convention: expectation values. M_i = Tr[rho (I_i x 1 + 1 x I_i)],
M_ii = Tr[rho I_i x I_i], M_ij = Tr[rho (I_i x I_j + I_j x I_i)] for i != j.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .dynamics import TimeGrid, Trajectory, propagate
from .errors import ArgumentError, FitQualityError, ModelError, ResolutionError
from .liouville import SuperOperator, build_total, devectorize, vectorize
from .model import PhysicalParams
from .spinops import hs_inner, operator_basis, pauli_component

OBSERVABLE_NAMES = ("M_x", "M_y", "M_z", "M_xx", "M_yy", "M_zz",
                    "M_xy", "M_yz", "M_xz")
DERIVED_NAMES = ("prethermal_order", "dipolar_order", "transverse_pair")

DEFAULT_FLATNESS_TOL = 0.02
DEFAULT_MIN_DECADES = 0.5


@dataclass(frozen=True)
class ObservableSet:
    """Expectation values of the nine spin observables plus the trace."""

    M_x: float
    M_y: float
    M_z: float
    M_xx: float
    M_yy: float
    M_zz: float
    M_xy: float
    M_yz: float
    M_xz: float
    trace: float


@dataclass(frozen=True)
class QuasiConservedReport:
    """Windowed series of the four tracked combinations and their drifts."""

    prethermal_order: np.ndarray
    dipolar_order: np.ndarray
    m_xx: np.ndarray
    transverse_pair: np.ndarray
    drift: dict


@dataclass(frozen=True)
class PlateauReport:
    plateaus: list
    time_ordered: bool


def _observable_operators():
    comp = {ax: {i: pauli_component(ax, i).matrix for i in (1, 2)} for ax in "xyz"}
    ops = {}
    for ax in "xyz":
        ops[f"M_{ax}"] = comp[ax][1] + comp[ax][2]
        ops[f"M_{ax}{ax}"] = comp[ax][1] @ comp[ax][2]
    for a, b in (("x", "y"), ("y", "z"), ("x", "z")):
        ops[f"M_{a}{b}"] = comp[a][1] @ comp[b][2] + comp[b][1] @ comp[a][2]
    return ops


_M_OPS = _observable_operators()


def observables_from_rho(rho: np.ndarray) -> ObservableSet:
    """The nine spin-pair observables plus trace for one density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ArgumentError(f"density matrix must be 4x4, got {rho.shape}")
    tr = np.trace(rho)
    if abs(tr - 1) > 1e-10:
        raise ArgumentError(f"density matrix trace is {tr:.12g}, not 1")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise ArgumentError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-10:
        raise ArgumentError("density matrix has a negative eigenvalue")
    values = {}
    for name, op in _M_OPS.items():
        v = np.trace(rho @ op)
        if abs(v.imag) > 1e-10:
            raise ModelError(f"{name} expectation has imaginary residue {v.imag:.3e}")
        values[name] = float(v.real)
    return ObservableSet(trace=float(tr.real), **values)


def attach_observables(traj: Trajectory) -> Trajectory:
    """Fill traj.observables (idempotent); returns the same trajectory."""
    if traj.observables is None:
        traj.observables = [observables_from_rho(r) for r in traj.states]
    return traj


def observable_series(traj: Trajectory, name: str, p: PhysicalParams | None = None) -> np.ndarray:
    """Values of a named observable (or derived combination) on the grid."""
    attach_observables(traj)
    obs = traj.observables
    if name in OBSERVABLE_NAMES or name == "trace":
        return np.array([getattr(o, name) for o in obs])
    if name == "dipolar_order":
        return np.array([o.M_xx + o.M_yy + o.M_zz for o in obs])
    if name == "transverse_pair":
        return np.array([o.M_yy + o.M_zz for o in obs])
    if name == "prethermal_order":
        if p is None:
            raise ArgumentError("prethermal_order needs the physical parameters")
        wd0 = p.coupling(0).real
        return np.array([3 * wd0 * o.M_zz + p.omega1 * o.M_x for o in obs])
    raise ArgumentError(f"unknown observable {name!r}")


def quasi_conserved(traj: Trajectory, p: PhysicalParams, window) -> QuasiConservedReport:
    """Track the four quasi-conserved combinations over a time window.

    drift = (max - min) / max(|mean|, 1e-12), one entry per combination.
    """
    t_lo, t_hi = float(window[0]), float(window[1])
    mask = (traj.grid.points >= t_lo) & (traj.grid.points <= t_hi)
    if not mask.any():
        raise ArgumentError(f"window [{t_lo:g}, {t_hi:g}] contains no grid points")
    series = {
        "prethermal_order": observable_series(traj, "prethermal_order", p)[mask],
        "dipolar_order": observable_series(traj, "dipolar_order")[mask],
        "m_xx": observable_series(traj, "M_xx")[mask],
        "transverse_pair": observable_series(traj, "transverse_pair")[mask],
    }
    drift = {
        key: float((vals.max() - vals.min()) / max(abs(vals.mean()), 1e-12))
        for key, vals in series.items()
    }
    return QuasiConservedReport(
        prethermal_order=series["prethermal_order"],
        dipolar_order=series["dipolar_order"],
        m_xx=series["m_xx"],
        transverse_pair=series["transverse_pair"],
        drift=drift,
    )


def eom_coefficients(s: SuperOperator) -> np.ndarray:
    """16x16 structure matrix of d<E_a>/dt = sum_b K[a,b] <E_b> over the
    product basis {I_alpha x I_beta}, Hilbert-Schmidt normalized."""
    basis = operator_basis()
    adjoint = s.matrix.conj().T
    k = np.zeros((16, 16))
    for a, ea in enumerate(basis):
        q = devectorize(adjoint @ vectorize(ea.matrix))
        for b, eb in enumerate(basis):
            coeff = np.trace(eb.matrix.conj().T @ q) / hs_inner(eb, eb)
            k[a, b] = coeff.real
    return k


_AXES = ("x", "y", "z", "d")


def _basis_index(a1: str, a2: str) -> int:
    return 4 * _AXES.index(a1) + _AXES.index(a2)


def eom_m_rows(s: SuperOperator) -> dict:
    """Equations of motion in the nine M observables.

    Returns {target: {source: coefficient, ..., "const": c}}; raises
    ModelError when a generator's spin-exchange asymmetry prevents the
    reduction (the paired single-spin coefficients must agree).
    """
    k = eom_coefficients(s)
    tol = 1e-9 * max(s.norm, 1.0)

    rows_of = {}
    for ax in "xyz":
        rows_of[f"M_{ax}"] = [_basis_index(ax, "d"), _basis_index("d", ax)]
        rows_of[f"M_{ax}{ax}"] = [_basis_index(ax, ax)]
    for a, b in (("x", "y"), ("y", "z"), ("x", "z")):
        rows_of[f"M_{a}{b}"] = [_basis_index(a, b), _basis_index(b, a)]

    out = {}
    for target, rows in rows_of.items():
        row = k[rows[0]].copy()
        for extra in rows[1:]:
            row = row + k[extra]
        coeffs = {}
        for source, cols in rows_of.items():
            vals = [row[c] for c in cols]
            if max(vals) - min(vals) > tol:
                raise ModelError(
                    f"cannot reduce d{target}/dt to M variables: coefficient "
                    f"split {vals} on {source}"
                )
            coeffs[source] = vals[0]
        coeffs["const"] = row[_basis_index("d", "d")]
        out[target] = coeffs
    return out


def detect_plateaus(traj: Trajectory, observable: str,
                    flatness_tol: float = DEFAULT_FLATNESS_TOL,
                    min_decades: float = DEFAULT_MIN_DECADES,
                    p: PhysicalParams | None = None) -> PlateauReport:
    """Maximal flat runs of the observable in log time.

    A plateau is a run where |d(obs)/d(log t)| < flatness_tol * dynamic range,
    at least min_decades long; its level is the run mean.
    """
    if traj.grid.spacing != "logarithmic":
        raise ArgumentError("plateau detection needs a logarithmic grid")
    t = traj.grid.points
    decades = np.log10(t[-1] / t[0])
    if decades <= 0 or (t.size - 1) / decades < 10:
        raise ResolutionError(
            f"grid has {(t.size - 1) / max(decades, 1e-300):.1f} points/decade; "
            "need at least 10"
        )
    v = observable_series(traj, observable, p)
    dyn_range = v.max() - v.min()
    if dyn_range < 1e-12 * max(1.0, abs(v.mean())):
        plateaus = [{"t_start": float(t[0]), "t_end": float(t[-1]),
                     "level": float(v.mean())}]
        return PlateauReport(plateaus=plateaus, time_ordered=True)
    flat = np.abs(np.gradient(v, np.log(t))) < flatness_tol * dyn_range
    plateaus = []
    i = 0
    while i < flat.size:
        if not flat[i]:
            i += 1
            continue
        j = i
        while j + 1 < flat.size and flat[j + 1]:
            j += 1
        if np.log10(t[j] / t[i]) >= min_decades:
            plateaus.append({"t_start": float(t[i]), "t_end": float(t[j]),
                             "level": float(v[i:j + 1].mean())})
        i = j + 1
    return PlateauReport(plateaus=plateaus, time_ordered=True)


def fit_decay(traj: Trajectory, observable: str, window,
              p: PhysicalParams | None = None) -> float:
    """Exponential decay rate: least-squares slope of log(value - asymptote)
    against t inside the window, asymptote taken from the trajectory tail."""
    t = traj.grid.points
    v = observable_series(traj, observable, p)
    asymptote = v[-1]
    t_lo, t_hi = float(window[0]), float(window[1])
    mask = (t >= t_lo) & (t <= t_hi)
    if mask.sum() < 3:
        raise ArgumentError("fit window holds fewer than 3 grid points")
    y = v[mask] - asymptote
    if np.any(y <= 0):
        raise FitQualityError(
            f"{int((y <= 0).sum())} window values are not positive after "
            "subtracting the tail asymptote"
        )
    rises = np.diff(y) > 1e-12 * y.max()
    if rises.any():
        raise FitQualityError(
            f"window is not monotone: {int(rises.sum())} rising steps, "
            f"largest {np.diff(y).max():.3e}"
        )
    slope = np.polyfit(t[mask], np.log(y), 1)[0]
    return float(-slope)


def contour_sweep(p: PhysicalParams, omega0tau_values, grid: TimeGrid,
                  observable: str = "M_zz") -> np.ndarray:
    """Observable values under the driven+fluctuation generator from
    |11><11|, one row per omega0*tau_c (tau_c swept at fixed omega0)."""
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[3, 3] = 1.0
    rows = []
    for value in omega0tau_values:
        if value <= 0:
            raise ArgumentError(f"omega0*tau_c values must be > 0, got {value}")
        swept = dataclasses.replace(p, tau_c=float(value) / p.omega0)
        traj = propagate(build_total(swept, "sec+ns"), rho0, grid)
        rows.append(observable_series(traj, observable, swept))
    return np.array(rows)

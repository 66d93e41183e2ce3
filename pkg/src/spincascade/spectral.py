"""Eigen-analysis of the stage generators.

Full spectra with residual certification, null spaces, physical steady states,
dark-state tests, and the omega0*tau_c scan that separates the two slow decay
modes from the fast block.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ArgumentError, DegeneracyError, EigenSolverError
from .liouville import SuperOperator, build_total, vectorize, devectorize
from .model import PhysicalParams

DEFAULT_ZERO_MODE_TOL = 1e-8
_RESIDUAL_TOL = 1e-9


def certified_spectrum(s: SuperOperator):
    """Eigenvalues with per-pair residuals ||S v - lambda v||, residual-gated.

    Deterministic order: ascending |Re|, then Im, then Re.
    """
    try:
        w, v = scipy.linalg.eig(s.matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails at 16x16
        raise EigenSolverError(f"eigen decomposition did not converge: {exc}") from exc
    norms = np.linalg.norm(v, axis=0)
    residuals = np.linalg.norm(s.matrix @ v - v * w, axis=0) / np.where(norms > 0, norms, 1.0)
    scale = max(s.norm, 1e-300)
    if residuals.max() > _RESIDUAL_TOL * scale:
        raise EigenSolverError(
            f"eigenpair residual {residuals.max():.3e} exceeds "
            f"{_RESIDUAL_TOL:.0e} * |S| = {_RESIDUAL_TOL * scale:.3e}"
        )
    order = np.lexsort((w.real, w.imag, np.abs(w.real)))
    return w[order], residuals[order]


def eigenvalues(s: SuperOperator) -> np.ndarray:
    """The 16 complex eigenvalues, residual-certified."""
    w, _ = certified_spectrum(s)
    return w


def null_space(s: SuperOperator, tol: float = DEFAULT_ZERO_MODE_TOL) -> dict:
    """Right null space at threshold tol*|S|: dimension and an orthonormal
    (Hilbert-Schmidt) basis of 4x4 matrices."""
    if tol <= 0:
        raise ArgumentError(f"tol must be > 0, got {tol}")
    _, sv, vh = np.linalg.svd(s.matrix)
    threshold = tol * max(s.norm, 1e-300)
    keep = sv < threshold
    basis = [devectorize(vh[i].conj()) for i in np.nonzero(keep)[0]]
    return {"dimension": int(keep.sum()), "basis": basis}


def _hermitian_null_basis(basis):
    # the kernel is closed under dagger, so it has a real basis of Hermitian
    # matrices; build one from the (anti)symmetrized parts via their Gram matrix
    cands = []
    for b in basis:
        cands.append(0.5 * (b + b.conj().T))
        cands.append(0.5j * (b - b.conj().T))
    flat = np.array([c.reshape(-1) for c in cands])
    gram = (flat @ flat.conj().T).real
    vals, vecs = np.linalg.eigh(gram)
    out = []
    for k in range(len(vals) - 1, -1, -1):
        if vals[k] <= 1e-20 * max(vals[-1], 1e-300):
            break
        h = sum(vecs[i, k] * cands[i] for i in range(len(cands)))
        out.append(h / np.linalg.norm(h))
    return out[: len(basis)]


def steady_states(s: SuperOperator, tol: float = DEFAULT_ZERO_MODE_TOL):
    """Physical (Hermitian, unit-trace, PSD) representatives of the null space.

    Returns one state per null dimension; raises DegeneracyError when the null
    space holds no physical state.
    """
    ns = null_space(s, tol)
    if ns["dimension"] == 0:
        raise DegeneracyError("null space is empty at the given tolerance")
    herm = _hermitian_null_basis(ns["basis"])
    if not herm:
        raise DegeneracyError("null space contains no Hermitian directions")

    # anchor: kernel projection of the maximally mixed state
    anchor = sum(h * (np.trace(h).real / 4) for h in herm)
    tr = np.trace(anchor).real
    if abs(tr) < 1e-12 or np.linalg.eigvalsh(anchor / tr).min() < -1e-10:
        anchor = None
        for h in herm:
            t = np.trace(h).real
            if abs(t) > 1e-12 and np.linalg.eigvalsh(h / t).min() >= -1e-10:
                anchor = h / t
                break
        if anchor is None:
            raise DegeneracyError("no positive unit-trace state in the null space")
    else:
        anchor = anchor / tr

    states = [anchor]
    for h in herm:
        g = h - np.trace(h).real * anchor
        if np.linalg.norm(g) < 1e-10:
            continue
        hi = np.linalg.norm(anchor) / np.linalg.norm(g)
        while np.linalg.eigvalsh(anchor + hi * g).min() >= 0:
            hi *= 2  # g is traceless, so a large enough admixture breaks positivity
        lo = 0.0
        for _ in range(60):  # largest admixture keeping the state positive
            mid = 0.5 * (lo + hi)
            if np.linalg.eigvalsh(anchor + mid * g).min() >= 0:
                lo = mid
            else:
                hi = mid
        if lo > 0:
            states.append(anchor + 0.9 * lo * g)
        if len(states) == ns["dimension"]:
            break
    return states


def is_dark_state(s: SuperOperator, psi: np.ndarray, tol: float = 1e-10) -> bool:
    """True when |psi><psi| is stationary: ||S vec(P_psi)|| < tol*|S|."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (4,):
        raise ArgumentError(f"psi must have 4 components, got {psi.shape}")
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ArgumentError("psi must be normalized")
    if s.norm == 0:
        return True
    proj = np.outer(psi, psi.conj())
    return bool(np.linalg.norm(s.matrix @ vectorize(proj)) < tol * s.norm)


@dataclass(frozen=True)
class SpectralReport:
    """Spectrum summary: eigenvalues, null data, decay moduli, slow/fast gap."""

    eigenvalues: np.ndarray
    null_dim: int
    null_basis: list
    sorted_decay_moduli: np.ndarray
    slow_fast_gap: float


def spectral_report(s: SuperOperator, tol: float = DEFAULT_ZERO_MODE_TOL) -> SpectralReport:
    w, _ = certified_spectrum(s)
    scale = max(s.norm, 1e-300)
    null_mask = np.abs(w) < tol * scale
    ns = null_space(s, tol)
    moduli = np.sort(np.abs(w.real))
    nonzero = np.sort(np.abs(w[~null_mask].real))
    gap = float(nonzero[2] / nonzero[1]) if nonzero.size >= 3 and nonzero[1] > 0 else math.inf
    return SpectralReport(
        eigenvalues=w,
        null_dim=int(null_mask.sum()),
        null_basis=ns["basis"],
        sorted_decay_moduli=moduli,
        slow_fast_gap=gap,
    )


def gap_scan(p: PhysicalParams, omega0tau_values, tol: float = DEFAULT_ZERO_MODE_TOL):
    """Decay moduli of the driven+fluctuation generator versus omega0*tau_c.

    tau_c is the swept knob (omega0 stays at its configured value). Each row
    discards the two structural zero modes and reports the remaining 14 decay
    moduli ascending, plus the slow/fast gap.
    """
    rows = []
    for value in omega0tau_values:
        if value <= 0:
            raise ArgumentError(f"omega0*tau_c values must be > 0, got {value}")
        swept = dataclasses.replace(p, tau_c=value / p.omega0)
        report = spectral_report(build_total(swept, "sec+ns"), tol)
        order = np.argsort(np.abs(report.eigenvalues))
        kept = report.eigenvalues[order][2:]
        rows.append({
            "omega0tau": float(value),
            "moduli": np.sort(np.abs(kept.real)),
            "slow_fast_gap": report.slow_fast_gap,
        })
    return rows

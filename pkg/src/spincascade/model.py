"""Physical parameters, secular Hamiltonian, kernel weights, rates, timescales.

All frequencies are stored in angular units (rad/s); times in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar, mu_0

from .errors import ArgumentError, ModelError
from .spinops import SpinOperator, dipolar_tensor, pauli_component

_PAIRING_TOL = 1e-12


@dataclass(frozen=True)
class PhysicalParams:
    """Model instance: drive, Zeeman, dipolar couplings, bath rates.

    omega_d holds the five complex couplings for m = -2..2 (index m + 2).
    When built from geometry or from magnitudes they satisfy the reality
    pairing omega_d[-m] = (-1)^m conj(omega_d[m]); direct entry that breaks
    the pairing is rejected.
    """

    omega1: float
    omega0: float
    omega_d: tuple = (0j, 0j, 0j, 0j, 0j)
    tau_c: float = 1e-6
    p_plus: float = 0.0
    p_minus: float = 0.0
    include_shifts: bool = False

    def __post_init__(self):
        if self.omega1 < 0:
            raise ModelError(f"omega1 must be >= 0, got {self.omega1}")
        if self.omega0 <= 0:
            raise ModelError(f"omega0 must be > 0, got {self.omega0}")
        if self.tau_c <= 0:
            raise ModelError(f"tau_c must be > 0, got {self.tau_c}")
        if self.p_plus < 0 or self.p_minus < 0:
            raise ModelError("transition rates p_plus, p_minus must be >= 0")
        wd = tuple(complex(w) for w in self.omega_d)
        if len(wd) != 5:
            raise ModelError(f"omega_d needs five entries for m = -2..2, got {len(wd)}")
        scale = max(abs(w) for w in wd) or 1.0
        for m in (1, 2):
            expected = (-1) ** m * wd[m + 2].conjugate()
            if abs(wd[-m + 2] - expected) > _PAIRING_TOL * scale:
                raise ModelError(
                    f"omega_d pairing broken at m = {m}: "
                    f"omega_d[{-m}] must equal (-1)^{m} conj(omega_d[{m}])"
                )
        object.__setattr__(self, "omega_d", wd)

    @classmethod
    def from_magnitudes(cls, omega1, omega0, omega_d_mag, tau_c,
                        p_plus=0.0, p_minus=0.0, include_shifts=False):
        """Build from nonnegative coupling magnitudes |omega_d_m|.

        omega_d_mag is a scalar (applied to all m) or five values for
        m = -2..2.  Phases are fixed to the real convention that satisfies
        the pairing: a sign flip on m = -1.
        """
        if np.isscalar(omega_d_mag):
            mags = [float(omega_d_mag)] * 5
        else:
            mags = [float(v) for v in omega_d_mag]
            if len(mags) != 5:
                raise ModelError(f"omega_d_mag needs 1 or 5 values, got {len(mags)}")
        if any(v < 0 for v in mags):
            raise ModelError("coupling magnitudes must be >= 0")
        signs = [1.0, -1.0, 1.0, 1.0, 1.0]
        wd = tuple(complex(s * v) for s, v in zip(signs, mags))
        return cls(omega1, omega0, wd, tau_c, p_plus, p_minus, include_shifts)

    def coupling(self, m: int) -> complex:
        if abs(m) > 2:
            raise ArgumentError(f"dipolar order m must be in [-2, 2], got {m}")
        return self.omega_d[m + 2]


@dataclass(frozen=True)
class GeometryParams:
    """Dipolar pair geometry: gyromagnetic ratio, distance, orientation."""

    gamma: float
    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if self.r <= 0:
            raise ArgumentError(f"inter-spin distance r must be > 0, got {self.r}")
        if not 0 <= self.theta <= math.pi:
            raise ArgumentError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0 <= self.phi < 2 * math.pi:
            raise ArgumentError(f"phi must lie in [0, 2 pi), got {self.phi}")


def _sph_harm_2(m: int, theta: float, phi: float) -> complex:
    """Closed-form rank-2 spherical harmonics, Condon-Shortley phases."""
    ct, st = math.cos(theta), math.sin(theta)
    if m == 0:
        return 0.25 * math.sqrt(5 / math.pi) * (3 * ct * ct - 1)
    phase = complex(math.cos(m * phi), math.sin(m * phi))
    if abs(m) == 1:
        amp = -math.copysign(1.0, m) * 0.5 * math.sqrt(15 / (2 * math.pi)) * st * ct
    else:
        amp = 0.25 * math.sqrt(15 / (2 * math.pi)) * st * st
    return amp * phase


def dipolar_couplings_from_geometry(g: GeometryParams) -> tuple:
    """Five complex couplings for m = -2..2 from the pair geometry.

    omega_d_m = (mu0 hbar gamma^2 / 4 pi r^3) Y_2^{-m}(theta, phi).
    """
    prefactor = mu_0 * hbar * g.gamma**2 / (4 * math.pi * g.r**3)
    return tuple(prefactor * _sph_harm_2(-m, g.theta, g.phi) for m in range(-2, 3))


def secular_hamiltonian(p: PhysicalParams) -> SpinOperator:
    """Drive plus secular dipolar term: omega1 (Ix1 + Ix2) + omega_d0 U_0."""
    wd0 = p.coupling(0)
    if abs(wd0.imag) > 1e-12 * max(abs(wd0), 1e-300):
        raise ModelError(f"secular dipolar coupling must be real, got {wd0}")
    ix = pauli_component("x", 1).matrix + pauli_component("x", 2).matrix
    mat = p.omega1 * ix + wd0.real * dipolar_tensor(0).matrix
    return SpinOperator(mat, "Hsec")


def kernel_weight(m: int, p: PhysicalParams) -> float:
    """Lorentzian kernel weight Z(m) = tau_c / (1 + (m omega0 tau_c)^2)."""
    x = m * p.omega0 * p.tau_c
    return p.tau_c / (1 + x * x)


def rates(p: PhysicalParams) -> dict:
    """Second-order rates: q1 = omega1^2 Z(2), p_m = |omega_d_m|^2 Z(m)."""
    return {
        "q1": p.omega1**2 * kernel_weight(2, p),
        "p1": abs(p.coupling(1)) ** 2 * kernel_weight(1, p),
        "p2": abs(p.coupling(2)) ** 2 * kernel_weight(2, p),
    }


def predicted_timescales(p: PhysicalParams) -> dict:
    """kappa1 and the three stage timescales T_pre, T_alpha, T1.

    Vanishing denominators give math.inf, not an error.
    """
    wd0 = p.coupling(0).real
    kappa1 = math.sqrt(4 * p.omega1**2 + 2.25 * wd0 * wd0)
    t_pre = 1.0 / (p.tau_c * kappa1**2) if kappa1 > 0 else math.inf
    r = rates(p)
    alpha_rate = 3 * (r["p1"] + 4 * r["q1"])
    t_alpha = 1.0 / alpha_rate if alpha_rate > 0 else math.inf
    total_p = p.p_plus + p.p_minus
    t1 = 1.0 / total_p if total_p > 0 else math.inf
    return {"kappa1": kappa1, "T_pre": t_pre, "T_alpha": t_alpha, "T1": t1}


def reference_params(p_plus: float = 0.0, p_minus: float = 0.0,
                     include_shifts: bool = False) -> PhysicalParams:
    """The reference working point: 2 pi x 5 kHz drive and couplings,
    2 pi x 10 MHz Zeeman, 1 us correlation time."""
    return PhysicalParams.from_magnitudes(
        omega1=2 * math.pi * 5e3,
        omega0=2 * math.pi * 1e7,
        omega_d_mag=2 * math.pi * 5e3,
        tau_c=1e-6,
        p_plus=p_plus,
        p_minus=p_minus,
        include_shifts=include_shifts,
    )

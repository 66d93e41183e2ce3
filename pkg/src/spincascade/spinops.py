"""Exact operator algebra for two spin-1/2 particles.

Basis convention used everywhere in this package: product basis
{|00>, |01>, |10>, |11>} with |0> the +z eigenstate ("spin up").
All operators are dense 4x4 complex matrices wrapped in SpinOperator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

_SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_EYE2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpinOperator:
    """A 4x4 complex matrix on the two-spin Hilbert space."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ArgumentError(f"SpinOperator needs a 4x4 matrix, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise ArgumentError("SpinOperator entries must be finite")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


def pauli_component(axis: str, spin_index: int) -> SpinOperator:
    """sigma_axis/2 on one spin slot, identity on the other.

    Axis "d" places the 2x2 identity instead of a Pauli half.
    """
    if axis not in ("x", "y", "z", "d"):
        raise ArgumentError(f"axis must be one of x, y, z, d, got {axis!r}")
    if spin_index not in (1, 2):
        raise ArgumentError(f"spin_index must be 1 or 2, got {spin_index!r}")
    local = _EYE2 if axis == "d" else 0.5 * _SIGMA[axis]
    mat = np.kron(local, _EYE2) if spin_index == 1 else np.kron(_EYE2, local)
    return SpinOperator(mat, f"I{axis}{spin_index}")


def raising(spin_index: int) -> SpinOperator:
    """I_+ = I_x + i I_y on the given spin (maps |1> to |0>)."""
    ix = pauli_component("x", spin_index).matrix
    iy = pauli_component("y", spin_index).matrix
    return SpinOperator(ix + 1j * iy, f"I+{spin_index}")


def lowering(spin_index: int) -> SpinOperator:
    """I_- = I_x - i I_y on the given spin (maps |0> to |1>)."""
    ix = pauli_component("x", spin_index).matrix
    iy = pauli_component("y", spin_index).matrix
    return SpinOperator(ix - 1j * iy, f"I-{spin_index}")


def _pair(axis: str) -> np.ndarray:
    return pauli_component(axis, 1).matrix @ pauli_component(axis, 2).matrix


def spherical_tensor(order: int) -> SpinOperator:
    """Rank-2 irreducible spherical tensor T_2^m (Clebsch-Gordan normalization).

    Convention: T_2^0 = (1/sqrt6)(3 Iz1 Iz2 - I1.I2),
    T_2^{+-1} = -+(1/2)(I_{+-}1 Iz2 + Iz1 I_{+-}2), T_2^{+-2} = (1/2) I_{+-}1 I_{+-}2.
    """
    if order not in (-2, -1, 0, 1, 2):
        raise ArgumentError(f"spherical tensor order must be in [-2, 2], got {order!r}")
    iz1 = pauli_component("z", 1).matrix
    iz2 = pauli_component("z", 2).matrix
    if order == 0:
        dot = _pair("x") + _pair("y") + _pair("z")
        mat = (3.0 * iz1 @ iz2 - dot) / np.sqrt(6.0)
    elif abs(order) == 1:
        lad = raising(1).matrix if order > 0 else lowering(1).matrix
        lad2 = raising(2).matrix if order > 0 else lowering(2).matrix
        mat = -np.sign(order) * 0.5 * (lad @ iz2 + iz1 @ lad2)
    else:
        lad = raising(1).matrix if order > 0 else lowering(1).matrix
        lad2 = raising(2).matrix if order > 0 else lowering(2).matrix
        mat = 0.5 * lad @ lad2
    return SpinOperator(mat, f"T2m{order:+d}")


def dipolar_tensor(order: int) -> SpinOperator:
    """Rank-2 tensor rescaled so the dipolar couplings multiply it directly.

    Same ladder structure as spherical_tensor but with the coupling-constant
    normalization: sqrt(6) x T_2^0 for m = 0, 2 x T_2^m otherwise.  This is
    the family whose coefficients in the Hamiltonian and in the dissipator
    rates are exactly the omega_d couplings.
    """
    t = spherical_tensor(order)
    scale = np.sqrt(6.0) if order == 0 else 2.0
    return SpinOperator(scale * t.matrix, f"U2m{order:+d}")


def commutator(a: SpinOperator, b: SpinOperator) -> SpinOperator:
    m = a.matrix @ b.matrix - b.matrix @ a.matrix
    return SpinOperator(m, f"[{a.label},{b.label}]")


def anticommutator(a: SpinOperator, b: SpinOperator) -> SpinOperator:
    m = a.matrix @ b.matrix + b.matrix @ a.matrix
    return SpinOperator(m, f"{{{a.label},{b.label}}}")


def dagger(a: SpinOperator) -> SpinOperator:
    return SpinOperator(a.matrix.conj().T, f"{a.label}^dag")


def hs_inner(a: SpinOperator, b: SpinOperator) -> complex:
    """Hilbert-Schmidt inner product Tr[A^dag B], conjugate-linear in A."""
    return complex(np.trace(a.matrix.conj().T @ b.matrix))


def operator_basis() -> list[SpinOperator]:
    """The sixteen products I_alpha x I_beta, alpha, beta in {x, y, z, d}."""
    axes = ("x", "y", "z", "d")
    ops = []
    for a1 in axes:
        for a2 in axes:
            m = pauli_component(a1, 1).matrix @ pauli_component(a2, 2).matrix
            ops.append(SpinOperator(m, f"I{a1}.I{a2}"))
    return ops

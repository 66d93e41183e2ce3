"""Stage Liouvillians as dense 16x16 superoperators.

Vectorization is column-stacking throughout: vec(A rho B) = (B^T kron A) vec(rho).
The three stage generators are the coherent/second-order secular part, the
non-secular dissipators, and the lattice pumping channels; build_total sums
any requested combination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ModelError
from .model import PhysicalParams, kernel_weight, rates, secular_hamiltonian
from .spinops import SpinOperator, dagger, dipolar_tensor, lowering, pauli_component, raising

_EYE4 = np.eye(4, dtype=complex)

# Test-harness fault hook: scales the drive-induced dissipator rate q1.
# Production value is 1.0; the validate command's self-check perturbs it.
_D2_RATE_SCALE = 1.0


@dataclass(frozen=True)
class SuperOperator:
    """A 16x16 generator acting on column-stacked density matrices."""

    matrix: np.ndarray
    stage: str = "composite"
    vectorization: str = "column-stacking"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (16, 16):
            raise ArgumentError(f"SuperOperator needs a 16x16 matrix, got {m.shape}")
        if self.stage not in ("sec", "ns", "sl", "composite"):
            raise ArgumentError(f"unknown stage tag {self.stage!r}")
        if self.vectorization != "column-stacking":
            raise ArgumentError("only column-stacking vectorization is supported")
        norm = np.linalg.norm(m, 2)
        if norm > 0:
            left_null = np.abs(vectorize(_EYE4) @ m).max()
            if left_null > 1e-10 * norm:
                raise ModelError(
                    f"generator does not preserve trace: |<<1|L| = {left_null:.3e} "
                    f"exceeds 1e-10 |L| = {1e-10 * norm:.3e}"
                )
            max_re = np.linalg.eigvals(m).real.max()
            if max_re > 1e-10 * norm:
                raise ModelError(
                    f"generator has an unstable mode: max Re eig = {max_re:.3e}"
                )
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stack a 4x4 matrix into a length-16 vector."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ArgumentError(f"vectorize expects a 4x4 matrix, got {rho.shape}")
    return rho.reshape(-1, order="F")


def devectorize(vec: np.ndarray) -> np.ndarray:
    """Inverse of vectorize."""
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (16,):
        raise ArgumentError(f"devectorize expects 16 components, got {vec.shape}")
    return vec.reshape(4, 4, order="F")


def _left_right(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a rho b in column-stacking convention."""
    return np.kron(b.T, a)


def _commutator_matrix(h: np.ndarray) -> np.ndarray:
    return _left_right(h, _EYE4) - _left_right(_EYE4, h)


def _require_hermitian(h: SpinOperator) -> np.ndarray:
    m = h.matrix
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.conj().T).max() > 1e-12 * scale:
        raise ModelError(f"Hamiltonian {h.label or '<unlabeled>'} is not Hermitian")
    return m


def commutator_superop(h: SpinOperator) -> SuperOperator:
    """-i [H, .] as a superoperator; purely imaginary spectrum."""
    m = _require_hermitian(h)
    return SuperOperator(-1j * _commutator_matrix(m))


def double_commutator_dissipator(h: SpinOperator, weight: float) -> SuperOperator:
    """-weight [H, [H, .]]; negative semidefinite on Hermitian inputs."""
    if weight < 0:
        raise ArgumentError(f"weight must be >= 0, got {weight}")
    m = _require_hermitian(h)
    c = _commutator_matrix(m)
    return SuperOperator(-weight * (c @ c))


def sandwich_dissipator(a: SpinOperator, b: SpinOperator, rate: float) -> SuperOperator:
    """rate (2 A rho B - B A rho - rho B A); trace-free derivative for any A, B."""
    if rate < 0:
        raise ArgumentError(f"rate must be >= 0, got {rate}")
    ba = b.matrix @ a.matrix
    m = 2 * _left_right(a.matrix, b.matrix) - _left_right(ba, _EYE4) - _left_right(_EYE4, ba)
    return SuperOperator(rate * m)


def build_L_sec(p: PhysicalParams) -> SuperOperator:
    """Coherent secular generator plus its second-order double commutator."""
    h = secular_hamiltonian(p)
    m = commutator_superop(h).matrix + double_commutator_dissipator(h, p.tau_c).matrix
    return SuperOperator(m, stage="sec")


def build_L_ns(p: PhysicalParams) -> SuperOperator:
    """Non-secular dissipators: dipolar channels plus drive-induced channels.

    Each dipolar order m != 0 contributes a completely positive channel with
    jump operator U_m at rate |omega_d_m|^2 Z(|m|); the drive contributes
    collective raising/lowering channels at rate q1 including cross-spin
    terms.  Optional energy shifts add a commutator with I_z-total.
    """
    m_total = np.zeros((16, 16), dtype=complex)
    for m in (-2, -1, 1, 2):
        jump = dipolar_tensor(m)
        rate = abs(p.coupling(m)) ** 2 * kernel_weight(m, p)
        m_total += sandwich_dissipator(jump, dagger(jump), rate).matrix
    q1 = rates(p)["q1"] * _D2_RATE_SCALE
    ups = [raising(1), raising(2)]
    downs = [lowering(1), lowering(2)]
    for i in range(2):
        for j in range(2):
            m_total += sandwich_dissipator(ups[i], downs[j], q1).matrix
            m_total += sandwich_dissipator(downs[i], ups[j], q1).matrix
    if p.include_shifts:
        iz_tot = SpinOperator(
            pauli_component("z", 1).matrix + pauli_component("z", 2).matrix, "Iz_tot"
        )
        bs = 2 * p.omega1**2 * p.omega0 * p.tau_c * kernel_weight(2, p)
        ds = (
            abs(p.coupling(1)) ** 2 * p.omega0 * p.tau_c * kernel_weight(1, p)
            + 2 * abs(p.coupling(2)) ** 2 * p.omega0 * p.tau_c * kernel_weight(2, p)
        )
        shift = SpinOperator((bs + ds) * iz_tot.matrix, "Hshift")
        m_total += commutator_superop(shift).matrix
    return SuperOperator(m_total, stage="ns")


def build_L_sl(p: PhysicalParams) -> SuperOperator:
    """Lattice pumping channels on each spin.

    The downward-transition rate p_minus drives population into |0> (+z),
    which is the energy ground state in this convention, so its jump
    operator is the matrix-raising I_+; p_plus gets I_-.
    """
    m_total = np.zeros((16, 16), dtype=complex)
    for i in (1, 2):
        up, down = raising(i), lowering(i)
        m_total += sandwich_dissipator(up, down, p.p_minus).matrix
        m_total += sandwich_dissipator(down, up, p.p_plus).matrix
    return SuperOperator(m_total, stage="sl")


_STAGE_PARTS = {
    "sec": ("sec",),
    "sec+ns": ("sec", "ns"),
    "full": ("sec", "ns", "sl"),
}

_BUILDERS = {"sec": build_L_sec, "ns": build_L_ns, "sl": build_L_sl}


def build_total(p: PhysicalParams, stage: str) -> SuperOperator:
    """Sum of the stage generators selected by 'sec', 'sec+ns', or 'full'."""
    if stage not in _STAGE_PARTS:
        raise ArgumentError(
            f"stage must be one of {sorted(_STAGE_PARTS)}, got {stage!r}"
        )
    m = np.zeros((16, 16), dtype=complex)
    for part in _STAGE_PARTS[stage]:
        m = m + _BUILDERS[part](p).matrix
    return SuperOperator(m, stage="composite")


def dump_super(s: SuperOperator) -> str:
    """Plain-text dump: one row per line, entries as 're,im' pairs."""
    lines = []
    for row in s.matrix:
        lines.append(" ".join(f"{z.real:.17e},{z.imag:.17e}" for z in row))
    return "\n".join(lines) + "\n"

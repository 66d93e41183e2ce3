"""Superoperator construction: vectorization identities, GKSL building blocks,
stage generators, and their structural invariants."""

import numpy as np
import pytest

from spincascade.errors import ArgumentError, ModelError
from spincascade.liouville import (
    SuperOperator,
    build_L_ns,
    build_L_sec,
    build_L_sl,
    build_total,
    commutator_superop,
    devectorize,
    double_commutator_dissipator,
    dump_super,
    sandwich_dissipator,
    vectorize,
)
from spincascade.model import PhysicalParams, rates, reference_params
from spincascade.spinops import SpinOperator, lowering, pauli_component, raising


def _rand_herm(rng, n=4):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def _null_dim(matrix, tol_rel=1e-8):
    s = np.linalg.svd(matrix, compute_uv=False)
    return int(np.sum(s < tol_rel * s[0]))


# ---------------------------------------------------------------- vectorization

def test_vectorize_identity_positions():
    v = vectorize(np.eye(4) / 4)
    nz = np.nonzero(np.abs(v) > 0)[0]
    assert list(nz) == [0, 5, 10, 15]
    assert np.allclose(v[nz], 0.25)


def test_vectorize_roundtrip_exact():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.array_equal(devectorize(vectorize(m)), m)


def test_sandwich_identity_random_matrices():
    # vec(A rho B) = (B^T (x) A) vec(rho), the column-stacking identity
    rng = np.random.default_rng(4)
    a, rho, b = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(3))
    lhs = vectorize(a @ rho @ b)
    rhs = np.kron(b.T, a) @ vectorize(rho)
    assert np.allclose(lhs, rhs, atol=1e-13)


def test_vectorize_shape_checked():
    with pytest.raises(ArgumentError):
        vectorize(np.eye(3))
    with pytest.raises(ArgumentError):
        devectorize(np.zeros(15))


# ---------------------------------------------------------------- building blocks

def test_commutator_superop_of_zero():
    s = commutator_superop(SpinOperator(np.zeros((4, 4)), "0"))
    assert np.all(s.matrix == 0)


def test_commutator_superop_annihilates_identity():
    h = SpinOperator(_rand_herm(np.random.default_rng(5)), "H")
    s = commutator_superop(h)
    assert np.abs(s.matrix @ vectorize(np.eye(4) / 4)).max() < 1e-14


def test_commutator_superop_spectrum_is_level_differences():
    """-i[H, .] has eigenvalues -i(h_a - h_b) over all eigenvalue pairs of H."""
    levels = [0.0, 1.0, 3.0, 7.0]
    s = commutator_superop(SpinOperator(np.diag(levels), "H"))
    got = np.sort_complex(np.linalg.eigvals(s.matrix))
    want = np.sort_complex(np.array(
        [-1j * (ha - hb) for ha in levels for hb in levels]))
    assert np.allclose(got, want, atol=1e-12)


def test_commutator_superop_rejects_nonhermitian():
    bad = np.zeros((4, 4), dtype=complex)
    bad[0, 1] = 1.0
    with pytest.raises(ModelError, match="Hermitian"):
        commutator_superop(SpinOperator(bad, "bad"))


def test_double_commutator_eigendecay():
    # -tau [Iz1,[Iz1, .]] sends Ix1 -> -tau Ix1
    tau = 1e-6
    s = double_commutator_dissipator(pauli_component("z", 1), tau)
    ix = vectorize(pauli_component("x", 1).matrix)
    assert np.allclose(s.matrix @ ix, -tau * ix, atol=1e-20)


def test_double_commutator_zero_weight_is_zero():
    s = double_commutator_dissipator(pauli_component("z", 1), 0.0)
    assert np.all(s.matrix == 0)


def test_double_commutator_negative_weight_rejected():
    with pytest.raises(ArgumentError):
        double_commutator_dissipator(pauli_component("z", 1), -1.0)


def test_double_commutator_annihilates_identity():
    s = double_commutator_dissipator(pauli_component("x", 2), 2.5)
    assert np.abs(s.matrix @ vectorize(np.eye(4))).max() < 1e-14


def test_sandwich_amplitude_damping_rates():
    """2 A rho B - B A rho - rho B A with A = I_-, B = I_+ pumps |0> -> |1>."""
    p = 0.7
    s = sandwich_dissipator(lowering(1), raising(1), p)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0  # |00><00|
    drho = devectorize(s.matrix @ vectorize(rho0))
    assert drho[2, 2].real == pytest.approx(2 * p)   # gain in |10><10|
    assert drho[0, 0].real == pytest.approx(-2 * p)
    assert abs(np.trace(drho)) < 1e-14


def test_sandwich_trace_free_for_arbitrary_jump():
    # non-Hermitian, non-normal jump; derivative trace vanishes identically
    rng = np.random.default_rng(6)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    s = sandwich_dissipator(SpinOperator(a, "A"), SpinOperator(a.conj().T, "Adag"), 1.3)
    rho = _rand_herm(rng)
    assert abs(np.trace(devectorize(s.matrix @ vectorize(rho)))) < 1e-12


def test_sandwich_zero_and_negative_rate():
    assert np.all(sandwich_dissipator(lowering(1), raising(1), 0.0).matrix == 0)
    with pytest.raises(ArgumentError):
        sandwich_dissipator(lowering(1), raising(1), -0.1)


# ---------------------------------------------------------------- stage builders

@pytest.fixture(scope="module")
def ref():
    return reference_params()


@pytest.fixture(scope="module")
def ref_pumped():
    return reference_params(p_plus=0.4e-5, p_minus=1.6e-5)


def test_build_L_sec_kernel_dimension(ref):
    # unitary + pure-dephasing part: kernel spanned by the 4 spectral projectors
    assert _null_dim(build_L_sec(ref).matrix) == 4


def test_sec_plus_ns_kernel_dimension(ref):
    assert _null_dim(build_total(ref, "sec+ns").matrix) == 2


def test_full_kernel_is_one_dimensional():
    # pumping rates scaled up so the slowest mode clears the svd cutoff
    p = reference_params(p_plus=0.4, p_minus=1.6)
    assert _null_dim(build_total(p, "full").matrix) == 1


def test_build_L_sl_zero_rates_is_zero(ref):
    s = build_L_sl(ref)
    assert np.all(s.matrix == 0)
    assert s.norm == 0


def test_build_L_sl_steady_polarization():
    """Fixed point of the pumping channels carries M_z = (P- - P+)/(P- + P+)."""
    p = reference_params(p_plus=0.4e-5, p_minus=1.6e-5)
    s = build_L_sl(p)
    _, _, vh = np.linalg.svd(s.matrix)
    rho = devectorize(vh[-1].conj())
    rho = rho / np.trace(rho)
    iz_tot = pauli_component("z", 1).matrix + pauli_component("z", 2).matrix
    izz = pauli_component("z", 1).matrix @ pauli_component("z", 2).matrix
    assert np.trace(rho @ iz_tot).real == pytest.approx(0.6, abs=1e-10)
    assert np.trace(rho @ izz).real == pytest.approx(0.09, abs=1e-10)


def test_build_L_sl_pure_downward_pumping():
    p = reference_params(p_plus=0.0, p_minus=1.6e-5)
    s = build_L_sl(p)
    _, _, vh = np.linalg.svd(s.matrix)
    rho = devectorize(vh[-1].conj())
    rho = rho / np.trace(rho)
    want = np.zeros((4, 4))
    want[0, 0] = 1.0  # both spins in the lower-energy |0> state
    assert np.allclose(rho, want, atol=1e-12)


def test_build_total_stage_sec_is_exact(ref):
    assert np.array_equal(build_total(ref, "sec").matrix, build_L_sec(ref).matrix)


def test_build_total_additivity_without_pumping(ref):
    full = build_total(ref, "full").matrix
    sn = build_total(ref, "sec+ns").matrix
    assert np.array_equal(full, sn)


def test_build_total_full_is_stage_sum(ref_pumped):
    total = build_total(ref_pumped, "full").matrix
    parts = (build_L_sec(ref_pumped).matrix + build_L_ns(ref_pumped).matrix
             + build_L_sl(ref_pumped).matrix)
    assert np.array_equal(total, parts)


def test_build_total_rejects_unknown_stage(ref):
    with pytest.raises(ArgumentError, match="stage"):
        build_total(ref, "secular")


def test_stage_tags(ref_pumped):
    assert build_L_sec(ref_pumped).stage == "sec"
    assert build_L_ns(ref_pumped).stage == "ns"
    assert build_L_sl(ref_pumped).stage == "sl"
    assert build_total(ref_pumped, "full").stage == "composite"


# ---------------------------------------------------------------- invariants

_BUILDERS = [
    lambda p: build_L_sec(p),
    lambda p: build_L_ns(p),
    lambda p: build_L_sl(p),
    lambda p: build_total(p, "full"),
]


@pytest.mark.parametrize("builder", _BUILDERS)
def test_hermiticity_preservation(builder, ref_pumped):
    """devectorize(L vec(rho)) stays Hermitian for Hermitian rho (relative 1e-12)."""
    s = builder(ref_pumped)
    rng = np.random.default_rng(11)
    for _ in range(5):
        out = devectorize(s.matrix @ vectorize(_rand_herm(rng)))
        scale = max(1.0, np.abs(out).max())
        assert np.abs(out - out.conj().T).max() / scale < 1e-12


@pytest.mark.parametrize("builder", _BUILDERS)
def test_left_trace_null_vector(builder, ref_pumped):
    s = builder(ref_pumped)
    left = vectorize(np.eye(4)).conj() @ s.matrix
    assert np.abs(left).max() <= 1e-10 * max(s.norm, 1e-300)


@pytest.mark.parametrize("builder", _BUILDERS)
def test_spectrum_in_left_half_plane(builder, ref_pumped):
    s = builder(ref_pumped)
    if s.norm == 0:
        return
    assert np.linalg.eigvals(s.matrix).real.max() <= 1e-10 * s.norm


def test_shift_terms_leave_decay_rates_unchanged():
    """Turning shifts on moves only the imaginary parts of the eigenvalues."""
    import dataclasses

    off = reference_params()
    on = dataclasses.replace(off, include_shifts=True)
    w_off = np.sort(np.linalg.eigvals(build_L_ns(off).matrix).real)
    w_on = np.sort(np.linalg.eigvals(build_L_ns(on).matrix).real)
    scale = np.abs(w_off).max()
    assert np.abs(w_on - w_off).max() <= 1e-9 * scale
    # and the shift really does act on the unitary part
    im_off = np.sort(np.linalg.eigvals(build_L_ns(off).matrix).imag)
    im_on = np.sort(np.linalg.eigvals(build_L_ns(on).matrix).imag)
    assert np.abs(im_on - im_off).max() > 1e3 * scale * 1e-9


def test_superoperator_rejects_trace_leak():
    bad = np.diag(np.ones(16))
    with pytest.raises(ModelError, match="trace"):
        SuperOperator(matrix=bad, stage="sec")


def test_superoperator_rejects_unstable_spectrum():
    bad = np.zeros((16, 16))
    bad[1, 1] = 1.0   # growing coherence mode, trace still preserved
    with pytest.raises(ModelError, match="unstable"):
        SuperOperator(matrix=bad, stage="sec")


def test_dump_super_roundtrip(ref):
    s = build_L_sec(ref)
    text = dump_super(s)
    lines = text.strip().splitlines()
    assert len(lines) == 16
    back = np.array([[complex(*map(float, pair.split(",")))
                      for pair in line.split()] for line in lines])
    assert back.shape == (16, 16)
    assert np.array_equal(back, s.matrix)


def test_ns_rates_positive(ref):
    r = rates(ref)
    assert r["q1"] > 0 and r["p1"] > 0 and r["p2"] > 0

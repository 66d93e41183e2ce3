import numpy as np
import pytest

from spincascade.errors import ArgumentError
from spincascade.spinops import (
    SpinOperator,
    anticommutator,
    commutator,
    dagger,
    dipolar_tensor,
    hs_inner,
    lowering,
    operator_basis,
    pauli_component,
    raising,
    spherical_tensor,
)


def cg_spherical_tensor(m):
    """Independent oracle: couple two rank-1 tensors with Clebsch-Gordan weights."""
    from sympy.physics.quantum.cg import CG

    def rank1(q, spin):
        if q == 0:
            return pauli_component("z", spin).matrix
        lad = raising(spin) if q > 0 else lowering(spin)
        return -q * lad.matrix / np.sqrt(2.0)

    out = np.zeros((4, 4), dtype=complex)
    for q1 in (-1, 0, 1):
        q2 = m - q1
        if abs(q2) > 1:
            continue
        coeff = float(CG(1, q1, 1, q2, 2, m).doit())
        out += coeff * rank1(q1, 1) @ rank1(q2, 2)
    return out


def test_pauli_z1_matrix():
    got = pauli_component("z", 1).matrix
    assert np.allclose(got, np.diag([0.5, 0.5, -0.5, -0.5]))


def test_pauli_identity_slot():
    op = pauli_component("d", 2)
    assert np.allclose(op.matrix, np.eye(4))
    assert op.label == "Id2"


def test_pauli_x_squares_to_quarter_identity():
    ix1 = pauli_component("x", 1).matrix
    assert np.allclose(ix1 @ ix1, np.eye(4) / 4)


@pytest.mark.parametrize("axis,spin", [("q", 1), ("x", 0), ("x", 3), ("xy", 2)])
def test_pauli_rejects_bad_arguments(axis, spin):
    with pytest.raises(ArgumentError):
        pauli_component(axis, spin)


def test_spin_operator_rejects_wrong_shape():
    with pytest.raises(ArgumentError):
        SpinOperator(np.eye(3))


def test_spin_operator_rejects_nan():
    bad = np.eye(4, dtype=complex)
    bad[0, 0] = np.nan
    with pytest.raises(ArgumentError):
        SpinOperator(bad)


@pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
def test_spherical_tensor_matches_clebsch_gordan_oracle(m):
    assert np.allclose(spherical_tensor(m).matrix, cg_spherical_tensor(m), atol=1e-12)


def test_spherical_tensor_m0_closed_form():
    iz1 = pauli_component("z", 1).matrix
    iz2 = pauli_component("z", 2).matrix
    dot = sum(
        pauli_component(a, 1).matrix @ pauli_component(a, 2).matrix for a in "xyz"
    )
    expected = (3 * iz1 @ iz2 - dot) / np.sqrt(6)
    assert np.allclose(spherical_tensor(0).matrix, expected, atol=1e-14)


def test_spherical_tensor_m2_single_entry():
    got = spherical_tensor(2).matrix
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 3] = 0.5
    assert np.allclose(got, expected, atol=1e-14)


def test_spherical_tensor_rejects_bad_order():
    with pytest.raises(ArgumentError):
        spherical_tensor(3)


@pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
def test_ladder_identities(m):
    iz_tot = pauli_component("z", 1).matrix + pauli_component("z", 2).matrix
    t = spherical_tensor(m).matrix
    assert np.allclose(iz_tot @ t - t @ iz_tot, m * t, atol=1e-12)
    for step in (+1, -1):
        lad = (raising if step > 0 else lowering)(1).matrix + (
            raising if step > 0 else lowering
        )(2).matrix
        lhs = lad @ t - t @ lad
        if abs(m + step) <= 2:
            coeff = np.sqrt(6.0 - m * (m + step))
            assert np.allclose(lhs, coeff * spherical_tensor(m + step).matrix, atol=1e-12)
        else:
            assert np.allclose(lhs, 0, atol=1e-12)


@pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
def test_tensor_dagger_pairing(m):
    t = spherical_tensor(m)
    assert np.allclose(dagger(t).matrix, (-1) ** m * spherical_tensor(-m).matrix, atol=1e-14)
    u = dipolar_tensor(m)
    assert np.allclose(dagger(u).matrix, (-1) ** m * dipolar_tensor(-m).matrix, atol=1e-14)


@pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
def test_dipolar_tensor_scaling(m):
    scale = np.sqrt(6) if m == 0 else 2.0
    assert np.allclose(dipolar_tensor(m).matrix, scale * spherical_tensor(m).matrix)


def test_dipolar_tensor_ladder_weight():
    iz_tot = pauli_component("z", 1).matrix + pauli_component("z", 2).matrix
    for m in range(-2, 3):
        u = dipolar_tensor(m).matrix
        assert np.allclose(iz_tot @ u - u @ iz_tot, m * u, atol=1e-12)


def test_commutator_cross_slot_vanishes():
    c = commutator(pauli_component("z", 1), pauli_component("z", 2))
    assert np.allclose(c.matrix, 0)


def test_anticommutator_matches_definition():
    a, b = pauli_component("x", 1), pauli_component("y", 1)
    got = anticommutator(a, b).matrix
    assert np.allclose(got, a.matrix @ b.matrix + b.matrix @ a.matrix)


def test_double_dagger_roundtrip():
    rng = np.random.default_rng(7)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a = SpinOperator(m)
    assert np.array_equal(dagger(dagger(a)).matrix, a.matrix)


def test_hs_inner_ix_unit_norm():
    ix1 = pauli_component("x", 1)
    assert hs_inner(ix1, ix1) == pytest.approx(1.0)


def test_hs_inner_conjugate_linear_first_argument():
    a = SpinOperator(1j * pauli_component("x", 1).matrix)
    b = pauli_component("x", 1)
    assert hs_inner(a, b) == pytest.approx(-1j)


def test_operator_basis_gram_diagonal():
    ops = operator_basis()
    gram = np.array([[hs_inner(a, b) for b in ops] for a in ops])
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < 1e-14


def test_spherical_tensors_equal_hs_norm():
    for m in range(-2, 3):
        t = spherical_tensor(m)
        assert abs(hs_inner(t, t) - 0.25) < 1e-14

import itertools
import math

import numpy as np
import pytest

from cqlab import qmat

X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def test_kron_examples():
    assert np.allclose(qmat.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(qmat.kron(np.diag([1, 0]), np.diag([0, 1])), np.diag([0, 1, 0, 0]))
    ket00 = np.array([1, 0, 0, 0])
    ket11 = np.array([0, 0, 0, 1])
    assert np.allclose(qmat.kron(X, X) @ ket00, ket11)


def test_positive_part_projector_examples():
    p = qmat.positive_part_projector(np.diag([2.0, 0.0]), np.diag([1.0, 1.0]))
    assert np.allclose(p, np.diag([1, 0]))
    a = qmat.random_psd(3, np.random.default_rng(0))
    assert np.allclose(qmat.positive_part_projector(a, a), np.eye(3))


def test_positive_part_projector_maximises_trace(rng):
    a = qmat.hermitize(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    b = qmat.hermitize(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    p = qmat.positive_part_projector(a, b)
    value = np.trace(p @ (a - b)).real
    w, v = qmat.eigh(a - b)
    best = max(
        sum(w[i] for i in subset)
        for r in range(4) for subset in itertools.combinations(range(3), r))
    assert value == pytest.approx(best, abs=1e-10)
    assert np.abs(p @ p - p).max() < 1e-9


def test_complementary_projectors(rng):
    a, b = qmat.random_psd(4, rng), qmat.random_psd(4, rng)
    total = qmat.positive_part_projector(a, b) + qmat.positive_part_projector(b, a)
    # A − B nonsingular almost surely
    assert np.allclose(total, np.eye(4), atol=1e-9)


def test_trace_norm_examples():
    zero, one = qmat.basis_state(0, 2), qmat.basis_state(1, 2)
    plus = qmat.pure_state([1, 1])
    assert qmat.trace_norm(zero - zero) == pytest.approx(0.0, abs=1e-12)
    assert qmat.trace_norm(zero - one) == pytest.approx(2.0)
    assert qmat.trace_norm(zero - plus) == pytest.approx(math.sqrt(2))


def test_trace_norm_triangle(rng):
    for _ in range(20):
        a, b, c = (qmat.random_density(3, rng) for _ in range(3))
        assert qmat.trace_norm(a - c) <= qmat.trace_norm(a - b) + qmat.trace_norm(b - c) + 1e-9


def test_partial_trace_examples(rng):
    rho, sigma = qmat.random_density(2, rng), qmat.random_density(3, rng)
    joint = qmat.kron(rho, sigma)
    assert np.allclose(qmat.partial_trace(joint, [2, 3], [0]), rho)
    assert np.allclose(qmat.partial_trace(joint, [2, 3], [1]), sigma)
    assert np.allclose(qmat.partial_trace(joint, [2, 3], []), [[1.0]])
    bell = qmat.pure_state([1, 0, 0, 1])
    assert np.allclose(qmat.partial_trace(bell, [2, 2], [0]), np.eye(2) / 2)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(qmat.OperatorError):
        qmat.partial_trace(np.eye(4), [2, 3], [0])


def test_frac_power_examples(rng):
    assert np.allclose(qmat.frac_power(np.eye(3), 0.37), np.eye(3))
    assert np.allclose(qmat.frac_power(np.diag([4.0, 0.0]), 0.5), np.diag([2, 0]))
    rho = qmat.random_density(3, rng)
    assert np.allclose(qmat.frac_power(rho, 0.3) @ qmat.frac_power(rho, 0.7), rho, atol=1e-10)


def test_psd_leq_examples():
    assert qmat.psd_leq(np.zeros((2, 2)), np.eye(2), 1e-10)
    assert not qmat.psd_leq(2 * np.eye(2), np.eye(2), 1e-10)


def test_pinv_sqrt_examples(rng):
    assert np.allclose(qmat.pinv_sqrt(np.eye(2)), np.eye(2))
    assert np.allclose(qmat.pinv_sqrt(np.diag([4.0, 0.0])), np.diag([0.5, 0]))
    v = qmat.haar_unitary(3, rng)[:, :2]
    proj = v @ v.conj().T
    assert np.allclose(qmat.pinv_sqrt(proj), proj, atol=1e-10)
    a = qmat.random_psd(3, rng)
    b = qmat.pinv_sqrt(a)
    assert np.allclose(b @ a @ b, qmat.support_projector(a), atol=1e-9)


def test_permutation_unitary_examples():
    assert np.allclose(qmat.permutation_unitary((0, 1, 2), 2), np.eye(8))
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert np.allclose(qmat.permutation_unitary((1, 0), 2), swap)


def test_permutation_unitary_composes(rng):
    for _ in range(10):
        s, s2 = rng.permutation(3), rng.permutation(3)
        composed = s[s2]        # (s∘s')(j) = s(s'(j))
        lhs = qmat.permutation_unitary(s, 2) @ qmat.permutation_unitary(s2, 2)
        assert np.allclose(lhs, qmat.permutation_unitary(composed, 2))


def test_permutation_unitary_moves_factors(rng):
    a, b, c = (qmat.random_density(2, rng) for _ in range(3))
    u = qmat.permutation_unitary((2, 0, 1), 2)
    # factor 0 → position 2, 1 → 0, 2 → 1
    assert np.allclose(u @ qmat.kron(a, b, c) @ u.conj().T, qmat.kron(b, c, a))


def test_permutation_indices_relabel_basis():
    out = qmat.permutation_indices((2, 0, 1), 2)
    u = qmat.permutation_unitary((2, 0, 1), 2)
    assert np.array_equal(u[out, np.arange(8)], np.ones(8))
    assert sorted(out.tolist()) == list(range(8))
    with pytest.raises(ValueError):
        qmat.permutation_indices((0, 0), 2)


def test_eigendecomposition_reconstructs(rng):
    a = qmat.random_psd(5, rng)
    w, v = qmat.eigh(a)
    assert np.abs(qmat.from_eig(w, v) - a).max() < 1e-10


def test_haar_unitary_is_unitary(rng):
    u = qmat.haar_unitary(4, rng)
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


def test_check_density_names_the_state():
    with pytest.raises(qmat.OperatorError, match="letter 3"):
        qmat.check_density(np.diag([1.5, -0.5]), name="letter 3")
    with pytest.raises(qmat.OperatorError, match="trace"):
        qmat.check_density(np.eye(2))
    with pytest.raises(qmat.OperatorError, match="Hermitian"):
        qmat.check_density(np.array([[0.5, 1.0], [0.0, 0.5]]))

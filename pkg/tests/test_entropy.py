import math

import numpy as np
import pytest

from cqlab import qmat
from cqlab.entropy import (Ensemble, alpha_chi, alpha_chi_objective, alpha_chi_variational, cq_state, holevo,
                           holevo_relative, kl, rel_entropy, renyi_rel_entropy, shannon, vn_entropy)


def _binary_entropy(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _random_ensemble(rng, k=2, d=2):
    return Ensemble(rng.dirichlet(np.ones(k)), tuple(qmat.random_density(d, rng) for _ in range(k)))


def test_shannon_and_kl():
    assert shannon([0.5, 0.5]) == pytest.approx(1.0)
    assert shannon([1.0, 0.0]) == 0.0
    assert kl([0.5, 0.5], [0.5, 0.5]) == pytest.approx(0.0)
    assert kl([0.5, 0.5], [1.0, 0.0]) == math.inf


def test_vn_entropy_examples():
    assert vn_entropy(np.eye(4) / 4) == pytest.approx(2.0)
    assert vn_entropy(qmat.pure_state([1, 1j])) == pytest.approx(0.0, abs=1e-12)
    assert vn_entropy(np.diag([0.6, 0.4])) == pytest.approx(_binary_entropy(0.6))


def test_rel_entropy_support_violation():
    assert rel_entropy(np.eye(2) / 2, qmat.basis_state(0, 2)) == math.inf
    rho = np.diag([0.7, 0.3])
    assert rel_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)


def test_renyi_rel_entropy_range():
    rho = np.diag([0.7, 0.3])
    with pytest.raises(ValueError):
        renyi_rel_entropy(1.0, rho, rho)
    assert renyi_rel_entropy(0.5, qmat.basis_state(0, 2), qmat.basis_state(1, 2)) == math.inf


def test_holevo_examples(distinguishable, zero_plus, uniform):
    assert holevo(distinguishable.ensemble(uniform)) == pytest.approx(1.0)
    cos2 = math.cos(math.pi / 8) ** 2
    assert holevo(zero_plus.ensemble(uniform)) == pytest.approx(_binary_entropy(cos2))
    assert holevo(zero_plus.ensemble(uniform)) == pytest.approx(0.6009, abs=1e-4)
    same = Ensemble(np.array([0.3, 0.7]), (np.eye(2) / 2, np.eye(2) / 2))
    assert holevo(same) == pytest.approx(0.0, abs=1e-12)


def test_holevo_relative_form(rng):
    for d in (2, 3):
        ens = _random_ensemble(rng, k=3, d=d)
        assert abs(holevo_relative(ens) - holevo(ens)) <= 1e-9


def test_cq_state_is_block_diagonal(rng):
    ens = _random_ensemble(rng, k=3, d=2)
    state = cq_state(ens)
    assert state.shape == (6, 6)
    assert np.trace(state).real == pytest.approx(1.0)
    assert np.allclose(state[0:2, 2:4], 0)


def test_alpha_chi_bounds_and_limit(rng):
    for _ in range(5):
        ens = _random_ensemble(rng)
        chi = holevo(ens)
        assert alpha_chi(0.5, ens) <= alpha_chi(0.8, ens) + 1e-9
        assert alpha_chi(0.8, ens) <= chi + 1e-9
        assert abs(alpha_chi(0.999, ens) - chi) <= 0.01


def test_alpha_chi_pure_distinguishable(distinguishable, uniform):
    # orthogonal pure outputs: every χ_α equals H(p)
    assert alpha_chi(0.3, distinguishable.ensemble(uniform)) == pytest.approx(1.0)


def test_alpha_chi_objective_at_optimum(rng):
    ens = _random_ensemble(rng)
    alpha = 0.6
    a = sum(px * qmat.frac_power(s, alpha) for px, s in zip(ens.probs, ens.states))
    top = qmat.frac_power(a, 1 / alpha)
    omega = top / np.trace(top).real
    assert alpha_chi_objective(alpha, ens, omega) == pytest.approx(alpha_chi(alpha, ens), abs=1e-9)
    other = qmat.random_density(2, rng)
    assert alpha_chi_objective(alpha, ens, other) >= alpha_chi(alpha, ens) - 1e-9


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_alpha_chi_variational_agrees(alpha):
    rng = np.random.default_rng(int(alpha * 100))
    for _ in range(3):
        ens = _random_ensemble(rng)
        assert abs(alpha_chi_variational(alpha, ens) - alpha_chi(alpha, ens)) <= 1e-4


def test_alpha_chi_variational_qubit_only(rng):
    with pytest.raises(ValueError):
        alpha_chi_variational(0.5, _random_ensemble(rng, d=3))


def test_ensemble_validation():
    with pytest.raises(ValueError):
        Ensemble.of([0.5, 0.5], [np.eye(2) / 2])
    with pytest.raises(qmat.OperatorError, match="state 1"):
        Ensemble.of([0.5, 0.5], [np.eye(2) / 2, np.eye(2)])

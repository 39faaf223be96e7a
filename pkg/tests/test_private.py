import logging
import math

import numpy as np
import pytest

from cqlab.covering import obfuscation_error, obfuscation_threshold
from cqlab.entropy import holevo
from cqlab.private import (BipartiteCqChannel, build_private_code, count_collisions, encode,
                           evaluate_private_code, event_analysis, marginals, message_error_prob, private_rate,
                           private_sizes)

H_06 = 0.9709505944546686


def _code(seed=3, **kw):
    opts = dict(M_n=8, L_n=2)
    opts.update(kw)
    return build_private_code((0.5, 0.5), 1.0, 0.1, 4, 0.5, 0.1, 0.5, seed, 2, **opts)


def test_marginals_of_wiretap(wiretap):
    bob, eve = marginals(wiretap)
    assert np.allclose(bob.outputs[0], np.diag([1.0, 0.0]))
    assert np.allclose(eve.outputs[1], np.diag([0.4, 0.6]))


def test_private_rate_of_wiretap(wiretap, wiretap_rotated, uniform):
    assert private_rate(uniform, wiretap) == pytest.approx(H_06)
    assert private_rate(uniform, wiretap_rotated) == pytest.approx(H_06)


def test_bipartite_shape_check():
    with pytest.raises(ValueError, match="letter 0"):
        BipartiteCqChannel((np.eye(2) / 2,), 2, 2)


def test_private_sizes_split():
    sizes = private_sizes((0.5, 0.5), 1.0, 0.1, 4, 0.5, 0.5, 2, M_n=9, L_n=2)
    assert (sizes.M_n, sizes.L_n, sizes.J_n) == (9, 2, 4)
    assert sizes.rate(4) == pytest.approx(0.5)


def test_private_sizes_without_advantage(caplog):
    with caplog.at_level(logging.WARNING):
        sizes = private_sizes((0.5, 0.5), 0.2, 0.5, 4, 0.5, 0.5, 2, M_n=64, L_n=2)
    assert sizes.J_n == 1
    assert "forced to 1" in caplog.text


def test_code_shape_and_determinism():
    code = _code()
    assert code.codewords.shape == (4, 2, 4)
    assert len(code.povm.elements) == 8
    assert code.tobytes() == _code().tobytes()
    assert code.tobytes() != _code(seed=4).tobytes()


def test_codebook_ignores_channel_matrices(wiretap, wiretap_rotated, uniform):
    code = _code()
    plain = evaluate_private_code(wiretap, uniform, code, eps_target=1.0, delta_target=2.0)
    twin = evaluate_private_code(wiretap_rotated, uniform, code, eps_target=1.0, delta_target=2.0)
    assert abs(plain.p_e - twin.p_e) <= 1e-8
    assert np.allclose(plain.deltas, twin.deltas, atol=1e-8)
    assert plain.passed and twin.passed


def test_message_error_below_pair_error(wiretap, uniform):
    code = _code(seed=7)
    bob, _ = marginals(wiretap)
    verdict = evaluate_private_code(wiretap, uniform, code, eps_target=1.0, delta_target=2.0)
    assert message_error_prob(bob, code) == pytest.approx(verdict.p_e_message)
    assert verdict.p_e_message <= verdict.p_e + 1e-12


def test_default_targets_are_analytic(wiretap, uniform):
    verdict = evaluate_private_code(wiretap, uniform, _code())
    assert verdict.delta_target == pytest.approx(obfuscation_threshold(2, 0.1))
    assert verdict.eps_target > 0


def test_encode_picks_from_covering_set(rng):
    code = _code()
    for j in range(code.J_n):
        x = encode(code, j, rng)
        assert any(tuple(row) == x for row in code.codewords[j].tolist())
    with pytest.raises(ValueError):
        encode(code, code.J_n, rng)


def test_strict_disjoint_sets():
    code = _code(seed=5, M_n=6, L_n=3, strict_disjoint=True)
    assert code.collisions == 0
    seen = [{tuple(r) for r in s.tolist()} for s in code.covering_sets]
    assert not seen[0] & seen[1]


def test_count_collisions():
    assert count_collisions(np.array([[0, 1], [2, 3]])) == 0
    assert count_collisions(np.array([[0, 0], [0, 3]])) == 3


def test_single_codeword_is_decoded(wiretap, uniform):
    code = _code(M_n=1, L_n=1, gamma_n=-50.0)
    verdict = evaluate_private_code(wiretap, uniform, code, eps_target=1.0, delta_target=2.0)
    assert verdict.p_e == pytest.approx(0.0, abs=1e-9)


def test_event_analysis(wiretap, uniform):
    kw = dict(M_n=4, L_n=2)
    rec = event_analysis(wiretap, uniform, 1.0, 0.1, 4, 0.5, 0.1, 0.5, 6, seed=1, max_concurrent=1, **kw)
    assert (rec.J_n, rec.L_n) == (2, 2)
    assert rec.union_freq >= rec.decoding_freq
    assert rec.union_freq >= max(rec.covering_freq)
    assert rec.union_bound == pytest.approx(rec.J_n * rec.eps_prime_n + rec.sqrt_eps_n)
    again = event_analysis(wiretap, uniform, 1.0, 0.1, 4, 0.5, 0.1, 0.5, 6, seed=1, max_concurrent=3, **kw)
    assert again == rec


def test_covering_sets_shrink_obfuscation(wiretap, uniform):
    _, eve = marginals(wiretap)
    # Eve sees diag(0.6, 0.4) or diag(0.4, 0.6) per letter against W̄ = I/2
    single = sum(math.comb(4, a) * abs(0.6 ** a * 0.4 ** (4 - a) - 1 / 16) for a in range(5))
    assert obfuscation_error(eve, uniform, [(0, 1, 1, 0)]) == pytest.approx(single)

    stats = {}
    for size in (2, 8, 32):
        worst = [evaluate_private_code(wiretap, uniform, _code(seed=s, M_n=2 * size, L_n=size),
                                       eps_target=1.0, delta_target=2.0).delta_max for s in range(30)]
        stats[size] = (np.mean(worst), np.std(worst, ddof=1) / math.sqrt(len(worst)))
    for small, large in ((2, 8), (8, 32)):
        pooled = math.hypot(stats[small][1], stats[large][1])
        assert stats[large][0] <= stats[small][0] + 3 * pooled
    assert stats[8][0] < single


def test_default_sizing_leaves_decoder_open(wiretap, uniform):
    bob, eve = marginals(wiretap)
    chi0, chi1 = holevo(bob.ensemble(uniform)), holevo(eve.ensemble(uniform))
    code = build_private_code(uniform, chi0, chi1, 6, 0.1, 0.1, 0.5, 0, 2)
    assert (code.J_n, code.L_n) == (1, 3)
    assert code.sizes.gamma_n < 0
    assert all(np.allclose(lam, np.eye(64), atol=1e-9) for lam in code.povm.projectors)
    verdict = evaluate_private_code(wiretap, uniform, code, eps_target=0.2, delta_target=0.5)
    assert verdict.p_e == pytest.approx(1 - 1 / 3, abs=1e-9)
    assert not verdict.passed

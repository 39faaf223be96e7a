"""Numerical inequality and invariant suite behind ``verify``.

Every check draws its random instances from a generator seeded by
(run seed, check index), so the report is a function of the seed alone.
A check passes when its worst margin is at least its floor.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from cqlab import config, qmat, symm
from cqlab.channels import zero_plus_qubit
from cqlab.covering import CoveringContext, chernoff_check
from cqlab.entropy import Ensemble, alpha_chi, alpha_chi_variational, holevo, holevo_relative, vn_entropy
from cqlab.packing import CqChannel, channel_output, hayashi_nagaoka_check, lambda_projector, make_code, \
    packing_term_bounds
from cqlab.seqtypes import enumerate_types, multinomial, pow2

logger = logging.getLogger(__name__)

# operator inequalities may fail by round-off
MARGIN_FLOOR = -1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    params: str
    margin: float
    passed: bool
    instances: int

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<18} {self.params:<44} n_inst={self.instances:<5d} worst_margin={self.margin:+.6e}"


def _result(name: str, params: str, margins: list[float], floor: float = MARGIN_FLOOR) -> CheckResult:
    worst = float(min(margins))
    return CheckResult(name, params, worst, worst >= floor, len(margins))


def _random_bits(rng: np.random.Generator, n: int) -> tuple[int, ...]:
    return tuple(int(v) for v in rng.integers(0, 2, size=n))


def _random_qubit_channel(rng: np.random.Generator) -> CqChannel:
    return CqChannel((qmat.random_density(2, rng), qmat.random_density(2, rng)))


# ── symm ────────────────────────────────────────────────

def check_tau_dominates(rng: np.random.Generator, quick: bool) -> CheckResult:
    count, n_max = (5, 3) if quick else (20, 4)
    margins = [symm.lemma1_gap(qmat.random_density(2, rng), n)
               for _ in range(count) for n in range(1, n_max + 1)]
    return _result("tau_dominates", f"d=2 states={count} n<={n_max}", margins)


def check_omega_commutes(rng: np.random.Generator, quick: bool) -> CheckResult:
    n_max = 3 if quick else 4
    margins = []
    for n in range(1, n_max + 1):
        tau = symm.tau_n(n, 2).op
        for x in itertools.product(range(2), repeat=n):
            margins.append(1e-9 - qmat.commutator_norm(symm.omega(x, 2), tau))
    return _result("omega_tau_commute", f"k=2 d=2 all x n<={n_max}", margins, floor=0.0)


def check_sigma_commutes(rng: np.random.Generator, quick: bool) -> CheckResult:
    n_max = 3 if quick else 4
    margins = []
    for n in range(1, n_max + 1):
        sigma = qmat.random_density(2, rng)
        _, v = qmat.eigh(sigma)
        power = qmat.kron_power(sigma, n)
        for basis in (v, None):
            tau = symm.tau_n(n, 2, basis=basis).op
            margins.append(1e-9 - qmat.commutator_norm(tau, power))
    return _result("sigma_tau_commute", f"d=2 eigenbasis+computational n<={n_max}", margins, floor=0.0)


def check_tau_symmetry(rng: np.random.Generator, quick: bool) -> CheckResult:
    """Permutation invariance and basis independence of τ_n."""
    n_max = 3 if quick else 4
    margins = []
    for n in range(1, n_max + 1):
        tau = symm.tau_n(n, 2).op
        for s in itertools.permutations(range(n)):
            u = qmat.permutation_unitary(s, 2)
            margins.append(1e-9 - float(np.max(np.abs(u @ tau @ u.conj().T - tau))))
        rotated = symm.tau_n(n, 2, basis=qmat.haar_unitary(2, rng)).op
        margins.append(1e-9 - float(np.max(np.abs(rotated - tau))))
    return _result("tau_symmetry", f"d=2 all permutations n<={n_max}", margins, floor=0.0)


def check_rank_bounds(rng: np.random.Generator, quick: bool) -> CheckResult:
    """|K_q| ≤ rank Ĩ_q ≤ (n+1)^{d²}|K_q|, same rank for three orbit seeds."""
    n_max = 3 if quick else 4
    seeds = [config.ORBIT_SEED + i for i in range(3)]
    margins = []
    for n in range(1, n_max + 1):
        for q in enumerate_types(n, 2):
            ranks = {symm.projector_tildeIq(q, 2, seed=s).rank for s in seeds}
            if len(ranks) != 1:
                logger.warning("rank of orbit span for q=%s differs across seeds: %s", q, sorted(ranks))
                margins.append(-1.0)
                continue
            rank, size = ranks.pop(), multinomial(q)
            margins.append(float(min(rank - size, (n + 1) ** 4 * size - rank)))
    return _result("rank_bounds", f"d=2 all types n<={n_max} seeds=3", margins, floor=0.0)


def check_iq_chain(rng: np.random.Generator, quick: bool) -> CheckResult:
    """I_q σ^⊗n I_q = weight·I_q ≤ (n+1)^{d²} τ_q and I_q ≤ Ĩ_q, σ diagonal."""
    n_max = 2 if quick else 3
    margins = []
    for n in range(1, n_max + 1):
        lam = rng.dirichlet([1.0, 1.0])
        power = qmat.kron_power(np.diag(lam).astype(np.complex128), n)
        for q in enumerate_types(n, 2):
            iq = symm.projector_Iq(q, 2).proj
            inv = symm.projector_tildeIq(q, 2)
            sandwich = iq @ power @ iq
            weight = symm.sigma_type_weight(q, lam)
            margins.append(1e-9 - float(np.max(np.abs(sandwich - weight * iq))))
            margins.append(qmat.psd_margin(sandwich, (n + 1) ** 4 * inv.proj / inv.rank))
            margins.append(qmat.psd_margin(iq, inv.proj))
    return _result("iq_chain", f"d=2 all types n<={n_max}", margins)


def check_top_bot(rng: np.random.Generator, quick: bool) -> CheckResult:
    """2^{−n[S+cδ]}Π ≤ Πσ^⊗nΠ ≤ 2^{−n[S−cδ]}Π and Tr Π ≤ 2^{n[S+cδ]}, c = S(σ)."""
    ns = (2, 4) if quick else (2, 4, 6)
    margins = []
    for n in ns:
        for delta in (0.3, 0.9):
            sigma = qmat.random_density(2, rng)
            pi = symm.typical_projector(sigma, n, delta)
            s = vn_entropy(sigma)
            c = s
            sandwich = pi @ qmat.kron_power(sigma, n) @ pi
            margins.append(qmat.psd_margin(pow2(-n * (s + c * delta)) * pi, sandwich))
            margins.append(qmat.psd_margin(sandwich, pow2(-n * (s - c * delta)) * pi))
            margins.append(pow2(n * (s + c * delta)) - float(np.trace(pi).real))
    return _result("top_bot", f"d=2 delta=0.3,0.9 n in {ns}", margins)


# ── entropy ─────────────────────────────────────────────

def check_holevo_forms(rng: np.random.Generator, quick: bool) -> CheckResult:
    margins = []
    for d in (2, 3):
        for _ in range(5):
            ens = Ensemble(rng.dirichlet(np.ones(3)), tuple(qmat.random_density(d, rng) for _ in range(3)))
            margins.append(1e-9 - abs(holevo_relative(ens) - holevo(ens)))
    return _result("holevo_relative", "k=3 d=2,3", margins, floor=0.0)


def check_alpha_chi(rng: np.random.Generator, quick: bool) -> CheckResult:
    """Closed form vs Bloch-ball minimisation, and χ_α → χ as α → 1."""
    count = 3 if quick else 10
    margins = []
    for i in range(count):
        ens = Ensemble(rng.dirichlet([1.0, 1.0]), (qmat.random_density(2, rng), qmat.random_density(2, rng)))
        alpha = (0.3, 0.5, 0.8)[i % 3]
        margins.append(1e-4 - abs(alpha_chi_variational(alpha, ens) - alpha_chi(alpha, ens)))
        margins.append(0.01 - abs(alpha_chi(0.999, ens) - holevo(ens)))
    return _result("alpha_chi", f"k=2 d=2 ensembles={count}", margins, floor=0.0)


# ── 연산자 부등식 ───────────────────────────────────────

def _dims(count: int) -> list[int]:
    return [2 ** (1 + i % 3) for i in range(count)]


def check_threshold_trace(rng: np.random.Generator, quick: bool) -> CheckResult:
    count = 15 if quick else 50
    margins = []
    for i, dim in enumerate(_dims(count)):
        gamma = (-2.0, 0.0, 2.0)[i % 3]
        rho, om = qmat.random_density(dim, rng), qmat.random_psd(dim, rng)
        proj = qmat.positive_part_projector(rho, pow2(-gamma) * om)
        margins.append(pow2(gamma) - float(np.trace(proj @ om).real))
    return _result("threshold_trace", f"d=2 n<=3 gamma=-2,0,2 inst={count}", margins)


def check_gentle(rng: np.random.Generator, quick: bool) -> CheckResult:
    count = 15 if quick else 50
    margins = []
    for dim in _dims(count):
        rho, lam = qmat.random_density(dim, rng), qmat.random_effect(dim, rng)
        deficit = max(1.0 - float(np.trace(rho @ lam).real), 0.0)
        root = qmat.frac_power(lam, 0.5)
        margins.append(2 * math.sqrt(deficit) - qmat.trace_norm(rho - root @ rho @ root))
    return _result("gentle", f"d=2 n<=3 inst={count}", margins)


def check_hayashi_nagaoka(rng: np.random.Generator, quick: bool) -> CheckResult:
    count = 15 if quick else 50
    margins = []
    for dim in _dims(count):
        s, t = qmat.random_effect(dim, rng), qmat.random_psd(dim, rng)
        r = qmat.pinv_sqrt(s + t)
        eye = np.eye(dim)
        margins.append(qmat.psd_margin(eye - r @ s @ r, 2 * (eye - s) + 4 * t))
    return _result("hayashi_nagaoka", f"d=2 n<=3 inst={count}", margins)


def check_power_trace_max(rng: np.random.Generator, quick: bool) -> CheckResult:
    """max_σ Tr(A σ^t) = [Tr A^{1/(1−t)}]^{1−t}, attained at σ ∝ A^{1/(1−t)}."""
    count = 15 if quick else 50
    margins = []
    for i, dim in enumerate(_dims(count)):
        t = (0.2, 0.5, 0.8)[i % 3]
        a = qmat.random_psd(dim, rng)
        top = qmat.frac_power(a, 1 / (1 - t))
        value = float(np.trace(top).real) ** (1 - t)
        best = top / np.trace(top).real
        attained = float(np.trace(a @ qmat.frac_power(best, t)).real)
        margins.append(1e-9 * max(1.0, value) - abs(attained - value))
        sigma = qmat.random_density(dim, rng)
        margins.append(value - float(np.trace(a @ qmat.frac_power(sigma, t)).real))
    return _result("power_trace_max", f"d=2 n<=3 t=0.2,0.5,0.8 inst={count}", margins)


def check_lambda_complement(rng: np.random.Generator, quick: bool) -> CheckResult:
    """I − Λ_x ≤ 2^{ntγ} ω_x^{−t} τ_n^t."""
    count = 15 if quick else 50
    margins = []
    for i in range(count):
        n, t = 1 + i % 3, (0.3, 0.7)[i % 2]
        gamma = float(rng.uniform(-1.0, 1.0))
        x = _random_bits(rng, n)
        lam = lambda_projector(x, gamma, n, 2)
        rhs = pow2(n * t * gamma) * qmat.frac_power(symm.omega(x, 2), -t) @ qmat.frac_power(symm.tau_n(n, 2).op, t)
        margins.append(qmat.psd_margin(np.eye(2 ** n) - lam, qmat.hermitize(rhs)))
    return _result("lambda_complement", f"d_B=2 n<=3 t=0.3,0.7 inst={count}", margins)


def check_output_dominance(rng: np.random.Generator, quick: bool) -> CheckResult:
    """W(x) ≤ (n+1)^{k(d²+d)} ω_x."""
    count = 15 if quick else 50
    margins = []
    for i in range(count):
        n = 1 + i % 3
        w = _random_qubit_channel(rng)
        x = _random_bits(rng, n)
        margins.append(qmat.psd_margin(channel_output(w, x), (n + 1) ** (2 * 6) * symm.omega(x, 2)))
    return _result("output_dominance", f"k=2 d_B=2 n<=3 inst={count}", margins)


# ── packing ─────────────────────────────────────────────

def check_lambda_tau(rng: np.random.Generator, quick: bool) -> CheckResult:
    """Tr Λ_x τ_n ≤ 2^{−nγ}."""
    count = 10 if quick else 30
    margins = []
    for i in range(count):
        n, gamma = 1 + i % 4, (0.2, 0.5)[i % 2]
        x = _random_bits(rng, n)
        lam = lambda_projector(x, gamma, n, 2)
        margins.append(pow2(-n * gamma) - float(np.trace(lam @ symm.tau_n(n, 2).op).real))
    return _result("lambda_tau", f"d_B=2 n<=4 gamma=0.2,0.5 inst={count}", margins)


def check_code_hn(rng: np.random.Generator, quick: bool) -> CheckResult:
    """p_e ≤ Hayashi–Nagaoka bound on random codes and channels."""
    count = 4 if quick else 12
    margins = []
    for i in range(count):
        n = 2 + i % 2
        w = _random_qubit_channel(rng)
        code = make_code(rng.integers(0, 2, size=(3, n)), (0.2, 0.5)[i % 2], 2)
        p_e, bound = hayashi_nagaoka_check(w, code)
        margins.append(bound - p_e)
    return _result("code_hn", f"k=2 d_B=2 M=3 n<=3 inst={count}", margins)


def check_cross_term(rng: np.random.Generator, quick: bool) -> CheckResult:
    """E Tr Λ_X' W(X) ≤ 2^{−n(γ − ζ_n(d²+d))}/(1−ε), exact enumeration."""
    w = zero_plus_qubit()
    n = 2 if quick else 3
    margins = []
    for gamma in (0.3, 1.0, 2.0):
        terms = packing_term_bounds(w, (0.5, 0.5), n, 0.5, gamma, 0.5)
        margins.append(terms.cross_bound - terms.cross)
    return _result("cross_term", f"zero_plus n={n} delta=0.5 gamma=0.3,1,2", margins)


# ── covering ────────────────────────────────────────────

def check_covering_chain(rng: np.random.Generator, quick: bool) -> CheckResult:
    n = 4
    ctx = CoveringContext(zero_plus_qubit(), (0.5, 0.5), n, 0.3, 0.1)
    bounds = list(ctx.context_bounds())
    rows = ctx.typ.sequences[::2] if quick else ctx.typ.sequences
    for row in rows:
        bounds.extend(ctx.chain_bounds(ctx.chain(row)))
    applied = [b for b in bounds if b.applies]
    margins = [b.margin for b in applied]
    return _result("covering_chain", f"zero_plus n={n} delta=0.3 eps=0.1", margins)


def check_chernoff(rng: np.random.Generator, quick: bool) -> CheckResult:
    ops = [np.diag([0.9, 0.3]).astype(np.complex128), np.diag([0.3, 0.9]).astype(np.complex128)]
    trials = 50 if quick else 200
    seed = int(rng.integers(2 ** 32))
    res = chernoff_check(ops, [0.5, 0.5], 200, 0.3, trials, seed, t_thresh=0.6)
    return _result("operator_chernoff", f"d=2 N=200 eps=0.3 t=0.6 trials={trials}",
                   [res.bound + 3 * res.stderr - res.empirical], floor=0.0)


CheckFn = Callable[[np.random.Generator, bool], CheckResult]

CHECKS: list[CheckFn] = [
    check_tau_dominates,
    check_omega_commutes,
    check_sigma_commutes,
    check_tau_symmetry,
    check_rank_bounds,
    check_iq_chain,
    check_top_bot,
    check_holevo_forms,
    check_alpha_chi,
    check_threshold_trace,
    check_gentle,
    check_hayashi_nagaoka,
    check_power_trace_max,
    check_lambda_complement,
    check_output_dominance,
    check_lambda_tau,
    check_code_hn,
    check_cross_term,
    check_covering_chain,
    check_chernoff,
]


def run_checks(seed: int = 0, quick: bool = False, registry: list[CheckFn] | None = None) -> list[CheckResult]:
    """Run every check; a check that raises is reported as a failure."""
    results = []
    for index, fn in enumerate(CHECKS if registry is None else registry):
        rng = np.random.default_rng([seed, index])
        try:
            res = fn(rng, quick)
        except Exception as e:
            logger.exception("check %s raised", fn.__name__)
            res = CheckResult(fn.__name__.removeprefix("check_"), f"error: {e}", -math.inf, False, 0)
        log = logger.info if res.passed else logger.error
        log("check %s: %s (worst margin %.3e)", res.name, "pass" if res.passed else "FAIL", res.margin)
        results.append(res)
    return results


def render_report(results: list[CheckResult], seed: int, quick: bool) -> str:
    failed = sum(not r.passed for r in results)
    lines = [f"# cqlab verify seed={seed} quick={str(quick).lower()}"]
    lines.extend(r.line() for r in results)
    lines.append(f"# {len(results) - failed}/{len(results)} passed")
    return "\n".join(lines) + "\n"

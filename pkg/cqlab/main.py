"""cqlab 명령행 — verify | packing | covering | private | entropy.

    python -m cqlab.main verify --seed 0
    python -m cqlab.main packing --channel fixtures/distinguishable.json --n 2 4 6 --mn 4 --gamma 0.5
    python -m cqlab.main covering --channel fixtures/zero_plus.json --n 6 --ln 4 16 64
    python -m cqlab.main private --channel fixtures/wiretap.json --n 6 --eps-target 0.2 --delta-target 0.5

Exit codes: 0 pass, 1 check/verdict failure or infeasible sizing, 2 input error.
"""
import argparse
import csv
import io
import itertools
import logging
import math
import sys
from pathlib import Path
from typing import Callable

import numpy as np
from pydantic import ValidationError

from cqlab import config
from cqlab.channels import load_channel_spec
from cqlab.checks import render_report, run_checks
from cqlab.covering import covering_experiment, covering_size
from cqlab.entropy import alpha_chi, holevo, shannon
from cqlab.models import ChannelSpec, RunConfig
from cqlab.packing import CqChannel, error_bound, expected_error_mc, rate_params
from cqlab.private import build_private_code, evaluate_private_code, event_analysis, marginals
from cqlab.seqtypes import EmptyTypicalSetError

logger = logging.getLogger(__name__)

ALPHA_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.999)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _bob_channel(spec: ChannelSpec) -> CqChannel:
    return marginals(spec.bipartite_channel())[0] if spec.bipartite else spec.channel()


def _eve_channel(spec: ChannelSpec) -> CqChannel:
    return marginals(spec.bipartite_channel())[1] if spec.bipartite else spec.channel()


# ── 하위 명령 ────────────────────────────────────────────

def cmd_verify(cfg: RunConfig, spec: ChannelSpec | None) -> tuple[int, str]:
    results = run_checks(cfg.seed, cfg.quick)
    report = render_report(results, cfg.seed, cfg.quick)
    return (0 if all(r.passed for r in results) else 1), report


def cmd_packing(cfg: RunConfig, spec: ChannelSpec) -> tuple[int, str]:
    w = _bob_channel(spec)
    ens = w.ensemble(spec.p)
    chi = holevo(ens)
    rate = 0.5 * chi if cfg.rate is None else cfg.rate
    if cfg.rate is None:
        logger.info("no --rate given: using R = chi/2 = %.6f", rate)
    chi_1mt = alpha_chi(1 - cfg.t, ens)

    header = ["n", "R_requested", "R_effective", "M_n", "gamma_n", "t", "p_e_mean", "p_e_stderr",
              "bound_e16", "seed"]
    rows = []
    for n in cfg.n:
        rp = rate_params(rate, cfg.t, n, w.k, w.d, chi_ref=chi)
        m = rp.M_n if cfg.mn is None else cfg.mn
        gamma = rp.gamma_n if cfg.gamma is None else cfg.gamma
        mean, stderr = expected_error_mc(w, spec.p, n, cfg.delta, m, gamma, cfg.trials, cfg.seed, cfg.workers)
        bound = error_bound(n, w.k, w.d, cfg.t, chi_1mt, gamma, m, cfg.eps)
        rows.append([n, rate, math.log2(m) / n, m, gamma, cfg.t, mean, stderr, bound, cfg.seed])
    return 0, to_csv(header, rows)


def cmd_covering(cfg: RunConfig, spec: ChannelSpec) -> tuple[int, str]:
    w_e = _eve_channel(spec)
    header = ["n", "L_n", "delta", "eps", "Delta_mean", "Delta_stderr", "threshold_obfus", "eps_prime_n",
              "seed", "exceed_freq", "window_fail_freq", "chernoff_bound", "exhaustive"]
    rows = []
    for n in cfg.n:
        chi1 = cfg.chi1
        sizes = cfg.ln
        if sizes is None:
            ref = holevo(w_e.ensemble(spec.p)) if chi1 is None else chi1
            sizes = [covering_size(ref, n, cfg.delta, shannon(spec.p))]
        for size in sizes:
            st = covering_experiment(w_e, spec.p, n, cfg.delta, cfg.eps, size, cfg.trials, cfg.seed,
                                     chi1=chi1, max_concurrent=cfg.workers)
            rows.append([n, size, cfg.delta, cfg.eps, st.mean, st.stderr, st.threshold, st.eps_prime,
                         cfg.seed, st.exceed_freq, st.window_fail_freq, st.chernoff_bound, st.exhaustive])
    return 0, to_csv(header, rows)


def cmd_private(cfg: RunConfig, spec: ChannelSpec) -> tuple[int, str]:
    w = spec.bipartite_channel()
    bob, eve = marginals(w)
    chi0 = holevo(bob.ensemble(spec.p)) if cfg.chi0 is None else cfg.chi0
    chi1 = holevo(eve.ensemble(spec.p)) if cfg.chi1 is None else cfg.chi1
    if cfg.chi0 is None or cfg.chi1 is None:
        logger.info("chi bounds taken from the channel file: chi0=%.6f chi1=%.6f", chi0, chi1)
    sizes: list[int | None] = [None] if cfg.ln is None else list(cfg.ln)

    header = ["n", "J_n", "L_n", "p_e", "Delta_max", "verdict", "collisions", "seed",
              "p_e_message", "eps_target", "delta_target"]
    if cfg.events:
        header += ["decoding_freq", "union_freq", "union_bound", "events"]
    rows = []
    failed = False
    for n, size in itertools.product(cfg.n, sizes):
        code = build_private_code(spec.p, chi0, chi1, n, cfg.delta, cfg.eps, cfg.t, cfg.seed, w.d_b,
                                  strict_disjoint=cfg.strict_disjoint, M_n=cfg.mn, L_n=size,
                                  gamma_n=cfg.gamma)
        v = evaluate_private_code(w, spec.p, code, cfg.eps_target, cfg.delta_target)
        failed |= not v.passed
        row = [n, code.J_n, code.L_n, v.p_e, v.delta_max, "pass" if v.passed else "fail",
               code.collisions, cfg.seed, v.p_e_message, v.eps_target, v.delta_target]
        if cfg.events:
            ev = event_analysis(w, spec.p, chi0, chi1, n, cfg.delta, cfg.eps, cfg.t, cfg.trials, cfg.seed,
                                M_n=cfg.mn, L_n=size, gamma_n=cfg.gamma, max_concurrent=cfg.workers)
            failed |= not ev.passed
            row += [ev.decoding_freq, ev.union_freq, ev.union_bound, "pass" if ev.passed else "fail"]
        rows.append(row)
    return (1 if failed else 0), to_csv(header, rows)


def cmd_entropy(cfg: RunConfig, spec: ChannelSpec) -> tuple[int, str]:
    rows: list[list] = []
    w = spec.channel()
    ens = w.ensemble(spec.p)
    rows.append(["chi", "", holevo(ens)])
    rows.extend(["chi_alpha", a, alpha_chi(a, ens)] for a in ALPHA_GRID)
    if spec.bipartite:
        bob, eve = marginals(spec.bipartite_channel())
        chi_b, chi_e = holevo(bob.ensemble(spec.p)), holevo(eve.ensemble(spec.p))
        rows += [["chi_B", "", chi_b], ["chi_E", "", chi_e], ["I_c", "", chi_b - chi_e]]
    return 0, to_csv(["quantity", "alpha", "value"], rows)


COMMANDS: dict[str, Callable[[RunConfig, ChannelSpec | None], tuple[int, str]]] = {
    "verify": cmd_verify,
    "packing": cmd_packing,
    "covering": cmd_covering,
    "private": cmd_private,
    "entropy": cmd_entropy,
}


# ── 진입점 ──────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--channel", help="channel file (JSON)")
    common.add_argument("--n", type=int, nargs="+", help="block length(s)")
    common.add_argument("--delta", type=float)
    common.add_argument("--eps", type=float)
    common.add_argument("--t", type=float)
    common.add_argument("--chi0", type=float)
    common.add_argument("--chi1", type=float)
    common.add_argument("--rate", type=float)
    common.add_argument("--ln", type=int, nargs="+", help="covering set size(s) L_n")
    common.add_argument("--mn", type=int, help="codebook size M_n")
    common.add_argument("--gamma", type=float, help="decoder threshold gamma_n")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--strict-disjoint", action="store_true", default=None)
    common.add_argument("--workers", type=int, help=f"concurrent trials (default {config.MAX_CONCURRENT})")
    common.add_argument("--eps-target", type=float)
    common.add_argument("--delta-target", type=float)
    common.add_argument("--events", action="store_true", default=None,
                        help="private: add random-code failure frequencies over --trials draws")
    common.add_argument("--quick", action="store_true", default=None, help="verify: smaller instance counts")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="cqlab", description="Universal c-q channel coding lab")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _one_line(e: Exception) -> str:
    if isinstance(e, ValidationError):
        return "; ".join(err["msg"] for err in e.errors())
    return str(e).replace("\n", " ")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else config.LOG_LEVEL, stream=sys.stderr,
                        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")

    fields = {k: v for k, v in vars(args).items() if v is not None and k != "verbose"}
    try:
        cfg = RunConfig(**fields)
        spec = load_channel_spec(cfg.channel) if cfg.channel else None
    except (ValueError, OSError) as e:
        print(f"error: {_one_line(e)}", file=sys.stderr)
        return 2

    try:
        code, text = COMMANDS[cfg.subcommand](cfg, spec)
    except EmptyTypicalSetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {_one_line(e)}", file=sys.stderr)
        return 2

    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
        logger.info("결과 저장: %s", cfg.out)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

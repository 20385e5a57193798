"""``ratelqg`` command line: synthesize, simulate, sweep, envelope.

Exit status: 0 success, 2 infeasible cost target, 3 numerical failure,
4 codec desynchronization.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import logging
import os
import sys

import numpy as np

from .bitstream import write_bits_file
from .config import load_run_config, load_synthesis, save_json
from .diagnostics import envelope_diagnostics
from .errors import InfeasibleError, RateLqgError
from .loop import run_closed_loop
from .synthesis import min_achievable_cost, solve_dare, synthesize

logger = logging.getLogger("ratelqg")

__all__ = ["main", "cmd_synthesize", "cmd_simulate", "cmd_sweep", "cmd_envelope",
           "summarize"]

TRACE_COLUMNS = ["t", "codeword_len", "stage_cost", "running_rate", "running_cost"]
SWEEP_COLUMNS = ["gamma", "rate_lower", "rate_upper", "empirical_rate", "empirical_cost",
                 "T", "status"]


def _design(cfg, gamma=None):
    weights = cfg.weights()
    floor = min_achievable_cost(cfg.plant, weights, solve_dare(cfg.plant, weights))
    gamma = cfg.resolve_gamma(floor) if gamma is None else gamma
    if not gamma > floor:
        raise InfeasibleError(
            f"gamma={gamma:.6g} is infeasible: it must exceed the full-information "
            f"cost Tr(WS)={floor:.6g}", threshold=floor)
    return synthesize(cfg.plant, weights.with_gamma(gamma), cfg.barrier)


def cmd_synthesize(cfg, out):
    result = _design(cfg)
    save_json(os.path.join(out, "synthesis.json"), result.to_dict())
    return result


def summarize(result, trace):
    settle = trace.settling(0.25)
    rate, cost = trace.average_rate, trace.average_cost
    return {
        "T": trace.T,
        "gamma": result.gamma,
        "rate_lower": result.rate,
        "rate_upper": result.rate_upper,
        "b": result.b,
        "min_cost": result.min_cost,
        "predicted_cost": result.predicted_cost(),
        "rho_cl": result.rho_cl,
        "rho_lqr": result.rho_lqr,
        "running_rate": rate,
        "running_cost": cost,
        "cost_ratio": cost / result.gamma,
        "settling_rate": settle["rate"],
        "settling_cost": settle["cost"],
        "converged": bool(max(settle.values()) < 0.01),
        "max_measurement_residual": trace.max_residual,
        "total_bits": int(trace.codeword_len.sum()),
        "model_rescales": trace.rescales,
    }


def _write_trace_csv(path, trace, stride):
    rate, cost = trace.running_rate, trace.running_cost
    rows = list(range(stride - 1, trace.T, stride))
    if not rows or rows[-1] != trace.T - 1:
        rows.append(trace.T - 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for t in rows:
            writer.writerow([t, int(trace.codeword_len[t]), repr(float(trace.stage_cost[t])),
                             repr(float(rate[t])), repr(float(cost[t]))])


def _load_or_design(cfg):
    if cfg.synthesis_file:
        return load_synthesis(cfg.synthesis_file)
    return _design(cfg)


def cmd_simulate(cfg, out):
    result = _load_or_design(cfg)
    kc = cfg.cutoff_config
    trace = run_closed_loop(result, kc, cfg.T, cfg.seeds, record_q=True,
                            keep_stream=cfg.bits_file)
    _write_trace_csv(os.path.join(out, "trace.csv"), trace, cfg.stride)
    summary = summarize(result, trace)
    save_json(os.path.join(out, "summary.json"), summary)
    if cfg.save_q:
        np.save(os.path.join(out, "q.npy"), trace.q)
    if cfg.bits_file:
        write_bits_file(os.path.join(out, "stream.bits"), trace.stream, kc.n, kc.p, kc.m, trace.T)
    return summary, trace


def _sweep_point(args):
    cfg, gamma = args
    row = {"gamma": gamma, "T": cfg.T}
    try:
        result = _design(cfg, gamma)
        row["rate_lower"] = result.rate
        row["rate_upper"] = result.rate_upper
        trace = run_closed_loop(result, cfg.cutoff_config, cfg.T, cfg.seeds, record_q=False)
        row["empirical_rate"] = trace.average_rate
        row["empirical_cost"] = trace.average_cost
        row["status"] = "ok"
    except RateLqgError as exc:
        row["status"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(cfg, out):
    weights = cfg.weights()
    floor = min_achievable_cost(cfg.plant, weights)
    grid = cfg.resolve_grid(floor)
    if len(grid) < 2:
        raise RateLqgError("a sweep needs at least two cost targets")
    jobs = [(cfg, g) for g in grid]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    rows.sort(key=lambda r: r["gamma"])
    with open(os.path.join(out, "sweep.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for r in rows:
            writer.writerow([repr(r[c]) if isinstance(r.get(c), float) else r.get(c, "")
                             for c in SWEEP_COLUMNS])
    save_json(os.path.join(out, "sweep.json"), {"min_cost": floor, "points": rows})
    return rows


def cmd_envelope(cfg, out):
    if cfg.q_trace:
        q = np.load(cfg.q_trace)
    else:
        result = _load_or_design(cfg)
        q = run_closed_loop(result, cfg.cutoff_config, cfg.T, cfg.seeds).q
    diag = envelope_diagnostics(q, burn_in=cfg.burn_in)
    save_json(os.path.join(out, "envelope.json"), diag.to_dict())
    return diag


COMMANDS = {
    "synthesize": cmd_synthesize,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "envelope": cmd_envelope,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ratelqg", description="Minimum-bitrate LQG control with adaptive prefix coding")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="run configuration (JSON)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="base seed override")
    parser.add_argument("--threads", type=int, default=None, help="sweep worker processes")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_run_config(args.config, seed=args.seed, threads=args.threads)
        os.makedirs(args.out, exist_ok=True)
        COMMANDS[args.command](cfg, args.out)
    except RateLqgError as exc:
        print(f"ratelqg {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, KeyError) as exc:
        print(f"ratelqg {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

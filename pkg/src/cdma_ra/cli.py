"""Command-line front end.

Exit codes: 0 success, 1 configuration or I/O error, 2 numerical
non-convergence, 3 model-domain error (for example an overloaded
multi-class decorrelator or an arrival rate outside the stability region).

Command-line flags override config fields, which override defaults.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import __version__
from .asymptotic import capacity_report, solve_sir
from .config import RunConfig, load_config
from .errors import ConfigError, ModelDomainError, NumericalError, ResourceError
from .finite_sim import RECEIVERS, SAMPLE_HEADER, TrialConfig, run_trials, sample_rows
from .mac_opt import grid_argmax, optimize_mac, sweep_grid
from .model import Receiver
from .queue import TRACE_HEADER, QueueParams, Stability, queue_analytics, simulate_queue, stable_system_capacity

log = logging.getLogger("cdma_ra")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_DOMAIN = 0, 1, 2, 3
DEFAULT_QUEUE_SLOTS = 10**6


def format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def emit_csv(header: Sequence[str], rows: Iterable[Sequence], path) -> Path:
    """UTF-8 CSV, header row first, floats to 12 significant digits, '\\n' line ends."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    width = len(header)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != width:
                raise ValueError(f"row has {len(row)} cells, header has {width}")
            writer.writerow([format_cell(v) for v in row])
    return path


def print_table(header: Sequence[str], rows: Sequence[Sequence], out=None) -> None:
    out = out or sys.stdout
    cells = [[format_cell(v) if not isinstance(v, float) else format(v, ".6g") for v in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(header)]
    print("  ".join(h.rjust(w) for h, w in zip(header, widths)), file=out)
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)


def theta_header(m: int) -> list[str]:
    return [f"theta_{i + 1}" for i in range(m)]


# -- subcommands ------------------------------------------------------------

def cmd_sir(rc: RunConfig, args) -> int:
    sol = solve_sir(rc.system, rc.profile, rc.tol)
    load = rc.system.alpha * float((rc.profile.fractions * rc.profile.tx_probs).sum())
    print(f"receiver    {rc.system.receiver.value}")
    print(f"eta         {sol.eta:.12g}")
    print(f"load        {load:.12g}")
    print(f"regime      {sol.regime.value}")
    print(f"iterations  {sol.iterations}")
    print(f"residual    {sol.residual:.3g}")
    if sol.assumes_gaussian_chips:
        note = "" if rc.system.chip_model.value == "gaussian" else " (configured chips are binary)"
        print(f"note        overloaded decorrelator formula assumes Gaussian chips{note}")
    return EXIT_OK


CAPACITY_HEADER = ("class", "power", "fraction", "tx_prob", "link_capacity", "coded_rate", "eb_n0", "eb_n0_db")


def _capacity_rows(report):
    return [(m.index + 1, m.power, m.fraction, m.tx_prob, m.link_capacity, m.coded_rate, m.eb_n0, m.eb_n0_db)
            for m in report.per_class]


def cmd_capacity(rc: RunConfig, args) -> int:
    report = capacity_report(rc.system, rc.profile, rc.tol)
    rows = _capacity_rows(report)
    print(f"receiver {rc.system.receiver.value}  eta {report.eta:.12g}  load {report.load:.12g}  "
          f"C {report.spectral_efficiency:.12g} bits/s/Hz")
    print_table(CAPACITY_HEADER, rows)
    path = emit_csv(CAPACITY_HEADER, rows, Path(rc.output) / f"capacity_{rc.system.receiver.value}.csv")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(rc: RunConfig, args) -> int:
    rows = sweep_grid(rc.system, rc.profile, rc.grid_step, rc.tol)
    best = grid_argmax(rows)
    header = theta_header(len(rc.profile)) + ["eta", "load", "C"]
    path = emit_csv(header, [(*r.thetas, r.eta, r.load, r.c) for r in rows],
                    Path(rc.output) / f"sweep_{rc.system.receiver.value}.csv")
    n_bad = sum(not r.feasible for r in rows)
    print(f"receiver {rc.system.receiver.value}: {len(rows)} grid points, {n_bad} infeasible")
    print(f"argmax theta = {tuple(round(t, 12) for t in best.thetas)}  C = {best.c:.12g}  eta = {best.eta:.12g}"
          "  (ties -> lexicographically largest theta)")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_optimize(rc: RunConfig, args) -> int:
    res = optimize_mac(rc.system, rc.profile, refine_tol=args.refine_tol, max_rounds=args.max_rounds, tol=rc.tol)
    print(f"receiver     {rc.system.receiver.value}")
    print(f"grid argmax  {res.grid_argmax}  C = {res.grid_c:.12g}")
    print(f"theta*       ({', '.join(format(t, '.6f') for t in res.theta_star)})")
    print(f"C*           {res.c_star:.12g}")
    print(f"eta*         {res.eta_star:.12g}")
    print(f"rounds       {res.rounds}")
    print(f"evaluations  {res.evaluations}")
    header = ["step"] + theta_header(len(rc.profile)) + ["C"]
    path = emit_csv(header, [(i, *th, c) for i, (th, c) in enumerate(res.trace)],
                    Path(rc.output) / f"optimize_{rc.system.receiver.value}.csv")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(rc: RunConfig, args) -> int:
    if rc.sim is None:
        raise ConfigError("sim: section (or --spreading-gain) required for simulate")
    summary = run_trials(rc.sim, rc.system, rc.profile, rc.probe_class, workers=args.workers,
                         cross_check=args.cross_check)
    tc = rc.sim
    print(f"N = {tc.spreading_gain}, K = {tc.users}, {tc.trials} trials x {tc.slots} slots, "
          f"seed {tc.seed}, {tc.chip_model.value} chips, probe power {summary.probe_power:.6g}")
    rows = []
    for r in RECEIVERS:
        target = summary.theoretical_sir[r]
        rows.append((r.value, summary.sir_mean[r], summary.sir_std[r],
                     math.nan if target is None else target, summary.relative_error(r)))
    print_table(("receiver", "mean_sir", "std_sir", "limit_sir", "rel_error"), rows)
    print(f"load mean {summary.load_mean:.6g} (std {summary.load_std:.3g}), "
          f"limit {rc.system.alpha * float((rc.profile.fractions * rc.profile.tx_probs).sum()):.6g}")
    print(f"loaded-power KS distance {summary.ks_distance:.4g}; numerical warnings {summary.warnings}")
    path = emit_csv(SAMPLE_HEADER, sample_rows(summary.samples), Path(rc.output) / "samples.csv")
    print(f"wrote {path}")
    return EXIT_OK


QUEUE_HEADER = ("queue", "arrival_rate", "service_prob", "stability", "q0", "q0_sim", "q0_halfwidth",
                "mean_length", "mean_length_sim", "departure_rate_sim", "sojourn", "sojourn_sim")


def _queue_params(rc: RunConfig) -> tuple[QueueParams, ...]:
    if rc.queue:
        return rc.queue
    derived = tuple(QueueParams(c.arrival_rate, c.tx_prob) for c in rc.profile.classes
                    if c.arrival_rate is not None and c.tx_prob > 0)
    if not derived:
        raise ConfigError("queue: no queue section and no class with arrival_rate")
    return derived


def cmd_queue(rc: RunConfig, args) -> int:
    rows = []
    for i, qp in enumerate(_queue_params(rc)):
        qa = queue_analytics(qp)
        sim = simulate_queue(qp, args.queue_slots, seed=(args.seed or 0) + i,
                             keep_trace=args.trace)
        half = 3.0 * sim.std_error(sim.q0)
        rows.append((i + 1, qp.arrival_rate, qp.service_prob, qa.stable.value, qa.q0, sim.q0, half,
                     qa.mean_length, sim.mean_length, sim.departure_rate, qa.mean_sojourn, sim.mean_sojourn))
        if args.trace:
            emit_csv(TRACE_HEADER, sim.trace, Path(rc.output) / f"queue_trace_{i + 1}.csv")
        if qa.stable is not Stability.STABLE:
            print(f"queue {i + 1}: {qa.stable.value} (lambda >= theta); length after "
                  f"{args.queue_slots} slots = {sim.final_length}")
    print(f"{args.queue_slots} slots per queue; q0_halfwidth is 3 naive binomial standard errors")
    print_table(("queue", "lambda", "theta", "state", "q0", "q0_sim", "+-", "L", "L_sim", "dep_sim",
                 "sojourn", "sojourn_sim"), rows)
    path = emit_csv(QUEUE_HEADER, rows, Path(rc.output) / "queue.csv")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_stable_capacity(rc: RunConfig, args) -> int:
    res = stable_system_capacity(rc.system, rc.profile, rc.tol)
    rep = res.report
    print(f"receiver {rc.system.receiver.value}  eta {rep.eta:.12g}  load {rep.load:.12g}  "
          f"C {rep.spectral_efficiency:.12g} bits/s/Hz (theta replaced by arrival rate)")
    header = ("class", "arrival_rate", "tx_prob", "q0", "mean_length", "info_rate", "link_capacity", "eb_n0_db")
    rows = [(i + 1, q.arrival_rate, q.service_prob, q.q0, q.mean_length, r, t, m.eb_n0_db)
            for i, (q, r, t, m) in enumerate(zip(res.queues, res.info_rates, res.link_capacities, rep.per_class))]
    print_table(header, rows)
    path = emit_csv(header, rows, Path(rc.output) / f"stable_capacity_{rc.system.receiver.value}.csv")
    print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {
    "sir": cmd_sir,
    "capacity": cmd_capacity,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "queue": cmd_queue,
    "stable-capacity": cmd_stable_capacity,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--receiver", choices=[r.value for r in Receiver])
    common.add_argument("--grid-step", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int, metavar="U64")
    common.add_argument("--spreading-gain", type=int)
    common.add_argument("--slots", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="cdma-ra", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sir", parents=[common], help="limit unit-power SIR")
    sub.add_parser("capacity", parents=[common], help="spectral efficiency and per-class metrics")
    sub.add_parser("sweep", parents=[common], help="spectral efficiency over a MAC grid")
    p = sub.add_parser("optimize", parents=[common], help="optimal MAC by coordinate ascent")
    p.add_argument("--refine-tol", type=float, default=1e-6)
    p.add_argument("--max-rounds", type=int, default=50)
    p = sub.add_parser("simulate", parents=[common], help="finite-system Monte Carlo")
    p.add_argument("--probe-class", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--cross-check", action="store_true")
    p = sub.add_parser("queue", parents=[common], help="queue analytics against simulation")
    p.add_argument("--queue-slots", type=int, default=DEFAULT_QUEUE_SLOTS)
    p.add_argument("--trace", action="store_true", help="also write per-slot queue traces")
    sub.add_parser("stable-capacity", parents=[common], help="capacity with theta replaced by arrival rates")
    return parser


def apply_overrides(rc: RunConfig, args) -> RunConfig:
    if args.receiver:
        rc = rc.with_receiver(args.receiver)
    if args.out:
        rc = replace(rc, output=args.out)
    if args.grid_step is not None:
        rc = replace(rc, grid_step=args.grid_step)
    if args.tol is not None:
        rc = replace(rc, tol=args.tol)
    if getattr(args, "probe_class", None) is not None:
        rc = replace(rc, probe_class=args.probe_class)
    sim_flags = {k: v for k, v in (("spreading_gain", args.spreading_gain), ("slots", args.slots),
                                   ("trials", args.trials), ("seed", args.seed)) if v is not None}
    if sim_flags:
        if rc.sim is None:
            if "spreading_gain" not in sim_flags:
                sim_flags = {}
            else:
                rc = replace(rc, sim=TrialConfig(alpha=rc.system.alpha, chip_model=rc.system.chip_model,
                                                 **sim_flags))
                sim_flags = {}
        if sim_flags:
            rc = replace(rc, sim=replace(rc.sim, **sim_flags))
    return rc


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = apply_overrides(load_config(args.config), args)
        return COMMANDS[args.command](rc, args)
    except (ConfigError, ResourceError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ModelDomainError as e:
        print(f"model-domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

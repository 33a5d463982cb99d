"""Command-line entry point: ``fdsecrecy {solve,sweep,trace,selftest}``.

Exit codes::

    0   success
    1   runtime error (solver failure, I/O error)
    2   infeasible instance
    64  usage error (bad flag, bad config key or value)
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time

from . import __version__
from .harness import (
    PARAMS,
    SweepSpec,
    default_grid,
    derive_seed,
    gen_channels,
    load_config,
    sweep,
    write_csv,
)
from .baselines import SCHEMES
from .model import ContractError, InfeasibleError, check_design, full_report, is_feasible
from .receiver import optimal_receiver
from .selftest import FAULTS, run_selftest
from .spca import SpcaError, spca_solve_full

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_USAGE = 64

log = logging.getLogger("fdsecrecy")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _overrides(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise UsageError(f"override {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _resolve(args):
    ov = _overrides(args.set)
    for key in ("param", "trials", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            ov[key] = val
    if getattr(args, "grid", None):
        ov["grid"] = args.grid
    try:
        return load_config(args.config, ov)
    except ContractError as exc:
        raise UsageError(str(exc)) from exc


def _banner(cmd, cfg, settings, out=None):
    items = " ".join(f"{k}={v!r}" for k, v in cfg.as_dict().items())
    extra = " ".join(f"{k}={v!r}" for k, v in sorted(settings.items()))
    print(f"# fdsecrecy {__version__} {cmd} | {items} | {extra}", file=out or sys.stdout)


def _instance(cfg, settings):
    seed = settings.get("seed", 0)
    return gen_channels(cfg, derive_seed(seed, 0)), seed


def cmd_solve(args) -> int:
    cfg, settings = _resolve(args)
    _banner("solve", cfg, settings)
    ch, _ = _instance(cfg, settings)
    if not is_feasible(ch, cfg):
        print("infeasible: energy requirement exceeds the harvestable maximum")
        return EXIT_INFEASIBLE
    res = spca_solve_full(ch, cfg)
    w = optimal_receiver(ch, res.design, cfg)
    rep = full_report(ch, res.design, w, cfg)
    viol = check_design(res.design, ch, cfg)
    print(f"sum_secrecy_rate_bits {rep.r_sum:.10g}")
    print(f"downlink_secrecy_bits {rep.r_d_sec:.10g}")
    print(f"uplink_secrecy_bits {rep.r_u_sec:.10g}")
    print(f"gamma_d {rep.gamma_d:.10g}")
    print(f"gamma_u {rep.gamma_u:.10g}")
    print(f"gamma_idle_downlink {rep.gamma_i_d:.10g}")
    print(f"gamma_idle_uplink {rep.gamma_i_u:.10g}")
    print(f"harvested_energy_w {rep.energy:.10g}")
    print(f"energy_margin_w {rep.energy - cfg.e_min:.10g}")
    print(f"power_margin_w {cfg.p_bs - res.design.total_power:.10g}")
    print(f"constraint_violation_power {viol['power']:.3e}")
    print(f"constraint_violation_energy {viol['energy']:.3e}")
    print(f"iterations {res.trace.iterations}")
    print(f"termination {res.trace.termination}")
    return EXIT_OK


def cmd_trace(args) -> int:
    cfg, settings = _resolve(args)
    _banner("trace", cfg, settings)
    ch, _ = _instance(cfg, settings)
    if not is_feasible(ch, cfg):
        print("infeasible: energy requirement exceeds the harvestable maximum")
        return EXIT_INFEASIBLE
    res = spca_solve_full(ch, cfg)
    rows = []
    prev = res.trace.u0
    print(f"{'iter':>4} {'u_bits':>14} {'rel_improvement':>16} {'kkt_residual':>13}")
    for k, r in enumerate(res.trace.records, 1):
        rel = (r.u - prev) / prev if prev >= 1e-9 else r.u - prev
        print(f"{k:>4} {r.u:>14.9f} {rel:>16.3e} {r.kkt:>13.3e}")
        rows.append([k, f"{r.u:.10g}", f"{rel:.10g}", f"{r.kkt:.10g}", r.status])
        prev = r.u
    print(f"termination {res.trace.termination}")
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["iteration", "u_bits", "rel_improvement", "kkt_residual", "status"])
                w.writerows(rows)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_ERROR
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, settings = _resolve(args)
    param = settings.get("param")
    if param not in PARAMS:
        raise UsageError(f"sweep needs --param in {PARAMS}, got {param!r}")
    try:
        spec = SweepSpec(
            param=param,
            grid=tuple(settings.get("grid") or default_grid(param)),
            trials=settings.get("trials", 200),
            schemes=tuple(settings.get("schemes", SCHEMES)),
            base=cfg,
            seed=settings.get("seed", 0),
        )
    except ContractError as exc:
        raise UsageError(str(exc)) from exc
    if not args.out:
        raise UsageError("sweep needs --out PATH")
    _banner("sweep", cfg, {**settings, "grid": list(spec.grid), "trials": spec.trials})
    t0 = time.perf_counter()
    res = sweep(spec, threads=args.threads,
                progress=lambda v: log.info("grid value %g done (%.0fs)", v,
                                            time.perf_counter() - t0))
    write_csv(res, args.out)
    print(f"{'value':>12} {'scheme':>12} {'mean_bits':>10} {'stderr':>8} {'ok':>4} {'inf':>4} {'fail':>4}")
    for v in spec.grid:
        for s in spec.schemes:
            st = res.stats[(v, s)]
            print(f"{v:>12.6g} {s:>12} {st.mean:>10.4f} {st.stderr:>8.4f} "
                  f"{st.n_ok:>4} {st.n_infeasible:>4} {st.n_failed:>4}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    cfg, settings = _resolve(args)
    seed = settings.get("seed", 12345)
    _banner("selftest", cfg, {"seed": seed, "fault": args.inject_fault})
    ok = run_selftest(seed=seed, fault=args.inject_fault)
    print("selftest", "passed" if ok else "FAILED")
    return EXIT_OK if ok else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key (repeatable); wins over the file")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output path")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = _Parser(prog="fdsecrecy", description="Full-duplex SWIPT sum secrecy rate optimizer.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="optimize one channel realization")
    sub.add_parser("trace", parents=[common], help="print the per-iteration convergence trace")
    sw = sub.add_parser("sweep", parents=[common], help="Monte Carlo sweep to CSV")
    sw.add_argument("--param", choices=PARAMS)
    sw.add_argument("--grid", help="comma-separated grid values")
    sw.add_argument("--trials", type=int)
    sw.add_argument("--threads", type=int, default=1, help="worker thread cap")
    st = sub.add_parser("selftest", parents=[common], help="fast invariant checks")
    st.add_argument("--inject-fault", choices=FAULTS, help=argparse.SUPPRESS)
    return p


_COMMANDS = {"solve": cmd_solve, "trace": cmd_trace, "sweep": cmd_sweep, "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"fdsecrecy: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}")
        return EXIT_INFEASIBLE
    except (SpcaError, OSError, ArithmeticError, RuntimeError) as exc:
        print(f"fdsecrecy: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

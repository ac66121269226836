"""Command-line front end: one experiment per invocation.

Each subcommand writes its payload files (JSON and CSV) plus a manifest
recording the subcommand, full parameter set, seed, tool version, timestamps,
and SHA-256 digests of the payloads.  Payload bytes are a pure function of
the arguments, so replaying a saved manifest (``--manifest run.manifest.json``)
reproduces them byte for byte; only the manifest's clock fields differ.

Exit codes: 0 success, 2 usage or domain error, 3 capacity cap exceeded,
4 numeric non-convergence, 1 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
from fractions import Fraction
from pathlib import Path

from .coupling import (
    DEFAULT_CAP_FACTOR,
    coupling_trials,
    coupon_collector,
    increasing_bottom_statistic,
    lazy_trial_wrapper,
    single_card_lower_bound,
    tail_estimate,
    trial_rng,
)
from .errors import CapacityError, NumericError, UnreachableTargetError
from .exact import (
    EIGEN_CAP,
    least_eigenvalue_formula,
    mixing_time,
    spectrum,
    transfer_checks,
)
from .flows import (
    build_flow_general,
    build_flow_large_k,
    build_flow_rudvalis,
    build_odd_flow_tbk,
    comparison_bound_report,
    congestion_A,
    dirichlet_form,
    flow_report_rows,
    flow_to_json_obj,
    general_congestion_bound,
    large_k_congestion_bound,
    odd_flow_eigenvalue_bound,
    rudvalis_congestion_bound,
    verify_flow,
)
from .measures import (
    lazy,
    random_transposition,
    rudvalis_symmetric,
    symmetrize,
    top_to_bottom_k,
)
from .report import RunManifest, csv_bytes, json_bytes
from .wilson import wilson_report


class _Sink:
    """Writes payload files under one directory, recording their digests."""

    def __init__(self, out_dir, manifest: RunManifest):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.manifest = manifest

    def _write(self, name: str, data: bytes) -> Path:
        path = self.dir / name
        path.write_bytes(data)
        self.manifest.add_output(path, data)
        return path

    def json(self, name: str, obj) -> Path:
        return self._write(name, json_bytes(obj))

    def csv(self, name: str, header, rows) -> Path:
        return self._write(name, csv_bytes(header, rows))


# ---------------------------------------------------------------------------
# measure selection shared by exact and spectrum


def _build_measure(args):
    """(measure, label, stem tag) from --measure / --n / --k / --p."""
    name = args.measure
    n = args.n
    if name in ("tbk", "sym", "lazy"):
        if args.k is None:
            raise ValueError(f"--k is required for measure {name!r}")
        q = top_to_bottom_k(n, args.k)
        if name == "sym":
            return symmetrize(q), f"sym(n={n},k={args.k})", f"k{args.k}_sym"
        if name == "lazy":
            p = Fraction(args.p)
            label = f"lazy(n={n},k={args.k},p={p})"
            return lazy(q, p), label, f"k{args.k}_lazy{p.numerator}-{p.denominator}"
        return q, f"tbk(n={n},k={args.k})", f"k{args.k}_tbk"
    if name == "rt":
        return random_transposition(n), f"rt(n={n})", "rt"
    return rudvalis_symmetric(n), f"rudvalis(n={n})", "rudvalis"


# ---------------------------------------------------------------------------
# subcommand handlers; each returns the output stem


def _cmd_exact(args, sink: _Sink) -> str:
    q, label, tag = _build_measure(args)
    rep = mixing_time(q, args.metric, args.mmax, label=label)
    stem = f"exact_n{args.n}_{tag}_{args.metric}"
    sink.json(f"{stem}.json", rep)
    sink.csv(f"{stem}.csv", ("m", "distance"), rep.profile)
    return stem


def _cmd_spectrum(args, sink: _Sink) -> str:
    q, label, tag = _build_measure(args)
    rep = spectrum(q, allow_n7=args.allow_n7)
    payload = {
        "n": args.n,
        "measure": label,
        "count": int(rep.eigenvalues.size),
        "beta_min": rep.beta_min,
        "spectral_gap": rep.spectral_gap,
        "eigenvalues": rep.eigenvalues,
    }
    if args.measure == "sym":
        formula = least_eigenvalue_formula(args.n, args.k)
        payload["formula_value"] = formula
        payload["formula_holds"] = rep.beta_min >= float(formula) - 1e-12
    stem = f"spectrum_n{args.n}_{tag}"
    sink.json(f"{stem}.json", payload)
    sink.csv(f"{stem}.csv", ("index", "eigenvalue"),
             list(enumerate(rep.eigenvalues.tolist())))
    return stem


def _tail_points(args) -> list[float]:
    points = [float(m) for m in (args.tail or [])]
    nlogn = args.n * math.log(args.n)
    points += [mult * nlogn for mult in (args.tail_mult or [])]
    return points


def _cmd_couple(args, sink: _Sink) -> str:
    stats = coupling_trials(args.n, args.k, args.kind, args.trials,
                            seed=args.seed, cap=args.cap, engine=args.engine)
    if args.lazy_p is not None:
        stats = [lazy_trial_wrapper(s, args.lazy_p, args.seed) for s in stats]
    times = [s.coupling_time for s in stats]
    payload = {
        "n": args.n,
        "k": args.k,
        "kind": args.kind,
        "trials": args.trials,
        "seed": args.seed,
        "cap": args.cap if args.cap is not None else DEFAULT_CAP_FACTOR * args.n**3,
        "engine": args.engine,
        "lazy_p": args.lazy_p,
        "censored": sum(s.censored for s in stats),
        "mean_coupling_time": statistics.fmean(times),
        "n_log_n": args.n * math.log(args.n),
        "tails": [],
    }
    for m in _tail_points(args):
        p_hat, se = tail_estimate(stats, m)
        payload["tails"].append({"m": m, "p_hat": p_hat, "stderr": se})
    stem = f"couple_{args.kind}_n{args.n}_k{args.k}"
    sink.json(f"{stem}.json", payload)
    sink.csv(f"{stem}.csv", ("trial", "coupling_time", "censored"),
             [(s.trial, s.coupling_time, s.censored) for s in stats])
    if args.tail_grid is not None:
        rows = []
        for m in range(args.tail_grid + 1):
            p_hat, se = tail_estimate(stats, m)
            rows.append((m, p_hat, se))
        sink.csv(f"{stem}.tails.csv", ("m", "p_hat", "stderr"), rows)
    return stem


def _cmd_collector(args, sink: _Sink) -> str:
    summary = coupon_collector(args.n, args.j, args.trials, args.seed)
    payload = {
        "n": summary.n,
        "j": summary.j,
        "trials": summary.trials,
        "seed": args.seed,
        "mean": summary.mean,
        "stderr": summary.stderr,
        "mean_over_n_log_n": summary.mean / (args.n * math.log(args.n)),
    }
    stem = f"collector_n{args.n}_j{args.j}"
    sink.json(f"{stem}.json", payload)
    sink.csv(f"{stem}.csv", ("trial", "l_j"), list(enumerate(summary.times)))
    return stem


def _cmd_lowerbound(args, sink: _Sink) -> str:
    if args.method == "single-card":
        if args.steps is None:
            raise ValueError("--steps is required for the single-card method")
        rep = single_card_lower_bound(args.n, args.k, args.steps, args.trials,
                                      seed=args.seed)
        payload = {
            "method": args.method,
            "seed": args.seed,
            "trials": args.trials,
            "report": rep,
        }
    else:
        if args.m is not None:
            m = args.m
        elif args.m_mult is not None:
            m = args.m_mult * args.n * math.log(args.n)
        else:
            raise ValueError("one of --m or --m-mult is required")
        est = increasing_bottom_statistic(args.n, args.k, args.j, m,
                                          args.trials, seed=args.seed)
        payload = {
            "method": args.method,
            "n": args.n,
            "k": args.k,
            "j": args.j,
            "m": m,
            "trials": args.trials,
            "seed": args.seed,
            "estimate": est,
        }
    stem = f"lowerbound_{args.method}_n{args.n}_k{args.k}"
    sink.json(f"{stem}.json", payload)
    return stem


def _cmd_wilson(args, sink: _Sink) -> str:
    payload = wilson_report(args.n, args.eps, samples=args.samples,
                            r_samples=args.r_samples, seed=args.seed)
    stem = f"wilson_n{args.n}"
    sink.json(f"{stem}.json", payload)
    return stem


def _build_flow(args):
    """(flow, printed-bound dict, stem tag) for the selected builder."""
    if args.builder == "large-k":
        if args.C is None:
            raise ValueError("--C is required for the large-k builder")
        flow = build_flow_large_k(args.n, args.C)
        printed = large_k_congestion_bound(args.C)
        return flow, {"printed": printed, "printed_doubled": 2 * printed}, f"C{args.C}"
    if args.k is None:
        raise ValueError(f"--k is required for the {args.builder} builder")
    tag = f"k{args.k}"
    if args.builder == "general":
        flow = build_flow_general(args.n, args.k)
        printed = general_congestion_bound(args.n, args.k)
        return flow, {"printed": printed, "printed_doubled": 2 * printed}, tag
    if args.builder == "rudvalis":
        flow = build_flow_rudvalis(args.n, args.k)
        return flow, {"printed": rudvalis_congestion_bound(args.n, args.k)}, tag
    return build_odd_flow_tbk(args.n, args.k), {}, tag


def _cmd_flow(args, sink: _Sink) -> str:
    flow, bounds, tag = _build_flow(args)
    rep = congestion_A(flow, lower_bound=args.lower_bound, bounds=bounds)
    payload = {
        "builder": args.builder,
        "n": args.n,
        "a_value": rep.a_value,
        "a_float": rep.a_float,
        "comparisons": rep.comparisons,
        "lower_bound": rep.lower_bound,
        "paths": len(flow.paths),
    }
    if args.builder == "large-k":
        payload["C"] = args.C
    else:
        payload["k"] = args.k
    if args.builder == "rudvalis":
        payload["printed_exact_holds"] = rep.a_value <= bounds["printed"]
    if args.builder == "odd":
        bound = odd_flow_eigenvalue_bound(flow)
        payload["eigenvalue_bound"] = bound
        payload["eigenvalue_bound_float"] = float(bound)
        if args.n <= EIGEN_CAP:
            exact = spectrum(flow.q).beta_min
            payload["exact_beta_min"] = exact
            payload["bound_le_exact"] = float(bound) <= exact + 1e-12
    if args.verify:
        check = verify_flow(flow)
        if not check.exact:
            raise ValueError(
                f"flow marginals disagree with the target on "
                f"{len(check.discrepancies)} atoms")
        payload["verified"] = True
    if args.dirichlet:
        size = math.factorial(args.n)
        if args.n > EIGEN_CAP:
            raise CapacityError(
                f"n={args.n} exceeds the dense cap {EIGEN_CAP} for Dirichlet trials")
        violations = 0
        worst = 0.0
        for t in range(args.dirichlet):
            f = trial_rng(args.seed, t).standard_normal(size)
            e_target = dirichlet_form(f, flow.target)
            e_letters = dirichlet_form(f, flow.q)
            if e_target > rep.a_float * e_letters * (1 + 1e-9) + 1e-12:
                violations += 1
            if e_letters > 0:
                worst = max(worst, e_target / (rep.a_float * e_letters))
        payload["dirichlet"] = {
            "trials": args.dirichlet,
            "seed": args.seed,
            "violations": violations,
            "max_ratio_over_a": worst,
        }
    if args.compare_t2 is not None:
        payload["comparison"] = comparison_bound_report(
            args.n, args.k, flow, args.compare_t2)
    stem = f"flow_{args.builder}_n{args.n}_{tag}"
    sink.json(f"{stem}.json", payload)
    header, rows = flow_report_rows(rep)
    sink.csv(f"{stem}.csv", header, rows)
    if args.export_paths:
        sink.json(f"{stem}.flow.json", flow_to_json_obj(flow))
    return stem


def _cmd_transfer(args, sink: _Sink) -> str:
    eps_grid = tuple(float(x) for x in args.eps_grid.split(",") if x)
    rep = transfer_checks(args.n, args.k, Fraction(args.p), eps_grid, args.mmax)
    stem = f"transfer_n{args.n}_k{args.k}"
    sink.json(f"{stem}.json", rep)
    sink.csv(f"{stem}.csv", ("eps", "lazy_t", "bound", "holds"), rep.lazy_rows)
    return stem


_HANDLERS = {
    "exact": _cmd_exact,
    "spectrum": _cmd_spectrum,
    "couple": _cmd_couple,
    "collector": _cmd_collector,
    "lowerbound": _cmd_lowerbound,
    "wilson": _cmd_wilson,
    "flow": _cmd_flow,
    "transfer": _cmd_transfer,
}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shufflemix",
        description="Mixing-time experiments for top to bottom-k shuffles.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add(name, help_text, seeded=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", default=".", help="output directory")
        if seeded:
            p.add_argument("--seed", type=int, default=0)
        return p

    def measure_flags(p, default):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--k", type=int)
        p.add_argument("--measure", default=default,
                       choices=("tbk", "sym", "lazy", "rt", "rudvalis"))
        p.add_argument("--p", default="1/2", help="laziness, a fraction like 1/2")

    p = add("exact", "dense distance profile and mixing time")
    measure_flags(p, "tbk")
    p.add_argument("--metric", choices=("tv", "l2"), default="tv")
    p.add_argument("--mmax", type=int, default=200)

    # the spectrum is for reversible walks, so the symmetrized measure is the
    # default here
    p = add("spectrum", "full transition spectrum at small n")
    measure_flags(p, "sym")
    p.add_argument("--allow-n7", action="store_true",
                   help="permit the 5040-state eigendecomposition")

    p = add("couple", "Monte Carlo coupling times", seeded=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kind", default="bottom_k_to_top",
                   choices=("bottom_k_to_top", "top_insert"))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--cap", type=int, default=None,
                   help="censoring cap in steps (default 50 n^3)")
    p.add_argument("--engine", default="auto",
                   choices=("auto", "sequential", "lockstep"))
    p.add_argument("--lazy-p", type=float, default=None,
                   help="thin each trial to a p-lazy clock")
    p.add_argument("--tail", type=float, action="append",
                   help="report P(T > m) at this m; repeatable")
    p.add_argument("--tail-mult", type=float, action="append",
                   help="report P(T > c n ln n) at this c; repeatable")
    p.add_argument("--tail-grid", type=int, default=None,
                   help="also write P(T > m) for every m up to this bound")

    p = add("collector", "coupon-collector stopping times", seeded=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--j", type=int, default=0,
                   help="stop when all but j labels have been drawn")
    p.add_argument("--trials", type=int, default=200)

    p = add("lowerbound", "Monte Carlo distance lower bounds", seeded=True)
    p.add_argument("--method", required=True,
                   choices=("single-card", "increasing-bottom"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--steps", type=int, default=None,
                   help="walk length for the single-card method")
    p.add_argument("--j", type=int, default=6,
                   help="residual block size for increasing-bottom")
    p.add_argument("--m", type=float, default=None,
                   help="step count for increasing-bottom")
    p.add_argument("--m-mult", type=float, default=None,
                   help="step count as a multiple of n ln n")

    p = add("wilson", "near-eigenfunction parameters and step bound", seeded=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.9)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--r-samples", type=int, default=4_000)

    p = add("flow", "Cayley-graph flow congestion and comparisons", seeded=True)
    p.add_argument("--builder", required=True,
                   choices=("general", "large-k", "rudvalis", "odd"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--C", type=int, default=None,
                   help="bottom-block margin for the large-k builder")
    p.add_argument("--verify", action="store_true",
                   help="check flow marginals against the target exactly")
    p.add_argument("--lower-bound", action="store_true",
                   help="include the distance-squared congestion floor")
    p.add_argument("--dirichlet", type=int, default=None,
                   help="check E_target <= A E_letters on this many seeded f")
    p.add_argument("--compare-t2", type=int, default=None,
                   help="reference T2 of the target walk; emits the full bound")
    p.add_argument("--export-paths", action="store_true",
                   help="also write the flow's paths as JSON")

    p = add("transfer", "reversed-pair and lazy mixing-time transfer")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", default="1/2", help="laziness, a fraction like 1/2")
    p.add_argument("--eps-grid", default="0.1,0.5,0.9")
    p.add_argument("--mmax", type=int, default=400)

    return parser


# ---------------------------------------------------------------------------
# entry points


def _strip_flag(argv: list[str], flag: str) -> list[str]:
    out = []
    skip = False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == flag:
            skip = True
            continue
        out.append(a)
    return out


def _replay_argv(argv: list[str]) -> list[str]:
    rp = argparse.ArgumentParser(prog="shufflemix --manifest")
    rp.add_argument("--manifest", required=True)
    rp.add_argument("--out", default=None)
    ns = rp.parse_args(argv)
    manifest = RunManifest.load(ns.manifest)
    stored = list(manifest.argv)
    if ns.out is not None:
        stored = _strip_flag(stored, "--out") + ["--out", ns.out]
    return stored


def _run(argv: list[str]) -> int:
    if "--manifest" in argv:
        argv = _replay_argv(argv)
    args = build_parser().parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("cmd", "out")}
    manifest = RunManifest(
        subcommand=args.cmd,
        argv=list(argv),
        params=params,
        seed=getattr(args, "seed", None),
    )
    manifest.start()
    sink = _Sink(args.out, manifest)
    stem = _HANDLERS[args.cmd](args, sink)
    manifest.finish()
    manifest.write(sink.dir / f"{stem}.manifest.json")
    return 0


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return _run(argv)
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 2
    except (ValueError, UnreachableTargetError) as exc:
        print(f"shufflemix: error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"shufflemix: capacity: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"shufflemix: numeric: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"shufflemix: io: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

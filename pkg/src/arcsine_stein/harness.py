"""Rate-of-convergence experiments and the ``arcsine-stein`` command line.

Subcommands: pmf, simulate, stein-check, wasserstein, rate, odd-time.
Exit status is 0 when every check passes, 1 when an invariant is violated
and 2 on usage errors.  Without ``--out``, output goes to stdout unless
``ARCSINE_STEIN_OUT_DIR`` is set, in which case it is written to
``$ARCSINE_STEIN_OUT_DIR/<subcommand>.<format>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .chung_feller import MAX_EXACT_M, build_pmf, pmf_float
from .exceptions import ResourceError
from .functions import PiecewiseLinear
from .stein import bounds_audit, build_discrete_operator, build_general_operator, paper_weight, solve_stein
from .walk import RNG_NAME, mean_tolerance, simulate_batch
from .wasserstein import StepCdf, lipschitz_lower_bound, optimal_witness, w1_discrete_vs_arcsine, \
    w1_quadrature_oracle

OUT_DIR_ENV = "ARCSINE_STEIN_OUT_DIR"
DEFAULT_GRID = tuple(2**k for k in range(1, 13))
CSV_COLUMNS = ("m", "d_w", "m_times_dw", "mode", "wall_time_ms")

PLATEAU_TOL = 0.05
PLATEAU_POINTS = 4
RATIO_BAND = (0.45, 0.55)
RATIO_FROM_M = 256


@dataclass(frozen=True)
class RateRow:
    m: int
    d_w: float
    m_times_dw: float
    mode: str
    wall_time_ms: float
    mc_estimate: float | None = None


@dataclass(frozen=True)
class RateReport:
    rows: tuple[RateRow, ...]
    config: dict = field(default_factory=dict)
    version: str = __version__

    def __post_init__(self):
        ms = [r.m for r in self.rows]
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise ValueError("rows must be sorted by strictly increasing m")

    @property
    def c_hat(self) -> float:
        """Empirical stand-in for the rate constant: ``max m * d_W`` over the grid."""
        return max((r.m_times_dw for r in self.rows), default=math.nan)

    def ratios(self) -> list[tuple[int, float]]:
        """``(m, d_W(m') / d_W(m))`` for consecutive grid points."""
        return [(a.m, b.d_w / a.d_w) for a, b in zip(self.rows, self.rows[1:])]

    def checks(self, plateau_tol=PLATEAU_TOL, ratio_band=RATIO_BAND, ratio_from=RATIO_FROM_M,
               plateau_points=PLATEAU_POINTS) -> dict[str, bool]:
        """Boundedness, monotone decay, halving ratio and plateau of ``m * d_W``."""
        d = [r.d_w for r in self.rows]
        out = {
            "positive": all(v > 0 for v in d),
            "finite_c_hat": math.isfinite(self.c_hat),
            "monotone_decay": all(b < a for a, b in zip(d, d[1:])),
        }
        doubling = [(m, q) for (m, q), (a, b) in zip(self.ratios(), zip(self.rows, self.rows[1:]))
                    if b.m == 2 * a.m and m >= ratio_from]
        if doubling:
            out["ratio_band"] = all(ratio_band[0] <= q <= ratio_band[1] for _, q in doubling)
        if len(self.rows) >= plateau_points:
            tail = [r.m_times_dw for r in self.rows[-plateau_points:]]
            out["plateau"] = max(tail) / min(tail) - 1.0 <= plateau_tol
        return out

    def to_dict(self):
        return {"version": self.version, "config": self.config, "c_hat": self.c_hat,
                "rows": [asdict(r) for r in self.rows]}


def law_for(m: int, mode: str = "auto"):
    """Law of ``W_m`` as a StepCdf, exact rationals for ``m <= MAX_EXACT_M``."""
    if mode == "auto":
        mode = "exact" if m <= MAX_EXACT_M else "float"
    if mode == "exact":
        if m > MAX_EXACT_M:
            raise ValueError(f"exact mode needs m <= {MAX_EXACT_M}, got m={m}")
        return StepCdf.from_pmf(build_pmf(m)), mode
    if mode == "float":
        return StepCdf.from_probs(np.arange(m + 1) / m, pmf_float(m)), mode
    raise ValueError(f"unknown mode {mode!r}")


def _check_grid(m_grid):
    grid = [int(m) for m in m_grid]
    if not grid:
        raise ValueError("m_grid is empty")
    if any(m < 1 for m in grid):
        raise ValueError("all m must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("m_grid must be strictly increasing")
    return grid


def empirical_w1(counts, n_paths: int, n_steps: int):
    """W1 of an occupation-fraction histogram to arcsine, and a one-sigma error scale.

    The error scale is ``int sqrt(F_n (1 - F_n) / n)``, which bounds the mean
    L1 deviation of the empirical CDF from the true one.
    """
    atoms = np.arange(len(counts)) / n_steps
    law = StepCdf.from_probs(atoms, np.asarray(counts) / n_paths)
    widths = np.diff(np.concatenate([law.atoms, [1.0]]))
    sigma = float(np.sum(widths * np.sqrt(law.cum * (1.0 - law.cum) / n_paths)))
    return w1_discrete_vs_arcsine(law), sigma


def run_rate_experiment(m_grid=DEFAULT_GRID, mode: str = "auto", threads: int = 1,
                        mc_paths: int = 0, seed: int = 0) -> RateReport:
    """``d_W(L(W_m), arcsine)`` for every ``m`` on the grid.

    ``mode`` is ``exact`` (m <= 2000), ``float`` or ``auto``.  With
    ``mc_paths > 0`` a Monte Carlo estimate from that many simulated paths is
    attached to each row.
    """
    grid = _check_grid(m_grid)
    if mode == "exact" and grid[-1] > MAX_EXACT_M:
        raise ValueError(f"exact mode needs max m <= {MAX_EXACT_M}")

    def one(m):
        t0 = time.perf_counter()
        try:
            law, used = law_for(m, mode)
        except MemoryError as exc:
            raise ResourceError(f"out of memory at m={m}: {exc}") from exc
        d = w1_discrete_vs_arcsine(law)
        mc = None
        if mc_paths:
            batch = simulate_batch(m, mc_paths, seed)
            mc, _ = empirical_w1(batch.counts, mc_paths, m)
        return RateRow(m, d, m * d, used, 1e3 * (time.perf_counter() - t0), mc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, grid))
    else:
        rows = [one(m) for m in grid]
    config = {"m_grid": grid, "mode": mode, "mc_paths": mc_paths, "seed": seed}
    return RateReport(tuple(rows), config)


@dataclass(frozen=True)
class OddTimeRow:
    m: int
    d_w_even: float
    d_w_odd_mc: float
    mc_sigma: float
    envelope: float
    max_path_gap: float
    path_bound: float
    within: bool


def run_odd_time_check(m_grid, n_paths: int = 10**5, seed: int = 0, threads: int = 1,
                       k_sigma: float = 3.0) -> list[OddTimeRow]:
    """Monte Carlo distance to arcsine at odd times ``2m + 1``.

    Each estimate must stay below ``d_W(m) + 2/(2m+1) + k_sigma * sigma``, and
    every path must satisfy ``|W_{2m+1} - W_m| <= 2/(2m+1)``.
    """
    grid = _check_grid(m_grid)
    rows = []
    for m in grid:
        law, _ = law_for(m)
        d_even = w1_discrete_vs_arcsine(law)
        batch = simulate_batch(m, n_paths, seed, threads=threads, odd=True)
        d_odd, sigma = empirical_w1(batch.odd_counts, n_paths, 2 * m + 1)
        bound = 2.0 / (2 * m + 1)
        envelope = d_even + bound + k_sigma * sigma
        ok = d_odd <= envelope and batch.odd_max_gap <= bound + 1e-15
        rows.append(OddTimeRow(m, d_even, d_odd, sigma, envelope, batch.odd_max_gap, bound, ok))
    return rows


def emit_report(report: RateReport, fmt: str, path) -> None:
    """Write ``report`` as CSV (fixed columns) or JSON; ``path="-"`` means stdout."""
    text = format_report(report, fmt)
    _write(text, path)


def format_report(report: RateReport, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in report.rows:
            w.writerow([r.m, repr(r.d_w), repr(r.m_times_dw), r.mode, repr(r.wall_time_ms)])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(text: str, fmt: str) -> RateReport:
    """Inverse of ``format_report``.  CSV carries rows only."""
    if fmt == "csv":
        rows = tuple(RateRow(int(d["m"]), float(d["d_w"]), float(d["m_times_dw"]), d["mode"],
                             float(d["wall_time_ms"]))
                     for d in csv.DictReader(io.StringIO(text)))
        return RateReport(rows)
    if fmt == "json":
        data = json.loads(text)
        return RateReport(tuple(RateRow(**r) for r in data["rows"]), data["config"], data["version"])
    raise ValueError(f"unknown format {fmt!r}")


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write to {path}: {exc.strerror or exc}") from exc


# ----------------------------------------------------------------------------- CLI


def _dump(args, payload, csv_header=None, csv_rows=None):
    if args.format == "csv" and csv_header is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(csv_header)
        w.writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    _write(text, _out_path(args))


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(type(o).__name__)


def _out_path(args):
    if args.out:
        return args.out
    outdir = os.environ.get(OUT_DIR_ENV)
    if outdir:
        Path(outdir).mkdir(parents=True, exist_ok=True)
        ext = "json" if args.command == "stein-check" else args.format
        return str(Path(outdir) / f"{args.command}.{ext}")
    return "-"


def _grid_arg(text):
    try:
        grid = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")
    return grid


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def cmd_pmf(args):
    pmf = build_pmf(args.m)
    try:
        pmf.check_invariants()
        ok = True
    except AssertionError:
        ok = False
    rows = [(k, str(p), repr(float(p))) for k, p in enumerate(pmf.probs)]
    _dump(args, {"m": args.m, "invariants_hold": ok,
                 "rows": [{"k": k, "p_exact": e, "p_float": float(f)} for k, e, f in rows]},
          ("k", "p_exact", "p_float"), rows)
    return ok


def cmd_simulate(args):
    batch = simulate_batch(args.m, args.paths, args.seed, threads=args.threads)
    exact = law_for(args.m)[0].probs
    emp = batch.empirical_pmf
    rows = [(k, int(c), repr(float(e)), repr(float(p))) for k, (c, e, p) in enumerate(zip(batch.counts, emp, exact))]
    mean_ok = abs(batch.mean_w() - 0.5) <= mean_tolerance(args.paths)
    ok = batch.lemma_a_violations == 0 and batch.lemma_b_violations == 0 and mean_ok
    _dump(args, {"m": args.m, "paths": args.paths, "seed": args.seed, "rng": RNG_NAME,
                 "lemma_a_violations": batch.lemma_a_violations,
                 "lemma_b_violations": batch.lemma_b_violations,
                 "mean_w": batch.mean_w(), "tv_to_exact": batch.tv_to(exact),
                 "rows": [dict(zip(("k", "count", "empirical_prob", "exact_prob"), r)) for r in rows]},
          ("k", "count", "empirical_prob", "exact_prob"), rows)
    return ok


def cmd_stein_check(args):
    rng = np.random.default_rng(args.seed)
    discrete = []
    for m in range(args.m_min, args.m_max + 1):
        pmf = build_pmf(m)
        ops = {"lemma": build_discrete_operator(m),
               "c=1": build_general_operator(pmf, lambda k: 1),
               "c=k+1": build_general_operator(pmf, lambda k: k + 1),
               "c=paper": build_general_operator(pmf, paper_weight(m))}
        worst = {name: Fraction(0) for name in ops}
        for _ in range(args.family_size):
            vals = [Fraction(int(v), int(d)) for v, d in
                    zip(rng.integers(-50, 51, m + 1), rng.integers(1, 20, m + 1))]
            f = lambda k, vals=vals: Fraction(0) if k < 0 else vals[k]
            for name, op in ops.items():
                worst[name] = max(worst[name], abs(op.expectation(pmf, f)))
        discrete.append({"m": m, "max_abs_expectation": {k: str(v) for k, v in worst.items()},
                         "all_zero": all(v == 0 for v in worst.values())})
    continuous = []
    x = np.arange(1, 1000) / 1000
    for i in range(args.family_size):
        h = PiecewiseLinear.random(rng)
        sol = solve_stein(h)
        a = bounds_audit(h, "bounded", solution=sol)
        b = bounds_audit(h, "lipschitz", solution=sol)
        res = float(np.max(np.abs(sol.residual(x))))
        continuous.append({"index": i, "knots": h.knots.tolist(), "values": h.values.tolist(),
                           "residual": res, "bound_a": a.as_dict(), "bound_b": b.as_dict(),
                           "ok": res <= 1e-8 and a.holds_sharp and b.holds})
    ok = all(r["all_zero"] for r in discrete) and all(r["ok"] for r in continuous)
    args.format = "json"
    _dump(args, {"seed": args.seed, "discrete": discrete, "continuous": continuous, "all_pass": ok})
    return ok


def cmd_wasserstein(args):
    law, mode = law_for(args.m)
    d = w1_discrete_vs_arcsine(law)
    lower = lipschitz_lower_bound(law, [optimal_witness(law)])
    row = {"m": args.m, "mode": mode, "d_w": d, "lower_bound": lower}
    ok = lower <= d + 1e-10
    if args.oracle_nodes:
        row["oracle"] = w1_quadrature_oracle(law, args.oracle_nodes)
        ok = ok and abs(row["oracle"] - d) <= 1.0 / args.oracle_nodes
    row["ok"] = ok
    _dump(args, row, tuple(row), [tuple(repr(v) if isinstance(v, float) else v for v in row.values())])
    return ok


def cmd_rate(args):
    report = run_rate_experiment(args.grid, args.mode, threads=args.threads, mc_paths=args.mc_paths,
                                 seed=args.seed)
    emit_report(report, args.format, _out_path(args))
    checks = report.checks(plateau_tol=args.plateau_tol)
    print(f"C_hat = {report.c_hat:.6f}  " + "  ".join(f"{k}={'pass' if v else 'FAIL'}"
                                                      for k, v in checks.items()), file=sys.stderr)
    return all(checks.values())


def cmd_odd_time(args):
    rows = run_odd_time_check(args.grid, args.paths, args.seed, threads=args.threads)
    header = tuple(OddTimeRow.__dataclass_fields__)
    _dump(args, {"rows": [asdict(r) for r in rows]}, header,
          [tuple(repr(v) if isinstance(v, float) else v for v in asdict(r).values()) for r in rows])
    return all(r.within for r in rows)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--out", default=None, help="output file ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=_positive, default=1)

    parser = argparse.ArgumentParser(prog="arcsine-stein", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", parents=[common], help="exact law of R_m")
    p.add_argument("--m", type=_positive, required=True)
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo histogram of R_m")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--paths", type=_positive, default=10**5)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stein-check", parents=[common], help="discrete and continuous Stein audits (JSON)")
    p.add_argument("--m-min", type=_positive, default=1)
    p.add_argument("--m-max", type=_positive, default=10)
    p.add_argument("--family-size", type=_positive, default=10)
    p.set_defaults(func=cmd_stein_check)

    p = sub.add_parser("wasserstein", parents=[common], help="W1 distance of W_m to arcsine")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--oracle-nodes", type=int, default=0, help="midpoint oracle cells (0: skip)")
    p.set_defaults(func=cmd_wasserstein)

    p = sub.add_parser("rate", parents=[common], help="d_W over a grid of m")
    p.add_argument("--grid", type=_grid_arg, default=list(DEFAULT_GRID), help="comma-separated m values")
    p.add_argument("--mode", choices=("auto", "exact", "float"), default="auto")
    p.add_argument("--mc-paths", type=int, default=0)
    p.add_argument("--plateau-tol", type=float, default=PLATEAU_TOL)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("odd-time", parents=[common], help="Monte Carlo check at odd times 2m+1")
    p.add_argument("--grid", type=_grid_arg, default=[1, 4, 16, 64])
    p.add_argument("--paths", type=_positive, default=10**5)
    p.set_defaults(func=cmd_odd_time)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ok = args.func(args)
    except (ValueError, ResourceError) as exc:
        print(f"arcsine-stein {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"arcsine-stein {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

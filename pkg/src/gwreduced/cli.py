"""Command-line front end.

Subcommands:
  exact      exact reduced-count tables (unconditional or conditioned)
  simulate   conditioned Monte Carlo batches
  limits     limit-law pmf and gf values on grids
  compare    exact vs limit vs Monte Carlo comparison reports
  selftest   closed-form and cross-implementation consistency checks

Exit codes: 0 success, 1 user error (message on stderr), 2 internal
invariant violation (full diagnostic dump on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from math import factorial

from .errors import GWReducedError
from .harness import (
    DEFAULT_S_GRID,
    ExperimentConfig,
    format_report_summary,
    parse_config_file,
    run_experiment,
    write_report_csv,
    write_report_json,
)
from .limits import LimitQuery, Regime
from .offspring import law_from_name
from .reduced import (
    bounded_survival_prob,
    conditional_reduced_pmf,
    joint_reduced_bounded,
    mrca_distance_cdf,
    reduced_pmf,
    write_table_csv,
    write_table_json,
)
from .series import (
    derivative_jet,
    enumerate_partitions,
    extinction_prob,
    iter_derivative_jets,
    pmf_Zn,
)
from .simulate import run_conditioned_batch, write_batch_csv, write_batch_json


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument(
        "--format", choices=("json", "csv"), default="json", help="output format"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwreduced",
        description="exact and simulated reduced critical branching processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact reduced-count table")
    p.add_argument("--law", default="linear_fractional")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--bound", type=int, help="condition on 0 < Z(n) <= bound")
    p.add_argument("--j-max", type=int, help="fixed table length (default adaptive)")
    p.add_argument("--epsilon", type=float, default=1e-9)
    _add_common(p)
    p.set_defaults(handler=_cmd_exact)

    p = sub.add_parser("simulate", help="conditioned Monte Carlo batch")
    p.add_argument("--law", default="linear_fractional")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--m", default="", help="comma-separated query generations")
    p.add_argument("--replicates", type=int, default=1000, help="accepted target")
    p.add_argument("--max-replicates", type=int, default=100_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("limits", help="limit-law values on grids")
    p.add_argument(
        "--regime",
        choices=tuple(r.value for r in Regime),
        default=Regime.SMALL_PHI.value,
    )
    p.add_argument("--x", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--j-max", type=int, help="pmf rows (default adaptive)")
    _add_common(p)
    p.set_defaults(handler=_cmd_limits)

    p = sub.add_parser("compare", help="exact vs limit vs Monte Carlo report")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--regime", choices=tuple(r.value for r in Regime))
    p.add_argument("--law")
    p.add_argument("--n", dest="n_grid", help="comma-separated horizon grid")
    p.add_argument("--x", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--phi", help="window growth: sqrt, n^p, or c*n")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--replicates", type=int)
    p.add_argument("--max-replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    _add_common(p)
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("selftest", help="closed-form consistency checks")
    p.set_defaults(handler=_cmd_selftest)

    return parser


def _emit_json(payload: dict, out) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_exact(args) -> int:
    law = law_from_name(args.law)
    if args.bound is not None:
        table = conditional_reduced_pmf(
            law, args.m, args.n, args.bound, epsilon=args.epsilon, J_max=args.j_max
        )
    else:
        table = reduced_pmf(law, args.m, args.n, epsilon=args.epsilon, J_max=args.j_max)
    if args.out and args.format == "csv":
        write_table_csv(table, args.out)
    elif args.out:
        write_table_json(table, args.out)
    elif args.format == "csv":
        print("j,p")
        for j, p in enumerate(table.pmf, start=1):
            print(f"{j},{float(p)!r}")
    else:
        print(json.dumps(table.to_json_dict(), indent=2))
    return 0


def _cmd_simulate(args) -> int:
    law = law_from_name(args.law)
    queries = [int(tok) for tok in args.m.split(",") if tok.strip()]
    batch = run_conditioned_batch(
        law,
        args.n,
        args.bound,
        queries,
        target_accepted=args.replicates,
        max_replicates=args.max_replicates,
        seed=args.seed,
        workers=args.workers,
    )
    if args.out and args.format == "csv":
        write_batch_csv(batch, args.out)
    elif args.out:
        write_batch_json(batch, args.out)
    elif args.format == "csv":
        header = ["replicate_id", "terminal_size", "mrca_distance"]
        header += [f"reduced_at_{m}" for m in batch.query_generations]
        print(",".join(header))
        for i in range(batch.accepted):
            cells = [
                str(batch.replicate_ids[i]),
                str(batch.terminal_sizes[i]),
                str(batch.mrca_distances[i]),
            ]
            cells += [str(v) for v in batch.reduced_counts[i]]
            print(",".join(cells))
    else:
        print(json.dumps(batch.to_json_dict(), indent=2))
    return 0


def _cmd_limits(args) -> int:
    regime = Regime(args.regime)
    if regime is Regime.SMALL_PHI:
        query = LimitQuery(regime=regime, x=args.x if args.x is not None else 1.0)
        params = {"x": query.x}
    else:
        query = LimitQuery(
            regime=regime,
            t=args.t if args.t is not None else 0.5,
            a=args.a if args.a is not None else 1.0,
        )
        params = {"t": query.t, "a": query.a}
    if args.j_max is not None:
        pmf = [query.pmf(j) for j in range(1, args.j_max + 1)]
    else:
        pmf = [float(p) for p in query.pmf_values()]
    payload = {
        "regime": regime.value,
        **params,
        "pmf": pmf,
        "gf": {repr(s): query.gf(s) for s in DEFAULT_S_GRID},
    }
    if args.format == "csv":
        lines = ["j,p"] + [f"{j},{p!r}" for j, p in enumerate(pmf, start=1)]
        text = "\n".join(lines)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
    else:
        _emit_json(payload, args.out)
    return 0


def _cmd_compare(args) -> int:
    raw = parse_config_file(args.config) if args.config else {}
    overrides = {
        "regime": args.regime,
        "law": args.law,
        "n_grid": args.n_grid,
        "x": args.x,
        "t": args.t,
        "a": args.a,
        "phi": args.phi,
        "epsilon": args.epsilon,
        "replicates": args.replicates,
        "max_replicates": args.max_replicates,
        "seed": args.seed,
        "workers": args.workers,
    }
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
    config = ExperimentConfig.from_mapping(raw)
    report = run_experiment(config)
    if args.out and args.format == "csv":
        write_report_csv(report, args.out)
    elif args.out:
        write_report_json(report, args.out)
    print(format_report_summary(report))
    return 0 if all(v["passed"] for v in report.verdicts) else 1


def _selftest_checks():
    lf = law_from_name("linear_fractional")

    def check_extinction():
        for n in range(0, 101, 10):
            want = n / (n + 1)
            got = extinction_prob(lf, n)
            assert abs(got - want) < 1e-12, (n, got, want)

    def check_population_pmf():
        n, kmax = 50, 120
        series = pmf_Zn(lf, n, kmax)
        base = n / (n + 1)
        for k in range(1, kmax + 1):
            want = (1.0 / (n + 1) ** 2) * base ** (k - 1)
            assert abs(series.coeffs[k] - want) < 1e-12, k

    def check_derivatives():
        for r in (1, 5, 20):
            q = r / (r + 1)
            for n, jet in enumerate(iter_derivative_jets(lf, 60, q, 1)):
                want = (r + 1) ** 2 / (n + r + 1) ** 2
                assert abs(jet.values[1] - want) < 1e-12, (n, r)

    def check_partitions():
        counts = [1, 2, 3, 5, 7, 11, 15, 22, 30, 42]
        for k, want in enumerate(counts, start=1):
            assert len(enumerate_partitions(k)) == want, k

    def check_jet_closed_form():
        n = 5
        for q in (0.3, 2.0 / 3.0, 0.9):
            jet = derivative_jet(lf, n, q, 6)
            for k in range(1, 7):
                want = factorial(k) * n ** (k - 1) / (n + 1 - n * q) ** (k + 1)
                assert abs(jet.values[k] - want) < 1e-9 * want, (q, k)

    def check_duality():
        for x in (0.25, 1.0, 4.0):
            q = LimitQuery(regime=Regime.SMALL_PHI, x=x)
            for s in (0.2, 0.5, 0.8):
                gf = q.gf(s)
                series = sum(
                    s**j * q.pmf(j) for j in range(1, 400)
                )
                assert abs(gf - series) < 1e-10, (x, s)

    def check_decomposition():
        for (m, n, C) in ((2, 6, 2), (3, 9, 3), (5, 12, 4)):
            total = sum(joint_reduced_bounded(lf, m, n, C).pmf)
            want = bounded_survival_prob(lf, n, C)
            assert abs(total - want) < 1e-10, (m, n, C)

    def check_mrca():
        cdf = mrca_distance_cdf(lf, 10, 5, range(0, 11))
        assert all(b >= a - 1e-15 for a, b in zip(cdf, cdf[1:]))
        assert abs(cdf[-1] - 1.0) < 1e-12

    return [
        ("extinction_closed_form", check_extinction),
        ("population_pmf_closed_form", check_population_pmf),
        ("iterate_derivative_closed_form", check_derivatives),
        ("partition_counts", check_partitions),
        ("jet_closed_form", check_jet_closed_form),
        ("limit_gf_pmf_duality", check_duality),
        ("joint_mass_decomposition", check_decomposition),
        ("mrca_cdf_shape", check_mrca),
    ]


def _cmd_selftest(args) -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            check()
        except AssertionError as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"ok   {name}")
    if failures:
        print(f"{failures} selftest check(s) failed")
        return 2
    print("all selftest checks passed")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse handles --help (code 0) and usage errors (code 2);
        # usage problems are user errors here.
        return 0 if not exc.code else 1
    try:
        return args.handler(args)
    except (GWReducedError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        print("internal invariant violation; diagnostic dump follows", file=sys.stderr)
        traceback.print_exc()
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

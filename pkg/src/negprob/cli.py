"""Command-line front end: ``negprob {solve,check-nosignal,dump-constraints,cat-sweep,circuits}``.

Exit codes: 0 success, 2 scenario/input error, 3 signaling (infeasible),
4 solver failure. Set ``NEGPROB_LOG=DEBUG`` (or INFO, ...) for logging.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import circuits, constraints, quantum, scenario
from .errors import InputError, SignalingError, SolverError
from .l1solver import minimize_l1
from .measure import DEFAULT_TOL

log = logging.getLogger("negprob")

EXIT_OK, EXIT_LOAD, EXIT_SIGNALING, EXIT_SOLVER = 0, 2, 3, 4
DEFAULT_SEED = 7


def _parse_hidden(spec: str, model: scenario.EmpiricalModel):
    """``xyz=1`` (one character per variable) or ``X*Y*Z=1`` / ``X,Y,Z=1``."""
    key, sep, value = spec.partition("=")
    if not sep:
        raise InputError(f"--hidden expects NAME=VALUE, got {spec!r}")
    ids = [v.id for v in model.variables]
    if "*" in key or "," in key:
        members = [k.strip() for k in key.replace("*", ",").split(",") if k.strip()]
    else:
        lookup = {i.lower(): i for i in ids}
        try:
            members = [lookup[ch.lower()] for ch in key]
        except KeyError as exc:
            raise InputError(f"--hidden: no variable named {exc.args[0]!r}") from None
    return members, float(scenario.parse_fraction_list(value)[0])


def load_model(args) -> scenario.EmpiricalModel:
    moments = scenario.parse_fraction_list(args.moments) if args.moments else None
    if args.file:
        if moments is not None:
            raise InputError("--moments only applies to --builtin three_dichotomic")
        model = scenario.load(Path(args.file).read_text(), args.tol)
    elif args.builtin:
        model = scenario.builtin(args.builtin, moments)
    else:
        raise InputError("give exactly one of --builtin or --file")
    for spec in args.hidden or []:
        model = model.with_hidden(*_parse_hidden(spec, model))
    return model


def _nosignal_json(report: scenario.NoSignalReport) -> dict:
    return {
        "consistent": report.consistent,
        "violations": [
            {"contexts": list(pair), "shared": list(shared), "outcome": list(idx), "gap": gap}
            for pair, shared, idx, gap in report.violations
        ],
    }


def _atom_dict(space, atom):
    return {v.id: v.labels[o] for v, o in zip(space.variables, atom)}


def _emit(args, name: str, payload: dict, text: str, csv_text: str | None = None) -> None:
    fmt = args.format
    if fmt == "json":
        body = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    elif fmt == "csv" and csv_text is not None:
        body = csv_text
    else:
        body = text
    sys.stdout.write(body)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        if csv_text is not None:
            (out / f"{name}.csv").write_text(csv_text)


def cmd_solve(args) -> int:
    model = load_model(args)
    report = scenario.check_no_signal(model, args.tol)
    system = constraints.build(model, args.tol)
    sol = minimize_l1(system, args.tol)
    payload = {
        "feasible": sol.feasible,
        "no_signal": _nosignal_json(report),
        "iterations": sol.iterations,
    }
    if not sol.feasible:
        _emit(args, "solve", payload, "infeasible: the model signals\n")
        return EXIT_SIGNALING
    space = system.space
    payload.update(
        contextuality=sol.contextuality,
        norm=sol.norm,
        unique_hint=sol.unique_hint,
        residual=sol.residual,
        measure=[{"atom": _atom_dict(space, a), "weight": w} for a, w in sol.measure.items()],
    )
    lines = [
        f"contextuality  {sol.contextuality:.15g}",
        f"minimal norm   {sol.norm:.15g}",
        f"feasible       {sol.feasible}",
        f"unique_hint    {sol.unique_hint}",
        f"no-signal      {report.consistent} ({len(report.violations)} violations)",
        "measure:",
    ]
    for atom, w in sol.measure.items():
        label = " ".join(f"{k}={v}" for k, v in _atom_dict(space, atom).items())
        lines.append(f"  {label:<40s} {w: .15g}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*space.ids, "weight"])
    for atom, w in sol.measure.items():
        writer.writerow([*_atom_dict(space, atom).values(), repr(w)])
    _emit(args, "solve", payload, "\n".join(lines) + "\n", buf.getvalue())
    return EXIT_OK


def cmd_check_nosignal(args) -> int:
    model = load_model(args)
    report = scenario.check_no_signal(model, args.tol)
    payload = _nosignal_json(report)
    lines = [f"consistent {report.consistent}"]
    for pair, shared, idx, gap in report.violations:
        lines.append(f"  {pair[0]} vs {pair[1]} on {','.join(shared)} outcome {idx}: gap {gap:.6g}")
    _emit(args, "nosignal", payload, "\n".join(lines) + "\n")
    return EXIT_OK if report.consistent else EXIT_SIGNALING


def cmd_dump_constraints(args) -> int:
    model = load_model(args)
    system = constraints.build(model, args.tol)
    rank = constraints.rank_report(system)
    payload = {
        "rows": system.shape[0],
        "rows_before_dedup": system.rows_before_dedup,
        "unknowns": rank.unknowns,
        "rank": rank.rank,
        "underdetermined": rank.underdetermined,
        "row_labels": [str(l) for l in system.row_labels],
        "matrix": system.matrix.tolist(),
        "rhs": system.rhs.tolist(),
    }
    text = (
        f"{system.shape[0]} rows ({system.rows_before_dedup} before dedup), "
        f"{rank.unknowns} unknowns, rank {rank.rank}, "
        f"{'underdetermined' if rank.underdetermined else 'determined'}\n"
    )
    _emit(args, "constraints", payload, text, constraints.to_csv(system))
    return EXIT_OK


def cmd_cat_sweep(args) -> int:
    rows = quantum.cat_sweep(args.n, workers=args.workers)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p", "entanglement_entropy", "chsh", "contextuality"])
    for r in rows:
        writer.writerow([repr(x) for x in r])
    payload = {"rows": [r._asdict() for r in rows]}
    text = "\n".join(
        f"p={r.p:.4f}  S={r.entanglement_entropy:.6f}  chsh={r.chsh:.6f}  C={r.contextuality:.6f}"
        for r in rows
    ) + "\n"
    _emit(args, "cat_sweep", payload, text, buf.getvalue())
    return EXIT_OK


def _write_circuit_files(out: Path, stats: circuits.DistributionStats) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "samples.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["circuit_index", "seed", "contextuality", "chsh", "entanglement_entropy"])
        for r in stats.records:
            w.writerow([r.circuit_index, r.seed, repr(r.contextuality), repr(r.chsh), repr(r.entanglement_entropy)])
    with open(out / "histogram.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "prob"])
        for lo, hi, p in zip(stats.bin_edges[:-1], stats.bin_edges[1:], stats.histogram):
            w.writerow([repr(float(lo)), repr(float(hi)), repr(float(p))])
    (out / "summary.json").write_text(json.dumps(stats.summary(), indent=2, sort_keys=True) + "\n")


def cmd_circuits(args) -> int:
    names = [g.strip() for g in args.gates.split(",") if g.strip()]
    for name in names:
        circuits.GateSet.named(name)
    n, depth = args.n, args.depth
    if args.full_scale:
        n, depth = 100_000, 200
        log.warning("full scale: %d circuits of depth %d per gate set", n, depth)
    summary = {"seed": args.seed, "depth": depth, "gate_sets": {}}
    for name in names:
        stats = circuits.experiment(name, n, depth, args.seed, workers=args.workers)
        summary["gate_sets"][name] = stats.summary()
        if args.out:
            _write_circuit_files(Path(args.out) / name, stats)
    entropies = {k: v["shannon_entropy_bits"] for k, v in summary["gate_sets"].items()}
    if "clifford" in entropies and "clifford_t" in entropies:
        c, t = entropies["clifford"], entropies["clifford_t"]
        summary["entropy_ratio_clifford_t_over_clifford"] = t / c if c > 0 else ("inf" if t > 0 else None)
    body = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(body)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "summary.json").write_text(body)
    return EXIT_OK


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", choices=scenario.BUILTINS, help="built-in example scenario")
    src.add_argument("--file", help="scenario JSON document")
    p.add_argument("--moments", help="three_dichotomic moments <X>,<Y>,<Z>,<XY>,<XZ>,<YZ>")
    p.add_argument("--hidden", action="append", metavar="NAME=VALUE",
                   help="hidden product expectation, e.g. xyz=1 (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="negprob", description=__doc__.splitlines()[0])
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="numerical tolerance (default 1e-9)")
    parser.add_argument("--out", help="directory for output files")
    parser.add_argument("--format", choices=("json", "csv", "text"), default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimal-norm signed measure and contextuality")
    _add_source(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check-nosignal", help="compare shared marginals across contexts")
    _add_source(p)
    p.set_defaults(func=cmd_check_nosignal)

    p = sub.add_parser("dump-constraints", help="the linear system A mu = b")
    _add_source(p)
    p.set_defaults(func=cmd_dump_constraints)

    p = sub.add_parser("cat-sweep", help="entanglement / CHSH / contextuality for cat-like states")
    p.add_argument("--n", type=int, default=101, help="grid points on [0, 1/2] (default 101)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_cat_sweep)

    p = sub.add_parser("circuits", help="contextuality distribution of random circuits")
    p.add_argument("--gates", default="clifford,clifford_t",
                   help=f"comma list from {', '.join(circuits.GATE_SETS)}")
    p.add_argument("--n", type=int, default=2000, help="circuits per gate set (default 2000)")
    p.add_argument("--depth", type=int, default=50, help="gates per circuit (default 50)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"default {DEFAULT_SEED}")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--full-scale", action="store_true", help="100000 circuits of depth 200")
    p.set_defaults(func=cmd_circuits)

    # global options are also accepted after the subcommand
    for action in list(sub.choices.values()):
        action.add_argument("--tol", type=float, default=argparse.SUPPRESS)
        action.add_argument("--out", default=argparse.SUPPRESS)
        action.add_argument("--format", choices=("json", "csv", "text"), default=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("NEGPROB_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "cat-sweep" else "text"
    try:
        return args.func(args)
    except SignalingError as exc:
        print(f"signaling: {exc}", file=sys.stderr)
        return EXIT_SIGNALING
    except SolverError as exc:
        print(f"solver failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: ``errprop {gen,graph,exact,solve,sample,sweep,threshold}``.

Tables are written as CSV (``#`` comment lines carry the command line and a
summary) or as a single JSON document.  Exit codes: 0 ok, 1 usage,
2 infeasible or unsatisfiable, 3 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import sys
from typing import Sequence

import numpy as np

from . import analysis as an
from .circuit import Circuit, CircuitError, generate, parse_circuit, serialize_circuit
from .gf2 import BitVector, mat_vec, solve
from .graph import MODES, Rsg, build_epstg, build_rsg, components, export_graph, site_name
from .sampler import family_rsg, sample, sweep

__all__ = ["main", "build_parser", "crossing"]

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Infeasible(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument helpers -------------------------------------------------------


def _params(items: Sequence[str]) -> dict[str, int]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"generator parameter {item!r} is not of the form key=value")
        try:
            out[key] = int(value)
        except ValueError:
            raise UsageError(f"generator parameter {key} needs an integer, got {value!r}") from None
    return out


def _grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(count)]
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; use a,b,c or start:stop:step") from None
    if not values:
        raise UsageError("empty grid")
    return values


def _source(args) -> tuple[str, dict]:
    """Resolve ``--circuit`` / ``--gen`` into (family or 'file', params)."""
    if bool(args.circuit) == bool(args.gen):
        raise UsageError("give exactly one of --circuit FILE or --gen KIND [key=value ...]")
    if args.circuit:
        return "file", {}
    kind, params = args.gen[0], _params(args.gen[1:])
    if getattr(args, "T", None) is not None and "T" not in params and kind not in ("staircase", "parallel"):
        params["T"] = args.T
    return kind, params


def _read_circuit(path: str) -> Circuit:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_circuit(text)


def _load(args) -> tuple[Rsg, Circuit | None]:
    kind, params = _source(args)
    mode = getattr(args, "mode", "parity")
    if kind == "file":
        circuit = _read_circuit(args.circuit)
        return build_rsg(build_epstg(circuit), mode), circuit
    if kind == "complete":
        return family_rsg(kind, params), None
    circuit = generate(kind, **params)
    return build_rsg(build_epstg(circuit), mode), circuit


def _check_p(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise UsageError(f"--p must lie in [0, 1], got {p}")
    return p


# -- output -----------------------------------------------------------------


def _emit(args, argv: Sequence[str], columns: list[str], rows: list[list], summary: dict) -> None:
    if args.format == "json":
        doc = {"command": " ".join(map(shlex.quote, ["errprop", *argv])), "columns": columns,
               "rows": rows, "summary": summary}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# " + " ".join(map(shlex.quote, ["errprop", *argv])) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([[_fmt(x) for x in row] for row in rows])
        for key, value in summary.items():
            buf.write(f"# {key}: {_fmt(value)}\n")
        text = buf.getvalue()
    _write(args.out, text)


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (list, tuple)):
        return " ".join(str(_fmt(v)) for v in x)
    return x


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _dist_summary(dist: an.ErrorDistribution, rsg: Rsg, p: float) -> dict:
    mom = an.moments(dist)
    return {
        "expectation": mom.expectation,
        "variance": mom.variance,
        "entropy": an.entropy(dist),
        "shift": an.shift(mom, rsg.n, rsg.T, p),
    }


# -- commands ---------------------------------------------------------------


def cmd_gen(args, argv) -> int:
    circuit = generate(args.kind, **_params(args.params))
    _write(args.out, serialize_circuit(circuit, indent=None) + "\n")
    return EXIT_OK


def cmd_graph(args, argv) -> int:
    rsg, circuit = _load(args)
    if args.export:
        target = rsg if args.what == "rsg" or circuit is None else build_epstg(circuit)
        text = export_graph(target, args.export)
        _write(args.graph_out, text if text.endswith("\n") else text + "\n")
    comps = components(rsg)
    rows = [[f"R{i}", rsg.degree(i), next(c for c, comp in enumerate(comps) if i - 1 in comp.rows)]
            for i in range(1, rsg.n + 1)]
    summary = {"n": rsg.n, "T": rsg.T, "mode": rsg.mode, "components": len(comps)}
    _emit(args, argv, ["readout", "degree", "component"], rows, summary)
    return EXIT_OK


def cmd_exact(args, argv) -> int:
    p = _check_p(args.p)
    rsg, _ = _load(args)
    try:
        if args.method == "brute":
            dist = an.brute_force_distribution(rsg, p)
        else:
            dist = an.component_distribution(rsg, p)
    except an.InstanceTooLarge as exc:
        raise Infeasible(f"{exc} (errprop sample)") from exc
    rows = [[k, float(pk)] for k, pk in enumerate(dist.probs)]
    summary = {"p": p, **_dist_summary(dist, rsg, p)}
    _emit(args, argv, ["k", "P"], rows, summary)
    return EXIT_OK


def _syndrome(text: str, n: int) -> np.ndarray:
    b = np.zeros(n, dtype=np.uint8)
    for item in text.replace(",", " ").split():
        label = item[1:] if item[:1] in "Rr" else item
        try:
            i = int(label)
        except ValueError:
            raise UsageError(f"malformed readout {item!r} in syndrome") from None
        if not 1 <= i <= n:
            raise UsageError(f"readout {item!r} outside 1..{n}")
        b[i - 1] = 1
    return b


def cmd_solve(args, argv) -> int:
    rsg, _ = _load(args)
    b = BitVector.from_dense(_syndrome(args.syndrome, rsg.n))
    M = rsg.bits
    v = solve(M, b)
    if v is None:
        raise Infeasible("unsatisfiable: no fault pattern produces this syndrome")
    if mat_vec(M, v) != b:
        raise RuntimeError("internal error: solution failed verification")
    dense = v.to_dense()
    sites = [rsg.site_of(int(c)) for c in np.flatnonzero(dense)]
    rows = [[site_name(q, t), q, t] for q, t in sorted(sites)]
    summary = {"syndrome": [f"R{i + 1}" for i in np.flatnonzero(b.to_dense())], "weight": len(sites),
               "verified": "yes"}
    _emit(args, argv, ["site", "qubit", "window"], rows, summary)
    return EXIT_OK


def cmd_sample(args, argv) -> int:
    p = _check_p(args.p)
    rsg, _ = _load(args)
    rep = sample(rsg, p, args.shots, args.seed, args.workers)
    rows = [[k, int(c), float(f)] for k, (c, f) in enumerate(zip(rep.counts, rep.distribution.probs))]
    summary = {"p": p, "shots": rep.shots, "seed": rep.seed, **_dist_summary(rep.distribution, rsg, p),
               "stderr": rep.expectation_stderr}
    _emit(args, argv, ["k", "count", "P"], rows, summary)
    return EXIT_OK


def cmd_sweep(args, argv) -> int:
    kind, params = _source(args)
    if kind == "file":
        raise UsageError("sweep needs a generator (--gen KIND ...)")
    values = _grid(args.values)
    if args.axis == "T":
        if args.p is None:
            raise UsageError("a T sweep needs --p")
        _check_p(args.p)
        values = [int(v) for v in values]
    else:
        for v in values:
            _check_p(v)
    result = sweep(kind, params, args.axis, values, args.shots, args.seed, args.p, args.workers, args.mode)
    columns = ["axis", "value", "E", "Var", "shift", "entropy", "stderr", "shots", "seed"]
    rows = [[r.axis, r.value, r.expectation, r.variance, r.shift, r.entropy, r.stderr, r.shots, r.seed]
            for r in result]
    _emit(args, argv, columns, rows, {"family": kind, "points": len(rows)})
    return EXIT_OK


def crossing(f, g, grid: Sequence[float], tol: float = 1e-4) -> float | None:
    """First ``p`` in the grid range where ``log f - log g`` changes sign, refined by bisection."""
    def h(p):
        return math.log(f(p)) - math.log(g(p))

    pts = [p for p in grid if p > 0]
    for a, b in zip(pts, pts[1:]):
        ha, hb = h(a), h(b)
        if ha == 0:
            return a
        if ha * hb < 0:
            while b - a > tol:
                mid = 0.5 * (a + b)
                hm = h(mid)
                if hm == 0:
                    return mid
                if ha * hm < 0:
                    b = mid
                else:
                    a, ha = mid, hm
            return 0.5 * (a + b)
    return None


def cmd_threshold(args, argv) -> int:
    distances = [int(d) for d in _grid(args.distances)]
    for d in distances:
        if d < 1 or d % 2 == 0:
            raise UsageError(f"distances must be odd and positive, got {d}")
    grid = _grid(args.p_grid)
    for p in grid:
        _check_p(p)
    inflated = None
    if args.circuit or args.gen:
        rsg, _ = _load(args)
        try:
            curve = an.expectation_curve(rsg)
        except an.InstanceTooLarge as exc:
            raise Infeasible(str(exc)) from exc
        n, T = rsg.n, rsg.T

        def inflated(p):
            # excess expected flips per qubit over the empty circuit, added to the physical rate
            return p + (float(curve(p)) - an.closed_empty(n, T, p).expectation) / n

    def rate(d, eff=None):
        return lambda p: an.surface_misid_rate(d, eff(p) if eff else p)

    columns = ["p"] + [f"PL_d{d}" for d in distances]
    if inflated:
        columns += ["p_eff"] + [f"PL_d{d}_prop" for d in distances]
    rows = []
    for p in grid:
        row = [p] + [rate(d)(p) for d in distances]
        if inflated:
            row += [inflated(p)] + [rate(d, inflated)(p) for d in distances]
        rows.append(row)
    summary = {}
    for d1, d2 in zip(distances, distances[1:]):
        x = crossing(rate(d1), rate(d2), grid)
        summary[f"crossing d{d1}/d{d2}"] = "none" if x is None else x
        if inflated:
            y = crossing(rate(d1, inflated), rate(d2, inflated), grid)
            summary[f"crossing d{d1}/d{d2} with propagation"] = "none" if y is None else y
    _emit(args, argv, columns, rows, summary)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--circuit", metavar="FILE", help="circuit JSON file")
    p.add_argument("--gen", nargs="+", metavar="ARG",
                   help="generator: KIND [key=value ...]; kinds: empty, cnot-pair, staircase, parallel, "
                        "random-global, random-local, complete")
    p.add_argument("--T", type=int, help="window count for families that take one")
    p.add_argument("--mode", choices=MODES, default="parity", help="RSG semantics (default parity)")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="FILE", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_sampling(p: argparse.ArgumentParser) -> None:
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="errprop", description="Bit-flip error propagation through CNOT circuits.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a generated circuit as JSON")
    p.add_argument("kind")
    p.add_argument("params", nargs="*", metavar="key=value")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("graph", help="readout degrees and components; optional DOT/JSON export")
    _add_source(p)
    _add_output(p)
    p.add_argument("--export", choices=("dot", "json-edges"))
    p.add_argument("--what", choices=("rsg", "epstg"), default="rsg")
    p.add_argument("--graph-out", metavar="FILE", help="export destination (default stdout)")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("exact", help="exact error-number distribution")
    _add_source(p)
    _add_output(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--method", choices=("components", "brute"), default="components")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("solve", help="find a fault pattern producing a syndrome")
    _add_source(p)
    _add_output(p)
    p.add_argument("--syndrome", default="", help="flipped readouts, e.g. 'R1,R2' or '1 2'; empty for none")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sample", help="Monte Carlo error-number distribution")
    _add_source(p)
    _add_output(p)
    _add_sampling(p)
    p.add_argument("--p", type=float, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("sweep", help="sampled statistics along a T or p grid")
    _add_source(p)
    _add_output(p)
    _add_sampling(p)
    p.add_argument("--axis", choices=("T", "p"), required=True)
    p.add_argument("--values", required=True, help="a,b,c or start:stop:step")
    p.add_argument("--p", type=float, help="fixed p for a T sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="logical-rate curves per distance and their crossings")
    _add_source(p)
    _add_output(p)
    p.add_argument("--distances", default="3,5,7")
    p.add_argument("--p-grid", default="0.001:0.5:0.001")
    p.set_defaults(func=cmd_threshold)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except (UsageError, CircuitError) as exc:
        print(f"errprop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Infeasible as exc:
        print(f"errprop: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"errprop: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"errprop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

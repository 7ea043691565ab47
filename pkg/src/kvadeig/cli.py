"""Command line front end: load a triple, run the solver, write a report."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path


from .backend import BACKENDS
from .deflation import Depth
from .dense import EPS, RankStrategy
from .errors import KvadeigError, ParseError, SingularPencil
from .fixtures import FIXTURES
from .linearization import QuadPencil
from .mmio import load_triple, write_matrix_market
from .scaling import ScalingKind
from .solver import QepSolution, SolveOptions, solve_qep

SEED_ENV = "KVADEIG_SEED"


@dataclass(frozen=True)
class RunConfig:
    scale: ScalingKind = ScalingKind.FLV
    balance: bool = True
    balance_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    rank_strategy: RankStrategy = RankStrategy.GLOBAL_TRIPLE_NORM
    tau: float | None = None
    backend: str = "qz"
    seed: int = 0
    output: str | None = None
    format: str = "json"
    depth: Depth = Depth.FULL
    timings: bool = False
    extra: dict = field(default_factory=dict)

    def solve_options(self) -> SolveOptions:
        return SolveOptions(scale=self.scale, balance=self.balance,
                            balance_weights=self.balance_weights,
                            rank_strategy=self.rank_strategy, tau=self.tau,
                            backend=self.backend, seed=self.seed, depth=self.depth)


def _num(v: float):
    """JSON-safe float: non-finite values become strings."""
    v = float(v)
    if math.isfinite(v):
        return v
    return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")


def build_report(sol: QepSolution, include_timings: bool = False) -> dict:
    """Plain-data report of a solution; deterministic unless timings are included."""
    rows = []
    for i, pr in enumerate(sol.pairs):
        finite = pr.tag.value != "infinite"
        rows.append({
            "index": i,
            "tag": pr.tag.value,
            "re": _num(pr.value.real) if finite else None,
            "im": _num(pr.value.imag) if finite else None,
            "abs": _num(pr.abs_value),
            "eta_right": _num(pr.eta_right),
            "eta_left": _num(pr.eta_left),
            "omega_right": _num(pr.omega_right),
            "omega_left": _num(pr.omega_left),
            "provenance_right": pr.provenance_right,
            "provenance_left": pr.provenance_left,
        })
    counts = {t: sum(1 for r in rows if r["tag"] == t) for t in ("finite", "zero", "infinite")}
    report = {
        "n": sol.pencil.n,
        "counts": counts,
        "ledger": sol.ledger(),
        "scaling": {k: _num(v) if isinstance(v, float) else v
                    for k, v in sol.scaling.to_dict().items()},
        "balancing": sol.balancing.to_dict(),
        "options": sol.options.to_dict(),
        "eigenpairs": rows,
    }
    if include_timings:
        report["timings"] = {k: float(v) for k, v in sol.timings.items()}
    return report


_CSV_COLUMNS = ["index", "tag", "re", "im", "abs", "eta_right", "eta_left", "omega_right",
                "omega_left", "provenance_right", "provenance_left"]


def render(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=_CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in report["eigenpairs"]:
            w.writerow({k: ("" if row[k] is None else row[k]) for k in _CSV_COLUMNS})
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def run(config: RunConfig, pencil: QuadPencil) -> dict:
    """Solve and return the report; SingularPencil propagates."""
    sol = solve_qep(pencil, config.solve_options())
    return build_report(sol, config.timings)


def _abs(row) -> float:
    v = row["abs"]
    return float(v) if not isinstance(v, str) else float(v)


def emit_plot_data(report: dict, path, sort_by_abs: bool = False) -> None:
    """CSV of index, |lambda|, max(eta, eps), max(omega, eps), tag."""
    rows = list(report["eigenpairs"])
    if sort_by_abs:
        rows.sort(key=_abs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "abs_lambda", "eta_right", "omega_right", "tag"])
    for row in rows:
        eta = max(float(row["eta_right"]), EPS)
        om = max(float(row["omega_right"]), EPS)
        w.writerow([row["index"], repr(_abs(row)), repr(eta), repr(om), row["tag"]])
    Path(path).write_text(buf.getvalue())


def compare(config: RunConfig, pencil: QuadPencil) -> dict:
    """Run the undeflated, one-step and full pipelines side by side."""
    out = {}
    for depth, label in ((Depth.NONE, "plain"), (Depth.ONE_STEP, "one_step"),
                         (Depth.FULL, "full")):
        cfg = RunConfig(**{**config.__dict__, "depth": depth, "timings": False})
        try:
            rep = run(cfg, pencil)
        except SingularPencil as exc:
            out[label] = {"error": str(exc)}
            continue
        rows = sorted(rep["eigenpairs"], key=_abs)
        out[label] = {"counts": rep["counts"], "ledger": rep["ledger"],
                      "abs": [r["abs"] for r in rows],
                      "omega_right": [r["omega_right"] for r in rows],
                      "eta_right": [r["eta_right"] for r in rows]}
    return out


def render_compare(table: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(table, indent=2, sort_keys=True, allow_nan=False) + "\n"
    labels = list(table)
    size = max(len(t.get("abs", [])) for t in table.values())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index"] + [f"{lab}_{col}" for lab in labels for col in ("abs", "omega_right")])
    for i in range(size):
        row = [i]
        for lab in labels:
            t = table[lab]
            row += [t["abs"][i], t["omega_right"][i]] if "abs" in t else ["", ""]
        w.writerow(row)
    return buf.getvalue()


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _weights(text: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("weights must be three numbers M,C,K") from None
    if len(vals) != 3 or min(vals) < 0:
        raise argparse.ArgumentTypeError("weights must be three nonnegative numbers M,C,K")
    return vals


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kvadeig",
                                 description="Complete solution of quadratic eigenvalue problems.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve lambda^2 M + lambda C + K")
    s.add_argument("matrices", nargs="*", metavar="MTX", help="M, C and K Matrix Market files")
    s.add_argument("--bundle", help="JSON bundle with n, M, C, K")
    s.add_argument("--fixture", choices=sorted(FIXTURES), help="built-in problem")
    s.add_argument("--scale", default="flv", choices=[k.value for k in ScalingKind])
    s.add_argument("--balance", type=_bool, nargs="?", const=True, default=True,
                   metavar="BOOL")
    s.add_argument("--alpha", type=_weights, default=(1.0, 1.0, 1.0), metavar="M,C,K",
                   help="balancing weights")
    s.add_argument("--rank-strategy", default=RankStrategy.GLOBAL_TRIPLE_NORM.value,
                   choices=[r.value for r in RankStrategy])
    s.add_argument("--tau", type=float, default=None, help="rank threshold (default n*eps)")
    s.add_argument("--backend", default="qz", choices=sorted(BACKENDS))
    s.add_argument("--seed", type=int, default=None,
                   help=f"seed for randomized backends (fallback ${SEED_ENV}, then 0)")
    s.add_argument("--depth", default="full", choices=[d.value for d in Depth])
    s.add_argument("--format", default="json", choices=["json", "csv"])
    s.add_argument("--compare", action="store_true",
                   help="run undeflated, one-step and full pipelines side by side")
    s.add_argument("--timings", action="store_true", help="include wall-clock timings")
    s.add_argument("--plot-data", metavar="CSV", help="also write plot-ready backward errors")
    s.add_argument("--sort-abs", action="store_true", help="sort plot data by |lambda|")
    s.add_argument("-o", "--output", help="report path (default stdout)")

    e = sub.add_parser("export", help="write a built-in problem as Matrix Market files")
    e.add_argument("fixture", choices=sorted(FIXTURES))
    e.add_argument("directory")
    return ap


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ParseError(f"{SEED_ENV} is not an integer: {env!r}", "<environment>") from None
    return 0


def _pencil_from_args(args) -> QuadPencil:
    sources = sum([bool(args.matrices), args.bundle is not None, args.fixture is not None])
    if sources != 1:
        raise ParseError("give exactly one of: three MTX files, --bundle, --fixture", "<args>")
    if args.fixture:
        return FIXTURES[args.fixture]()
    if args.bundle:
        return load_triple(bundle=args.bundle)
    if len(args.matrices) != 3:
        raise ParseError(f"expected 3 Matrix Market files, got {len(args.matrices)}", "<args>")
    return load_triple(args.matrices)


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "export":
            p = FIXTURES[args.fixture]()
            d = Path(args.directory)
            d.mkdir(parents=True, exist_ok=True)
            for name, a in zip("MCK", p.triple()):
                write_matrix_market(d / f"{name}.mtx", a)
            return 0
        pencil = _pencil_from_args(args)
        config = RunConfig(scale=ScalingKind(args.scale), balance=args.balance,
                           balance_weights=args.alpha,
                           rank_strategy=RankStrategy(args.rank_strategy), tau=args.tau,
                           backend=args.backend, seed=_seed(args.seed), output=args.output,
                           format=args.format, depth=Depth(args.depth), timings=args.timings)
        if args.compare:
            _write(render_compare(compare(config, pencil), config.format), config.output)
            return 0
        report = run(config, pencil)
        _write(render(report, config.format), config.output)
        if args.plot_data:
            emit_plot_data(report, args.plot_data, args.sort_abs)
        return 0
    except SingularPencil as exc:
        print(f"kvadeig: {exc}", file=sys.stderr)
        return 2
    except (KvadeigError, OSError, ValueError) as exc:
        print(f"kvadeig: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

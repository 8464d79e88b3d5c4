"""``qent`` command-line interface.

Exit codes: 0 success, 1 error, 2 results written but a tolerance check
failed (channel disagreement or duality gap).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import complexes as cx
from . import entropy as en
from . import filtrations as fl
from . import functors as fn
from .algebra import PathAlgebra, load_quiver
from .errors import QentError

CSV_FIELDS = ("t", "channel", "N_max", "regression_slope", "last_ratio", "fekete_upper", "truncated")
EXIT_OK, EXIT_ERROR, EXIT_TOLERANCE = 0, 1, 2


@dataclass
class RunConfig:
    quiver_path: str
    functor_text: str = "id"
    generator_text: str | None = None
    t_min: float = 0.0
    t_max: float = 0.0
    t_step: float = 1.0
    n_max: int = en.DEFAULT_NMAX
    channels: tuple[str, ...] = en.CHANNELS
    output: str = "csv"
    seed: int = 0
    budget_ms: int | None = None
    summand_cap: int = en.DEFAULT_SUMMAND_CAP
    tolerance: float = 0.02

    def validate(self) -> None:
        if self.t_min > self.t_max:
            raise QentError(f"--tmin {self.t_min} exceeds --tmax {self.t_max}")
        if self.t_step <= 0:
            raise QentError("--tstep must be positive")
        if self.n_max < 2:
            raise QentError("--nmax must be at least 2")
        bad = [c for c in self.channels if c not in en.CHANNELS]
        if bad:
            raise QentError(f"unknown channel(s) {', '.join(bad)}; choose from {', '.join(en.CHANNELS)}")
        if self.output not in ("csv", "json"):
            raise QentError("--format must be csv or json")

    def t_grid(self) -> list[float]:
        n = int(math.floor((self.t_max - self.t_min) / self.t_step + 1e-9)) + 1
        return [round(self.t_min + i * self.t_step, 12) for i in range(n)]

    def budget(self) -> dict:
        return {
            "summand_cap": self.summand_cap,
            "budget_s": None if self.budget_ms is None else self.budget_ms / 1000.0,
        }


# -- helpers ----------------------------------------------------------------------------


def resolve_quiver(path: str) -> PathAlgebra:
    """Load a quiver file; bare names like ``a2`` fall back to the shipped examples."""
    p = Path(path)
    if p.is_file():
        return load_quiver(p.read_text(encoding="utf-8"))
    name = p.name if p.suffix == ".json" else p.name + ".json"
    shipped = resources.files("qent") / "data" / name
    if shipped.is_file():
        return load_quiver(shipped.read_text(encoding="utf-8"))
    raise QentError(f"quiver file not found: {path}")


def default_generator(alg: PathAlgebra) -> str:
    return "+".join(f"P{v}" for v in alg.vertices)


def _num(v):
    if v is None:
        return None
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows_csv(rows: list[dict], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in CSV_FIELDS])


def _emit(text: str, output: str | None) -> None:
    if output and output != "-":
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def series_record(s: en.GrowthSeries) -> dict:
    rec = {k: _num(v) for k, v in s.row().items()}
    rec["exact_slope"] = s.exact_slope
    rec["a"] = [_num(v) for v in s.a]
    rec["log_a"] = s.log_a
    return rec


# -- commands ------------------------------------------------------------------------


def cmd_entropy(cfg: RunConfig, out_path: str | None = None) -> int:
    cfg.validate()
    alg = resolve_quiver(cfg.quiver_path)
    f = fn.parse_functor(cfg.functor_text)
    gen_text = cfg.generator_text or default_generator(alg)
    g = cx.build_object(gen_text, alg)
    series = en.entropy_curve(f, g, cfg.t_grid(), cfg.n_max, cfg.channels, **cfg.budget())
    if cfg.output == "csv":
        buf = io.StringIO()
        write_rows_csv([s.row() for s in series], buf)
        text = buf.getvalue()
    else:
        payload = {
            "quiver": cfg.quiver_path,
            "functor": cfg.functor_text,
            "generator": gen_text,
            "field": str(alg.field),
            "rows": [series_record(s) for s in series],
        }
        text = json.dumps(payload, indent=2) + "\n"
    _emit(text, out_path)
    code = EXIT_OK
    for t, spread in en.channel_disagreement(series).items():
        if spread > cfg.tolerance:
            print(f"qent: warning: channels disagree by {spread:.4g} at t={t} (tolerance {cfg.tolerance})", file=sys.stderr)
            code = EXIT_TOLERANCE
    for s in series:
        if s.truncated:
            print(f"qent: warning: series for t={s.t}, {s.channel} truncated at N={s.n_max}", file=sys.stderr)
    return code


def cmd_filtration(quiver: str, obj: str, kind: str, out_path: str | None = None) -> int:
    alg = resolve_quiver(quiver)
    x = cx.build_object(obj, alg)
    prof = fl.t_filtration(x) if kind == "t" else fl.cot_filtration(cx.minimize(x))
    payload = {"object": obj, **prof.to_json()}
    _emit(json.dumps(payload, indent=2) + "\n", out_path)
    return EXIT_OK


def cmd_delta(quiver: str, obj: str, ts: list[float], out_path: str | None = None) -> int:
    alg = resolve_quiver(quiver)
    x = cx.minimize(cx.build_object(obj, alg))
    t_prof = fl.t_filtration(x)
    c_prof = fl.cot_filtration(x)
    rows = []
    for t in ts:
        rows.append(
            {
                "t": t,
                "delta_hat": t_prof.value(t),
                "delta_check": c_prof.value(t),
                "delta_check_lower": fl.hom_b_lower_bound(x, t),
            }
        )
    payload = {"object": obj, "t_profile": t_prof.to_json()["entries"], "cot_profile": c_prof.to_json()["entries"], "values": rows}
    _emit(json.dumps(payload, indent=2) + "\n", out_path)
    return EXIT_OK


def cmd_duality(cfg: RunConfig, out_path: str | None = None) -> int:
    cfg.validate()
    alg = resolve_quiver(cfg.quiver_path)
    f = fn.parse_functor(cfg.functor_text)
    g = cx.build_object(cfg.generator_text, alg) if cfg.generator_text else None
    rep = en.duality_check(f, alg, cfg.t_grid(), cfg.n_max, g_a=g, g_b=g, **cfg.budget())
    fields = ("t", "h_A", "h_B_inverse_at_minus_t", "gap", "exact_A", "exact_B")
    records = [
        dict(zip(fields, (r.t, r.h_a, r.h_b, r.gap, r.exact_a, r.exact_b))) for r in rep.rows
    ]
    if cfg.output == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for rec in records:
            w.writerow([_fmt(rec[k]) for k in fields])
        text = buf.getvalue()
    else:
        text = json.dumps({"functor": cfg.functor_text, "rows": records, "max_gap": rep.max_gap}, indent=2) + "\n"
    _emit(text, out_path)
    if rep.max_gap > cfg.tolerance:
        print(f"qent: warning: duality gap {rep.max_gap:.4g} exceeds tolerance {cfg.tolerance}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def run_invariant_suite(alg: PathAlgebra, seed: int, samples: int) -> list[tuple[str, bool, str]]:
    """Randomized invariants; each failure carries the seed that reproduces it."""
    results: list[tuple[str, bool, str]] = []
    free, simples = cx.free_module(alg), cx.simples_sum(alg)

    def record(name, failures):
        results.append((name, not failures, "" if not failures else "failing seeds: " + ", ".join(map(str, failures[:10]))))

    fails = {k: [] for k in ("A-channel", "B-channel", "minimize", "subadditivity", "opposite")}
    for i in range(samples):
        s = seed + i
        rng = np.random.default_rng(s)
        x = cx.random_complex(alg, rng)
        if fl.t_filtration(x).as_dict() != fl.hom_a_weights(x):
            fails["A-channel"].append(s)
        if fl.cot_filtration(x).as_dict() != fl.hom_b_weights(x):
            fails["B-channel"].append(s)
        y = cx.scramble(x, rng)
        m = cx.minimize(y)
        if m.term_multiset() != x.term_multiset() or cx.hom_profile(m, simples) != cx.hom_profile(x, simples) or cx.hom_profile(free, m) != cx.hom_profile(free, y):
            fails["minimize"].append(s)
        d, f, g = fl.random_triangle(alg, rng)
        if not all(fl.triangle_subadditivity_check(d, f, g, t) for t in (-1.0, 0.0, 1.0)):
            fails["subadditivity"].append(s)
        if not x.is_zero():
            tr, di = en.opposite_series_pair(fn.Serre(), x, 2)
            if tr != di:
                fails["opposite"].append(s)
    record("t-filtration = Hom([A], -) profile", fails["A-channel"])
    record("co-t-filtration = Hom(-, S) profile", fails["B-channel"])
    record("minimize preserves Hom profiles", fails["minimize"])
    record("triangle subadditivity", fails["subadditivity"])
    record("opposite-category series", fails["opposite"])
    bad = []
    for i in range(alg.n_vertices):
        p = cx.stalk(alg, [i])
        if not fn.iso_test(fn.apply(fn.parse_functor("nu * nu^-1"), p), p):
            bad.append(alg.vertices[i])
    results.append(("nu o nu^-1 = id on projectives", not bad, f"vertices {bad}" if bad else ""))
    return results


def cmd_check(quiver: str, seed: int, samples: int) -> int:
    alg = resolve_quiver(quiver)
    rep = en.st_triple_audit(alg, raise_on_failure=False)
    lines = [(f"audit: {name}", ok, detail) for name, ok, detail in rep.clauses]
    lines += [(f"invariant: {name}", ok, detail) for name, ok, detail in run_invariant_suite(alg, seed, samples)]
    for name, ok, detail in lines:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail and not ok else ""))
    failed = sum(1 for _, ok, _ in lines if not ok)
    print(f"{len(lines) - failed}/{len(lines)} checks passed (seed {seed}, {samples} samples)")
    return EXIT_OK if not failed else EXIT_ERROR


# -- argument parsing --------------------------------------------------------------------


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tmin", type=float, default=0.0)
    p.add_argument("--tmax", type=float, default=0.0)
    p.add_argument("--tstep", type=float, default=0.5)
    p.add_argument("--nmax", type=int, default=en.DEFAULT_NMAX)
    p.add_argument("--format", dest="output_format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output", default=None, help="output file (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-ms", type=int, default=None, help="wall-clock budget per series")
    p.add_argument("--summand-cap", type=int, default=en.DEFAULT_SUMMAND_CAP)
    p.add_argument("--tolerance", type=float, default=0.02)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1; status 2 is reserved for tolerance warnings."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qent", description="Categorical entropy of functors on per(A) for acyclic quivers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("entropy", help="entropy curves of a functor across channels")
    p.add_argument("--quiver", required=True, help="quiver JSON file, or a shipped name (a2, a3, kronecker, two_points)")
    p.add_argument("--functor", required=True)
    p.add_argument("--generator", default=None, help="object DSL; default is the sum of all projectives")
    p.add_argument("--channels", default=",".join(en.CHANNELS))
    _add_grid(p)

    p = sub.add_parser("filtration", help="t- or co-t-filtration profile of an object")
    p.add_argument("--quiver", required=True)
    p.add_argument("--object", required=True)
    p.add_argument("--kind", choices=("t", "cot"), default="t")
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("delta", help="complexities delta_hat and delta_check of an object")
    p.add_argument("--quiver", required=True)
    p.add_argument("--object", required=True)
    p.add_argument("--t", type=float, nargs="+", default=[0.0])
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("duality", help="compare hom_A of f at t with hom_B of f^-1 at -t")
    p.add_argument("--quiver", required=True)
    p.add_argument("--functor", required=True)
    p.add_argument("--generator", default=None, help="object DSL for both generators (default: S for A-side, [A] for B-side)")
    _add_grid(p)

    p = sub.add_parser("check", help="ST-triple audit and randomized invariant suite")
    p.add_argument("--quiver", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=40)
    return parser


def _config(args) -> RunConfig:
    channels = tuple(c.strip() for c in getattr(args, "channels", ",".join(en.CHANNELS)).split(",") if c.strip())
    return RunConfig(
        quiver_path=args.quiver,
        functor_text=args.functor,
        generator_text=args.generator,
        t_min=args.tmin,
        t_max=args.tmax,
        t_step=args.tstep,
        n_max=args.nmax,
        channels=channels,
        output=args.output_format,
        seed=args.seed,
        budget_ms=args.budget_ms,
        summand_cap=args.summand_cap,
        tolerance=args.tolerance,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "entropy":
            return cmd_entropy(_config(args), args.output)
        if args.command == "duality":
            return cmd_duality(_config(args), args.output)
        if args.command == "filtration":
            return cmd_filtration(args.quiver, args.object, args.kind, args.output)
        if args.command == "delta":
            return cmd_delta(args.quiver, args.object, args.t, args.output)
        if args.command == "check":
            return cmd_check(args.quiver, args.seed, args.samples)
    except QentError as exc:
        print(f"qent: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, MemoryError) as exc:
        print(f"qent: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

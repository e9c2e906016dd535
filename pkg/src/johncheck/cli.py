"""``johncheck`` command line: check, eval, construct, compare.

Exit codes::

    0  pass / match
    1  usage or parse error
    2  fail_psd
    3  fail_symmetry
    4  domain_error
    5  compare mismatch
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from johncheck import __version__
from johncheck.checker import (
    DOMAIN_ERROR,
    FAIL_PSD,
    FAIL_SYMMETRY,
    PASS,
    CheckConfig,
    PointDiagnostic,
    SamplingExhausted,
    SuiteReport,
    aggregate,
    default_box,
    run_diagnostic_suite,
    sample_domain,
)
from johncheck.core import (
    BuiltinTwoGoodAssignment,
    DiscreteAtoms,
    FiniteMenuMixture,
    JohnCheckError,
    LinearRule,
    Menu,
    Outcome,
    QuadraticFamily,
    TypeProfile,
    UniformOn01,
    builtin_catalog,
    catalog_entry,
    evaluate_elementary,
    evaluate_rule,
    validate_spec,
)
from johncheck.potential import compare_rules, quote_payments

log = logging.getLogger("johncheck")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CODES = {PASS: 0, FAIL_PSD: 2, FAIL_SYMMETRY: 3, DOMAIN_ERROR: 4}
EXIT_MISMATCH = 5


class SpecError(JohnCheckError):
    """Base for problems with a rule-spec document."""


class ParseError(SpecError):
    pass


class SchemaError(SpecError):
    pass


class ValidationError(SpecError):
    pass


# ---------------------------------------------------------------- spec parsing

_FIELDS = {
    "builtin": ({"kind", "name"}, {"d"}),
    "finite_menu_mixture": ({"kind", "d", "outcomes"}, {"lambda_measure"}),
    "quadratic_family": ({"kind", "d", "A", "b"}, {"lambda_measure"}),
    "linear_rule": ({"kind", "d", "Mx", "My"}, set()),
}


def _check_fields(obj, required, optional, where):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    missing = sorted(required - obj.keys())
    if missing:
        raise SchemaError(f"{where}: missing field(s) {', '.join(missing)}")
    unknown = sorted(obj.keys() - required - optional)
    if unknown:
        raise SchemaError(f"{where}: unknown field(s) {', '.join(unknown)}")


def _number(v, where) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where}: expected a number")
    return float(v)


def _numbers(v, where) -> list[float]:
    if not isinstance(v, list):
        raise SchemaError(f"{where}: expected an array of numbers")
    return [_number(e, f"{where}[{i}]") for i, e in enumerate(v)]


def _matrix(v, d, where) -> np.ndarray:
    if not isinstance(v, list) or len(v) != d:
        raise SchemaError(f"{where}: expected a {d}x{d} array")
    rows = [_numbers(r, f"{where}[{i}]") for i, r in enumerate(v)]
    if any(len(r) != d for r in rows):
        raise SchemaError(f"{where}: expected a {d}x{d} array")
    return np.array(rows)


def _measure(v, where):
    if v is None:
        return UniformOn01()
    if not isinstance(v, dict) or "type" not in v:
        raise SchemaError(f"{where}: expected an object with a 'type' field")
    if v["type"] == "uniform":
        _check_fields(v, {"type"}, set(), where)
        return UniformOn01()
    if v["type"] == "discrete":
        _check_fields(v, {"type", "atoms"}, set(), where)
        if not isinstance(v["atoms"], list):
            raise SchemaError(f"{where}.atoms: expected an array")
        atoms = []
        for i, a in enumerate(v["atoms"]):
            w = f"{where}.atoms[{i}]"
            _check_fields(a, {"lambda", "weight"}, set(), w)
            atoms.append((_number(a["lambda"], f"{w}.lambda"), _number(a["weight"], f"{w}.weight")))
        return DiscreteAtoms(tuple(atoms))
    raise SchemaError(f"{where}.type: unknown measure type {v['type']!r}")


def spec_from_dict(doc) -> object:
    if not isinstance(doc, dict):
        raise SchemaError("$: expected a JSON object")
    kind = doc.get("kind")
    if kind not in _FIELDS:
        raise SchemaError(f"$.kind: unknown kind {kind!r}; expected one of {sorted(_FIELDS)}")
    required, optional = _FIELDS[kind]
    _check_fields(doc, required, optional, "$")

    d = None
    if "d" in doc:
        if isinstance(doc["d"], bool) or not isinstance(doc["d"], int) or doc["d"] < 1:
            raise SchemaError("$.d: expected a positive integer")
        d = doc["d"]

    if kind == "builtin":
        try:
            spec = catalog_entry(doc["name"])
        except (KeyError, TypeError):
            names = [n for n, _ in builtin_catalog()]
            raise SchemaError(f"$.name: unknown builtin {doc['name']!r}; expected one of {names}")
        if d is not None and d != spec.d:
            raise ValidationError(f"$.d: builtin {doc['name']} has d={spec.d}")
        return spec

    measure = _measure(doc.get("lambda_measure"), "$.lambda_measure")
    if kind == "finite_menu_mixture":
        if not isinstance(doc["outcomes"], list):
            raise SchemaError("$.outcomes: expected an array")
        outcomes = []
        for i, o in enumerate(doc["outcomes"]):
            w = f"$.outcomes[{i}]"
            _check_fields(o, {"z"}, {"cost"}, w)
            z = _numbers(o["z"], f"{w}.z")
            if len(z) != d:
                raise ValidationError(f"{w}.z: length {len(z)} does not match d={d}")
            outcomes.append(Outcome(z, _number(o.get("cost", 0.0), f"{w}.cost")))
        return FiniteMenuMixture(Menu(tuple(outcomes)), measure)
    if kind == "quadratic_family":
        b = _numbers(doc["b"], "$.b")
        if len(b) != d:
            raise ValidationError(f"$.b: length {len(b)} does not match d={d}")
        return QuadraticFamily(_matrix(doc["A"], d, "$.A"), b, measure)
    return LinearRule(_matrix(doc["Mx"], d, "$.Mx"), _matrix(doc["My"], d, "$.My"))


def parse_rule_spec(document: str | bytes) -> object:
    """Parse and validate a JSON rule-spec document (strict: unknown fields rejected)."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    spec = spec_from_dict(doc)
    report = validate_spec(spec)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))
    return spec


def spec_to_dict(spec) -> dict:
    if isinstance(spec, BuiltinTwoGoodAssignment):
        return {"kind": "builtin", "name": "two_good_assignment"}

    def measure(m):
        if isinstance(m, UniformOn01):
            return {"type": "uniform"}
        return {"type": "discrete", "atoms": [{"lambda": l, "weight": w} for l, w in m.atoms]}

    if isinstance(spec, FiniteMenuMixture):
        return {
            "kind": "finite_menu_mixture",
            "d": spec.d,
            "outcomes": [{"z": o.z.tolist(), "cost": o.cost} for o in spec.menu.outcomes],
            "lambda_measure": measure(spec.measure),
        }
    if isinstance(spec, QuadraticFamily):
        return {
            "kind": "quadratic_family",
            "d": spec.d,
            "A": spec.A.tolist(),
            "b": spec.b.tolist(),
            "lambda_measure": measure(spec.measure),
        }
    return {"kind": "linear_rule", "d": spec.d, "Mx": spec.Mx.tolist(), "My": spec.My.tolist()}


def load_spec(path) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        return parse_rule_spec(text)
    except SpecError as exc:
        raise type(exc)(f"{path}: {exc}") from None


# ---------------------------------------------------------------- reports


def _nullable(v):
    return None if v is None or (isinstance(v, float) and not np.isfinite(v)) else v


def report_to_dict(report: SuiteReport, cfg: CheckConfig, spec=None) -> dict:
    diagnostics = []
    for i, dg in enumerate(report.diagnostics):
        diagnostics.append(
            {
                "index": i,
                "x": dg.point.x.tolist(),
                "y": dg.point.y.tolist(),
                "sym_x": dg.sym_x,
                "sym_y": dg.sym_y,
                "min_eig_x": dg.min_eig_x,
                "min_eig_y": dg.min_eig_y,
                "john_residual": dg.john_residual,
                "jac_norm": dg.jac_norm,
                "error": dg.error,
            }
        )
    return {
        "tool": "johncheck",
        "version": __version__,
        "spec": spec_to_dict(spec) if spec is not None else None,
        "verdict": report.verdict,
        "seed": cfg.seed,
        "n_samples": cfg.n_samples,
        "box": {"x": [list(b) for b in cfg.box_x], "y": [list(b) for b in cfg.box_y]},
        "tolerances": {
            "tol_sym": cfg.tol_sym,
            "tol_psd": cfg.tol_psd,
            "fd_step_scale": cfg.fd.step_scale,
            "fd_mixed_step_scale": cfg.fd.mixed_step_scale,
            "relative_to": "max(1, ||J||_F)",
            "percentile_verdict": cfg.percentile_verdict,
        },
        "summary": {
            "worst_sym": _nullable(report.worst_sym),
            "worst_min_eig": _nullable(report.worst_min_eig),
            "worst_rel_sym": _nullable(report.worst_rel_sym),
            "worst_rel_min_eig": _nullable(report.worst_rel_min_eig),
            "p95_rel_sym": _nullable(report.p95_rel_sym),
            "p05_rel_min_eig": _nullable(report.p05_rel_min_eig),
            "worst_john_residual": report.worst_john,
            "n_domain_errors": report.n_domain_errors,
        },
        "diagnostics": diagnostics,
        "error": None,
    }


def report_from_dict(doc: dict) -> SuiteReport:
    """Rebuild a report by re-aggregating the stored per-point diagnostics."""
    diagnostics = [
        PointDiagnostic(
            TypeProfile(r["x"], r["y"]),
            sym_x=r["sym_x"],
            sym_y=r["sym_y"],
            min_eig_x=r["min_eig_x"],
            min_eig_y=r["min_eig_y"],
            john_residual=r["john_residual"],
            jac_norm=r["jac_norm"],
            error=r["error"],
        )
        for r in doc["diagnostics"]
    ]
    tol = doc["tolerances"]
    return aggregate(diagnostics, tol["tol_sym"], tol["tol_psd"], tol["percentile_verdict"])


def error_report(message: str, verdict: str = "error", seed=None) -> dict:
    return {
        "tool": "johncheck",
        "version": __version__,
        "verdict": verdict,
        "seed": seed,
        "error": message,
        "diagnostics": [],
    }


def dump_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _emit(doc, out_path=None, stream=None):
    text = dump_json(doc)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        (stream or sys.stdout).write(text)


# ---------------------------------------------------------------- helpers


def _default_seed() -> int:
    env = os.environ.get("JOHNCHECK_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise argparse.ArgumentTypeError(f"JOHNCHECK_SEED must be an integer, got {env!r}")


def _coords(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")


def _grid(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected --grid nx,ny, got {text!r}")
    if nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return nx, ny


def parse_box(text: str, d: int):
    """Box from JSON ``{"x": [[lo, hi], ...], "y": [[lo, hi], ...]}`` or a path to such a file."""
    raw = Path(text).read_text(encoding="utf-8") if Path(text).is_file() else text
    try:
        doc = json.loads(raw)
        box_x = [tuple(map(float, b)) for b in doc["x"]]
        box_y = [tuple(map(float, b)) for b in doc["y"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"--box: expected {{\"x\": [[lo, hi], ...], \"y\": [...]}} ({exc})") from None
    if len(box_x) != d or len(box_y) != d or any(len(b) != 2 for b in box_x + box_y):
        raise SchemaError(f"--box: need {d} (lo, hi) pairs for each of x and y")
    return tuple(box_x), tuple(box_y)


class TabulatedRule:
    """Rule read back from a ``construct`` table; defined only at its grid nodes."""

    def __init__(self, rows: dict, d: int):
        self.rows = rows
        self.d = d

    @classmethod
    def from_csv(cls, path) -> "TabulatedRule":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            d = len(header) // 3
            rows = {}
            for row in reader:
                vals = [float(v) for v in row]
                rows[tuple(vals[: 2 * d])] = np.array(vals[2 * d :])
        return cls(rows, d)

    def points(self) -> list[TypeProfile]:
        return [TypeProfile(k[: self.d], k[self.d :]) for k in self.rows]

    def __call__(self, x, y):
        key = tuple(float(v) for v in x) + tuple(float(v) for v in y)
        return self.rows[key]


def tabulate(spec, box, nx: int, ny: int) -> list[list[float]]:
    box_x, box_y = box
    axes = [np.linspace(lo, hi, nx) for lo, hi in box_x] + [np.linspace(lo, hi, ny) for lo, hi in box_y]
    d = spec.d
    rows = []
    for node in itertools.product(*axes):
        p = TypeProfile(node[:d], node[d:])
        rows.append([*p.x.tolist(), *p.y.tolist(), *evaluate_rule(spec, p).tolist()])
    return rows


# ---------------------------------------------------------------- commands


def cmd_check(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        spec = load_spec(args.spec)
    except SpecError as exc:
        print(f"johncheck: {exc}", file=sys.stderr)
        _emit(error_report(str(exc), seed=seed), args.out)
        return EXIT_USAGE
    try:
        box = parse_box(args.box, spec.d) if args.box else None
        cfg = CheckConfig.for_rule(
            spec,
            box=box,
            n_samples=args.samples,
            seed=seed,
            tol_sym=args.tol_sym,
            tol_psd=args.tol_psd,
            percentile_verdict=args.percentile_verdict,
        )
    except JohnCheckError as exc:
        print(f"johncheck: {exc}", file=sys.stderr)
        _emit(error_report(str(exc), seed=seed), args.out)
        return EXIT_USAGE
    try:
        report = run_diagnostic_suite(spec, cfg)
    except SamplingExhausted as exc:
        _emit(error_report(str(exc), verdict=DOMAIN_ERROR, seed=seed), args.out)
        return EXIT_CODES[DOMAIN_ERROR]
    _emit(report_to_dict(report, cfg, spec), args.out)
    return EXIT_CODES[report.verdict]


def cmd_eval(args) -> int:
    spec = load_spec(args.spec)
    p = TypeProfile(args.x, args.y)
    if p.d != spec.d:
        raise SchemaError(f"--x/--y have length {p.d}, spec has d={spec.d}")
    if args.lam is not None:
        if isinstance(spec, FiniteMenuMixture):
            T = evaluate_elementary(spec.menu, args.lam, p)
        elif isinstance(spec, QuadraticFamily):
            T = spec.A @ (args.lam * p.x + (1 - args.lam) * p.y) + spec.b
        else:
            raise SchemaError("--lambda needs a finite_menu_mixture or quadratic_family spec")
        out = {"T": T.tolist(), "lambda": args.lam}
    elif args.payments:
        anchor_x, anchor_y = args.anchor_x, args.anchor_y
        if isinstance(spec, FiniteMenuMixture):
            # no closed form: reconstruct, anchored at the origin by default
            anchor_x = anchor_x or [0.0] * spec.d
            anchor_y = anchor_y or [0.0] * spec.d
        out = quote_payments(spec, p, anchor_x=anchor_x, anchor_y=anchor_y).to_dict()
    else:
        out = {"T": evaluate_rule(spec, p).tolist()}
    sys.stdout.write(dump_json(out))
    return EXIT_OK


def cmd_construct(args) -> int:
    spec = load_spec(args.spec)
    if not isinstance(spec, (FiniteMenuMixture, QuadraticFamily)):
        raise SchemaError("construct needs a finite_menu_mixture or quadratic_family spec")
    box = parse_box(args.box, spec.d) if args.box else default_box(spec)
    nx, ny = args.grid
    d = spec.d
    header = [f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)] + [f"T{i + 1}" for i in range(d)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in tabulate(spec, box, nx, ny):
        writer.writerow([repr(v) for v in row])
    Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    print(f"wrote {nx ** d * ny ** d} rows to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    spec_a = load_spec(args.spec_a)
    if str(args.spec_b).endswith(".csv"):
        rule_b = TabulatedRule.from_csv(args.spec_b)
        if rule_b.d != spec_a.d:
            raise SchemaError(f"table has d={rule_b.d}, spec has d={spec_a.d}")
        points = rule_b.points()
    else:
        rule_b = load_spec(args.spec_b)
        if rule_b.d != spec_a.d:
            raise SchemaError(f"specs have different dimensions ({spec_a.d} vs {rule_b.d})")
        # sample where both rules are defined
        guard_spec = rule_b if isinstance(rule_b, BuiltinTwoGoodAssignment) else spec_a
        cfg = CheckConfig.for_rule(guard_spec, n_samples=args.samples, seed=seed)
        points = sample_domain(cfg)
    sup, where = compare_rules(spec_a, rule_b, points)
    out = {
        "sup_norm": sup,
        "argmax_point": None if where is None else {"x": where.x.tolist(), "y": where.y.tolist()},
        "n_points": len(points),
        "seed": seed,
        "tol": args.tol,
        "match": sup <= args.tol,
    }
    sys.stdout.write(dump_json(out))
    return EXIT_OK if sup <= args.tol else EXIT_MISMATCH


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="johncheck", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="run the implementability diagnostics")
    p.add_argument("spec")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol-sym", type=float, default=1e-6)
    p.add_argument("--tol-psd", type=float, default=1e-8)
    p.add_argument("--box", default=None, help='JSON {"x": [[lo, hi], ...], "y": [...]} or a file')
    p.add_argument("--out", default=None)
    p.add_argument("--percentile-verdict", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="evaluate a rule at one profile")
    p.add_argument("spec")
    p.add_argument("--x", type=_coords, required=True)
    p.add_argument("--y", type=_coords, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--payments", action="store_true")
    p.add_argument("--anchor-x", type=_coords, default=None)
    p.add_argument("--anchor-y", type=_coords, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("construct", help="tabulate a mixture rule on a grid")
    p.add_argument("spec")
    p.add_argument("--grid", type=_grid, required=True)
    p.add_argument("--box", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("compare", help="sup-norm distance between two rules")
    p.add_argument("spec_a")
    p.add_argument("spec_b", help="second spec, or a table written by construct")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (JohnCheckError, argparse.ArgumentTypeError) as exc:
        print(f"johncheck: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

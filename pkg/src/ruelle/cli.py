"""Command line front end.

    ruelle perron --input problem.json
    ruelle verify --input problem.json --steps 40 --format text

The problem document is UTF-8 JSON::

    {
      "alphabet_size": 2,
      "transition": [[1, 1], [1, 0]],
      "theta": 0.5,
      "potential": {"memory": 1, "values": [{"word": [1], "value": 0.0},
                                            {"word": [2], "value": 0.0}]},
      "observables": [{"name": "first_is_1", "memory": 1,
                       "values": [{"word": [1], "value": 1.0},
                                  {"word": [2], "value": 0.0}]}]
    }

Exit status: 0 when every check passes, 2 when a bound is violated, 1 on
input or usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .certificate import FORMULAS, check_row, compute_constants, verify_all
from .exceptions import InputParse, RuelleError
from .functions import LocallyConstantFn
from .gibbs import (
    GibbsMeasure,
    check_shift_invariance,
    correlation,
    empirical_average,
    integrate,
    sample_orbit,
)
from .symbolic import TransitionMatrix, admissible_words, check_aperiodic
from .transfer import perron_data, spectrum_of_lift, DENSE_LIMIT

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2


@dataclass(frozen=True)
class FunctionTable:
    memory: int
    values: Tuple[Tuple[Tuple[int, ...], float], ...]

    def to_json(self) -> dict:
        return {"memory": self.memory, "values": [{"word": list(w), "value": v} for w, v in self.values]}


@dataclass(frozen=True)
class ProblemDocument:
    alphabet_size: int
    transition: Tuple[Tuple[int, ...], ...]
    theta: float
    potential: FunctionTable
    observables: Tuple[Tuple[str, FunctionTable], ...] = field(default=())

    def to_json(self) -> dict:
        doc = {
            "alphabet_size": self.alphabet_size,
            "transition": [list(r) for r in self.transition],
            "theta": self.theta,
            "potential": self.potential.to_json(),
        }
        if self.observables:
            doc["observables"] = [{"name": name, **t.to_json()} for name, t in self.observables]
        return doc


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise InputParse(f"{where}: missing field '{key}'")
    return obj[key]


def _parse_table(raw, shift: TransitionMatrix, where: str) -> FunctionTable:
    memory = _require(raw, "memory", where)
    if not isinstance(memory, int) or isinstance(memory, bool) or memory < 1:
        raise InputParse(f"{where}.memory: expected an integer >= 1, got {memory!r}")
    entries = _require(raw, "values", where)
    if not isinstance(entries, list):
        raise InputParse(f"{where}.values: expected a list")
    seen = {}
    for i, item in enumerate(entries):
        here = f"{where}.values[{i}]"
        word = _require(item, "word", here)
        value = _require(item, "value", here)
        if not isinstance(word, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in word):
            raise InputParse(f"{here}.word: expected a list of integer symbols")
        word = tuple(word)
        if len(word) != memory:
            raise InputParse(f"{here}.word: {list(word)} has length {len(word)}, expected {memory}")
        if not shift.is_admissible(word):
            raise InputParse(f"{here}.word: {list(word)} is not admissible")
        if word in seen:
            raise InputParse(f"{here}.word: duplicate word {list(word)}")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise InputParse(f"{here}.value: expected a finite number, got {value!r}")
        seen[word] = float(value)
    for w in admissible_words(shift, memory):
        if w not in seen:
            raise InputParse(f"{where}.values: missing word {list(w)}")
    ordered = tuple((w, seen[w]) for w in admissible_words(shift, memory))
    return FunctionTable(memory, ordered)


def parse_problem(raw) -> ProblemDocument:
    """Validate a decoded JSON document.

    Raises
    ------
    InputParse
        With the path of the offending field.
    NotAperiodic, DegenerateRow, DegenerateColumn
        From the transition matrix check.
    """
    if not isinstance(raw, dict):
        raise InputParse("document: expected a JSON object")
    q = _require(raw, "alphabet_size", "document")
    if not isinstance(q, int) or isinstance(q, bool) or q < 2:
        raise InputParse(f"alphabet_size: expected an integer >= 2, got {q!r}")
    transition = _require(raw, "transition", "document")
    if (
        not isinstance(transition, list)
        or len(transition) != q
        or not all(isinstance(r, list) and len(r) == q for r in transition)
    ):
        raise InputParse(f"transition: expected a {q}x{q} array")
    for i, row in enumerate(transition):
        for j, x in enumerate(row):
            if x not in (0, 1) or isinstance(x, bool):
                raise InputParse(f"transition[{i}][{j}]: expected 0 or 1, got {x!r}")
    shift = check_aperiodic(transition)
    theta = _require(raw, "theta", "document")
    if isinstance(theta, bool) or not isinstance(theta, (int, float)) or not 0.0 < theta < 1.0:
        raise InputParse(f"theta: expected a number strictly inside (0, 1), got {theta!r}")
    potential = _parse_table(_require(raw, "potential", "document"), shift, "potential")
    observables = []
    names = set()
    for i, item in enumerate(raw.get("observables") or []):
        name = _require(item, "name", f"observables[{i}]")
        if not isinstance(name, str) or name in names:
            raise InputParse(f"observables[{i}].name: expected a unique string, got {name!r}")
        names.add(name)
        observables.append((name, _parse_table(item, shift, f"observables[{i}]")))
    return ProblemDocument(q, shift.entries, float(theta), potential, tuple(observables))


def load_problem(text: str) -> ProblemDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputParse(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_problem(raw)


@dataclass
class Problem:
    document: ProblemDocument
    shift: TransitionMatrix
    potential: LocallyConstantFn
    observables: Dict[str, LocallyConstantFn]


def build(doc: ProblemDocument) -> Problem:
    shift = check_aperiodic(doc.transition)

    def fn(table: FunctionTable) -> LocallyConstantFn:
        return LocallyConstantFn(shift, table.memory, np.array([v for _, v in table.values]), doc.theta)

    return Problem(doc, shift, fn(doc.potential), {name: fn(t) for name, t in doc.observables})


# -- serialisation ---------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False)


def _word_table(words, values) -> List[dict]:
    return [{"word": list(w), "value": float(v)} for w, v in zip(words, values)]


def _perron_section(pd) -> dict:
    words = admissible_words(pd.potential.shift, pd.level)
    section = {
        "lambda": pd.lam,
        "pressure": pd.pressure,
        "level": pd.level,
        "bracket": list(pd.bracket),
        "iterations": pd.iterations,
        "residual": pd.residual,
        "second_modulus": pd.second_modulus,
        "h": _word_table(words, pd.h.values),
        "nu": _word_table(words, pd.nu),
    }
    if pd.lift.dimension <= DENSE_LIMIT:
        section["spectrum"] = [[float(z.real), float(z.imag)] for z in spectrum_of_lift(pd.lift)]
    return section


def _constants_section(c) -> dict:
    out = {}
    for name, formula in FORMULAS.items():
        out[name] = {"value": getattr(c, name), "formula": formula}
    out["beta_gap"] = {"value": c.beta_gap, "formula": "(1-theta)/(4 K**3)"}
    out["rho_gap"] = {"value": c.rho_gap, "formula": "(1-theta)/(8 K**3)"}
    out["log_K"] = {"value": c.log_K, "formula": "log B + r0 log b"}
    return out


def _rows(rows) -> List[dict]:
    return [r.as_dict() for r in rows]


# -- subcommands -----------------------------------------------------------------


def _cmd_perron(problem, args):
    pd = perron_data(problem.potential, args.level, args.tol)
    return {"perron": _perron_section(pd)}, EXIT_OK


def _cmd_pressure(problem, args):
    pd = perron_data(problem.potential, args.level, args.tol)
    return {"pressure": pd.pressure, "lambda": pd.lam}, EXIT_OK


def _cmd_certificate(problem, args):
    pd = perron_data(problem.potential, args.level, args.tol)
    c = compute_constants(problem.potential, lam=pd.lam)
    return {"constants": _constants_section(c)}, EXIT_OK


def _cmd_verify(problem, args):
    pd = perron_data(problem.potential, args.level, args.tol)
    c = compute_constants(problem.potential, lam=pd.lam)
    rep = verify_all(pd, problem.observables, steps=args.steps, depth=args.depth, c=c)
    report = {
        "constants": _constants_section(c),
        "perron": _perron_section(pd),
        "checks": _rows(rep.rows),
        "convergence": rep.extras["convergence"],
        "summary": {"checks": len(rep.rows), "violations": len(rep.violations), "passed": rep.passed},
    }
    return report, EXIT_OK if rep.passed else EXIT_VIOLATION


def _cmd_invariance(problem, args):
    pd = perron_data(problem.potential, args.level, args.tol)
    worst = check_shift_invariance(GibbsMeasure.from_perron(pd), args.depth)
    row = check_row("shift_invariance", 1e-10, worst)
    report = {"invariance": {"depth": args.depth, "max_discrepancy": worst}, "checks": _rows([row])}
    return report, EXIT_OK if row.passed else EXIT_VIOLATION


def _lookup(problem, name, flag):
    if name is None:
        raise InputParse(f"{flag} is required")
    if name == "potential":
        return problem.potential
    try:
        return problem.observables[name]
    except KeyError:
        raise InputParse(f"{flag}: no observable named {name!r}") from None


def _cmd_correlate(problem, args):
    u = _lookup(problem, args.u, "--u")
    v = _lookup(problem, args.v, "--v")
    pd = perron_data(problem.potential, args.level, args.tol)
    gm = GibbsMeasure.from_perron(pd)
    values = [correlation(gm, u, v, n) for n in range(args.steps + 1)]
    return {"correlation": {"u": args.u, "v": args.v, "steps": args.steps, "values": values}}, EXIT_OK


def _cmd_sample(problem, args):
    pd = perron_data(problem.potential, args.level, args.tol)
    gm = GibbsMeasure.from_perron(pd)
    orbit = sample_orbit(gm, args.length, args.seed)
    averages = {}
    for name, g in {"potential": problem.potential, **problem.observables}.items():
        averages[name] = {
            "empirical": empirical_average(orbit, g) if orbit.size > g.memory else None,
            "exact": integrate(gm, g, "nu_hat"),
        }
    counts = np.bincount(orbit, minlength=problem.shift.q + 1)[1:]
    report = {
        "sampling": {
            "seed": args.seed,
            "length": args.length,
            "generator": "numpy PCG64 via default_rng(seed)",
            "symbol_frequencies": (counts / orbit.size).tolist(),
            "empirical_averages": averages,
        }
    }
    return report, EXIT_OK


COMMANDS = {
    "perron": _cmd_perron,
    "certificate": _cmd_certificate,
    "verify": _cmd_verify,
    "invariance": _cmd_invariance,
    "correlate": _cmd_correlate,
    "sample": _cmd_sample,
    "pressure": _cmd_pressure,
}


# -- text rendering ----------------------------------------------------------------


def render_text(report: dict) -> str:
    lines = [f"command: {report['command']}"]
    if "error" in report:
        lines.append(f"error: {report['error']['type']}: {report['error']['message']}")
        return "\n".join(lines) + "\n"
    if "pressure" in report and "lambda" in report:
        lines.append(f"lambda   = {report['lambda']!r}")
        lines.append(f"pressure = {report['pressure']!r}")
    if "perron" in report:
        p = report["perron"]
        lines.append(f"lambda = {p['lambda']!r}  (level {p['level']}, second modulus {p['second_modulus']!r})")
        for h, nu in zip(p["h"], p["nu"]):
            lines.append(f"  {h['word']}: h = {h['value']!r}  nu = {nu['value']!r}")
    if "constants" in report:
        for name, item in report["constants"].items():
            lines.append(f"{name:>14} = {item['value']!r:<24} {item['formula']}")
    if "invariance" in report:
        inv = report["invariance"]
        lines.append(f"max discrepancy to depth {inv['depth']}: {inv['max_discrepancy']!r}")
    if "correlation" in report:
        for n, c in enumerate(report["correlation"]["values"]):
            lines.append(f"C({n}) = {c!r}")
    if "sampling" in report:
        s = report["sampling"]
        lines.append(f"seed {s['seed']}, length {s['length']}, frequencies {s['symbol_frequencies']}")
        for name, a in s["empirical_averages"].items():
            lines.append(f"  {name}: empirical {a['empirical']!r}  exact {a['exact']!r}")
    if "checks" in report:
        bad = [r for r in report["checks"] if not r["passed"]]
        lines.append(f"{len(report['checks'])} checks, {len(bad)} violations")
        for r in bad:
            lines.append(f"  VIOLATED {r['bound_id']} n={r['n']}: {r['actual_value']!r} > {r['bound_value']!r}")
    return "\n".join(lines) + "\n"


# -- entry point -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ruelle", description="Transfer operators, Gibbs measures and explicit spectral bounds.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", default="-", help="problem document (default: stdin)")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--level", type=int, default=None)
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--steps", type=int, default=40)
        p.add_argument("--depth", type=int, default=4)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--length", type=int, default=10_000)
        p.add_argument("--u", default=None)
        p.add_argument("--v", default=None)
    return parser


def execute(args: argparse.Namespace, stdin=None) -> Tuple[int, dict]:
    """Run a parsed command and return ``(exit status, report)``."""
    report = {"command": args.command}
    try:
        if args.input == "-":
            text = (stdin or sys.stdin).read()
        else:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        doc = load_problem(text)
        report["input"] = doc.to_json()
        body, status = COMMANDS[args.command](build(doc), args)
        report.update(body)
    except OSError as exc:
        report["error"] = {"type": "InputParse", "message": str(exc)}
        status = EXIT_INPUT
    except RuelleError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        status = EXIT_INPUT
    return status, report


def run(argv: Optional[List[str]] = None, stdin=None) -> Tuple[int, dict]:
    return execute(make_parser().parse_args(argv), stdin)


def main(argv: Optional[List[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    status, report = execute(args)
    sys.stdout.write(render_text(report) if args.format == "text" else dumps(report) + "\n")
    if "error" in report:
        sys.stderr.write(f"{report['error']['type']}: {report['error']['message']}\n")
    return status


if __name__ == "__main__":
    sys.exit(main())

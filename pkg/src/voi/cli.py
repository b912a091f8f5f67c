"""
Command-line front end.

    voi run <case> [--samples N] [--seed S] [--set key=value ...]
                   [--trace STRIDE] [--output PATH] [--format json|csv]

``<case>`` is ``ventilation``, ``ashp``, ``gshp``, ``tabular PATH`` or a path
to a tabular JSON document. Exit status is 0 on success, 2 for configuration
errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .cases import ashp, gshp, ventilation
from .cases.load_profile import read_load_csv
from .core import (
    DEFAULT_SAMPLES,
    MAXIMIZE,
    MINIMIZE,
    Action,
    TabularProblem,
    convergence_trace,
    solve_exact,
    solve_voi,
)
from .errors import ConfigError, ConstructionError, InvalidArgumentError, NumericalError, VoiError
from .rng import SEED_MAX

log = logging.getLogger("voi")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CASES = {
    "ventilation": ventilation.VentilationParams,
    "ashp": ashp.AshpParams,
    "gshp": gshp.GshpParams,
}

# Published figures, reported next to results for comparison only.
REFERENCE = {
    "ventilation": {"prior_action": "5", "prior_value": 72.57, "preposterior_value": 63.15,
                    "evpi": 9.42, "units": "GBP/day"},
    "ashp": {"prior_action": "2", "prior_value": 263_120.0, "preposterior_value": 262_900.0,
             "evpi": 220.0, "units": "GBP/year"},
    "gshp": {"prior_action": "170", "prior_value": 537_400.0, "preposterior_value": 533_200.0,
             "evpi": 4_200.0, "units": "GBP"},
}


@dataclass
class RunConfig:
    problem: str
    overrides: dict = field(default_factory=dict)
    n_samples: int = DEFAULT_SAMPLES
    seed: int = 0
    trace_stride: int | None = None
    output_path: str | None = None
    format: str = "json"
    workers: int = 1
    load_csv: str | None = None


def parse_tabular(path) -> TabularProblem:
    """Read and validate a tabular problem document."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"tabular file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    for key in ("sense", "actions", "states", "probabilities", "utilities"):
        if key not in doc:
            raise ConfigError(f"{path}: missing field '{key}'")
    if doc["sense"] not in (MAXIMIZE, MINIMIZE):
        raise ConfigError(f"{path}: field 'sense' must be 'maximize' or 'minimize'")
    for key in ("actions", "states", "probabilities", "utilities"):
        if not isinstance(doc[key], list):
            raise ConfigError(f"{path}: field '{key}' must be a list")
    if not all(isinstance(a, str) for a in doc["actions"]):
        raise ConfigError(f"{path}: field 'actions' must be a list of strings")
    if not all(_is_number(p) for p in doc["probabilities"]):
        raise ConfigError(f"{path}: field 'probabilities' must be a list of numbers")
    rows = doc["utilities"]
    if len(rows) != len(doc["actions"]):
        raise ConfigError(
            f"{path}: field 'utilities' has {len(rows)} rows but there are "
            f"{len(doc['actions'])} actions"
        )
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not all(_is_number(x) for x in row):
            raise ConfigError(f"{path}: field 'utilities' row {i} must be a list of numbers")
        if len(row) != len(doc["states"]):
            raise ConfigError(
                f"{path}: field 'utilities' row {i} has {len(row)} entries but there are "
                f"{len(doc['states'])} states"
            )
    total = sum(doc["probabilities"])
    if abs(total - 1.0) > 1e-12:
        raise ConfigError(f"{path}: field 'probabilities': probabilities sum to {total:.15g}")
    actions = [Action(id=a, label=a) for a in doc["actions"]]
    try:
        return TabularProblem(
            actions, doc["states"], doc["probabilities"], rows, doc["sense"], name=path.stem
        )
    except InvalidArgumentError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _coerce(name: str, raw: str, current):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    if isinstance(current, tuple):
        if isinstance(value, str):
            try:
                value = [json.loads(v) for v in value.split(",")]
            except json.JSONDecodeError:
                raise ConfigError(f"--set {name}: expected a list of numbers, got {raw!r}") from None
        if not isinstance(value, list) or not all(_is_number(v) for v in value):
            raise ConfigError(f"--set {name}: expected a list of numbers, got {raw!r}")
        return tuple(value)
    if isinstance(current, bool):
        raise ConfigError(f"--set {name}: boolean fields are not configurable")
    if isinstance(current, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"--set {name}: expected an integer, got {raw!r}")
        return value
    if isinstance(current, float):
        if not _is_number(value):
            raise ConfigError(f"--set {name}: expected a number, got {raw!r}")
        return float(value)
    return value


def build_params(case: str, overrides: dict):
    cls = CASES[case]
    defaults = cls()
    names = {f.name for f in dataclasses.fields(cls)}
    values = {}
    for key, raw in overrides.items():
        if key not in names:
            raise ConfigError(
                f"unknown parameter '{key}' for case '{case}' "
                f"(known: {', '.join(sorted(names))})"
            )
        values[key] = raw if not isinstance(raw, str) else _coerce(key, raw, getattr(defaults, key))
    try:
        return dataclasses.replace(defaults, **values)
    except InvalidArgumentError as exc:
        raise ConfigError(f"invalid parameters for case '{case}': {exc}") from None


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def run(config: RunConfig) -> dict:
    """
    Execute one analysis and return the result document.

    Raises :class:`ConfigError` for invalid configuration and
    :class:`NumericalError` for model failures.
    """
    if config.format not in ("json", "csv"):
        raise ConfigError(f"format must be 'json' or 'csv', got {config.format!r}")
    if isinstance(config.n_samples, bool) or not isinstance(config.n_samples, int):
        raise ConfigError(f"samples must be an integer, got {config.n_samples!r}")
    if config.n_samples < 2:
        raise ConfigError(f"samples must be at least 2 (got {config.n_samples})")
    if not 0 <= config.seed <= SEED_MAX:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {config.seed}")
    if config.trace_stride is not None and config.trace_stride < 1:
        raise ConfigError(f"trace stride must be a positive integer, got {config.trace_stride}")
    if config.workers < 1:
        raise ConfigError(f"workers must be at least 1, got {config.workers}")

    started = time.perf_counter()
    doc = {}
    exact = None
    if config.problem in CASES:
        case = config.problem
        params = build_params(case, config.overrides)
        doc["problem"] = case
        doc["parameters"] = {k: _plain(v) for k, v in dataclasses.asdict(params).items()}
        if config.load_csv is not None and case != "gshp":
            raise ConfigError("load_csv only applies to the gshp case")
        if case == "ventilation":
            problem = ventilation.build_ventilation_problem(params)
        elif case == "ashp":
            problem = ashp.build_ashp_problem(params)
        else:
            try:
                if config.load_csv is not None:
                    load = read_load_csv(config.load_csv)
                    source = str(config.load_csv)
                else:
                    load = gshp.default_load()
                    source = "synthetic"
            except (ConstructionError, OSError) as exc:
                raise ConfigError(f"load_csv: {exc}") from None
            doc["load_profile"] = {
                "source": source,
                "annual_energy_kwh": load.annual_energy,
                "peak_kw": load.peak,
                "mean_kw": load.mean,
            }
            problem = gshp.build_gshp_problem(params, load=load, workers=config.workers)
        doc["reference"] = REFERENCE[case]
    else:
        path = config.problem
        if config.overrides:
            raise ConfigError("--set is not supported for tabular problems")
        tabular = parse_tabular(path)
        doc["problem"] = f"tabular:{path}"
        doc["parameters"] = {
            "sense": tabular.sense,
            "actions": [a.id for a in tabular.actions],
            "states": list(tabular.states),
            "probabilities": list(tabular.probabilities),
            "utilities": [list(r) for r in tabular.utilities],
        }
        problem = tabular.to_decision_problem()
        exact = solve_exact(tabular)

    estimate = solve_voi(problem, config.n_samples, config.seed, workers=config.workers)
    doc["mc"] = estimate.to_dict()
    if exact is not None:
        doc["exact"] = exact.to_dict()
    if config.trace_stride is not None:
        rows = convergence_trace(
            problem, config.n_samples, config.seed, config.trace_stride, workers=config.workers
        )
        doc["trace"] = [{"n": n, "prior_value": v, "evpi": e} for n, v, e in rows]
    doc["wall_clock_seconds"] = time.perf_counter() - started
    return doc


def _flatten(doc, prefix=""):
    flat = {}
    for key, value in doc.items():
        name = f"{prefix}{key}"
        if key == "trace":
            continue
        if key == "per_action_values":
            for entry in value:
                flat[f"{name}.{entry['action']}.value"] = entry["value"]
                flat[f"{name}.{entry['action']}.se"] = entry["se"]
        elif isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        elif isinstance(value, list):
            flat[name] = json.dumps(value)
        else:
            flat[name] = value
    return flat


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    flat = _flatten(doc)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(flat.keys())
    writer.writerow(repr(v) if isinstance(v, float) else v for v in flat.values())
    return buf.getvalue()


def render_trace(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "prior_value", "evpi"])
    for row in doc.get("trace", []):
        writer.writerow([row["n"], repr(row["prior_value"]), repr(row["evpi"])])
    return buf.getvalue()


def _parse_sets(items) -> dict:
    overrides = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects key=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voi", description="Value-of-information analyses.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a built-in case study or a tabular problem")
    p.add_argument("case", help="ventilation | ashp | gshp | tabular | path to a tabular JSON file")
    p.add_argument("path", nargs="?", help="tabular JSON file when case is 'tabular'")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                   help=f"Monte Carlo samples (default: {DEFAULT_SAMPLES})")
    p.add_argument("--seed", type=int, default=0, help="64-bit unsigned seed (default: 0)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", dest="sets",
                   help="override a case parameter; repeatable")
    p.add_argument("--trace", type=int, metavar="STRIDE",
                   help="record running estimates every STRIDE samples")
    p.add_argument("--output", help="write the result here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--workers", type=int, default=1, help="threads (does not change results)")
    p.add_argument("--load-csv", help="gshp only: hourly load file with a 'kw' column")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = make_parser().parse_args(argv)
    try:
        if args.case == "tabular":
            if not args.path:
                raise ConfigError("case 'tabular' needs a path to a JSON document")
            problem = args.path
        elif args.path is not None:
            raise ConfigError(f"unexpected argument {args.path!r}")
        elif args.case in CASES or args.case.endswith(".json"):
            problem = args.case
        else:
            raise ConfigError(
                f"unknown case '{args.case}' (expected ventilation, ashp, gshp, tabular PATH)"
            )
        config = RunConfig(
            problem=problem,
            overrides=_parse_sets(args.sets),
            n_samples=args.samples,
            seed=args.seed,
            trace_stride=args.trace,
            output_path=args.output,
            format=args.format,
            workers=args.workers,
            load_csv=args.load_csv,
        )
        doc = run(config)
    except ConfigError as exc:
        print(f"voi: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"voi: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except VoiError as exc:
        print(f"voi: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = render(doc, config.format)
    if config.output_path:
        out = Path(config.output_path)
        out.write_text(text)
        if "trace" in doc:
            out.with_name(out.stem + ".trace.csv").write_text(render_trace(doc))
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

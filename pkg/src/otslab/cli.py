"""Batch front end: config files in, CSV artifacts out.

Config files are line-oriented ``key = value`` text grouped under section
headers; ``#`` and ``;`` start comment lines::

    [experiment]
    command = verify
    n = 4
    m = 2
    learner = memorizer:default=0
    pi = uniform

    [mc]
    seed = 42

Exit codes: 0 success, 2 parse error, 3 validation error, 4 budget
exceeded, 5 theorem-check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .domain import (
    Budget,
    Distribution,
    IIDModel,
    PositiveConditionalModel,
    TestDistributionFamily,
    constant_family,
    dyadic,
    point_mass,
    render_weights,
    uniform,
)
from .errors import BudgetExceeded, InvalidDistribution, NoOffTrainingMass, PreconditionViolated
from .expect import mc_expected_ots
from .learners import REGISTRY, UnknownLearner, parse_learner, zoo
from .nfl import (
    adversarial_family_demo,
    check_vertical,
    overlap_pair,
    random_off_family,
    sweep_large_n,
    sweep_overlap,
    verify_nfl,
)
from .ots import ots_induced_family, uniform_off_family

SCHEMA = "otslab-csv/1"

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4
EXIT_THEOREM = 5

COMMANDS = ("verify", "sweep-n", "sweep-overlap", "estimate", "check-model", "list-learners")
MODES = ("auto", "exact", "mc")
ENGINES = ("brute", "grouped")
MODELS = ("iid", "positive-conditional")


class ParseError(Exception):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class ValidationError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = "verify"
    n: int = 4
    m: int = 2
    learner: str = "memorizer:default=0"
    pi: str = "uniform"
    family: str = "ots"
    model: str = "iid"
    engine: str = "brute"
    n_values: tuple[int, ...] = (5, 6, 7, 8)
    lambdas: tuple[Fraction, ...] = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))
    mode: str = "auto"
    seed: int = 0
    samples: int = 100_000
    workers: int = 1
    budget_pairs: int = Budget.pairs
    budget_functions: int = Budget.functions
    output: str = "-"

    @property
    def budget(self) -> Budget:
        return Budget(self.budget_pairs, self.budget_functions)


# (section, key) -> config field
LAYOUT = {
    ("experiment", "command"): "command",
    ("experiment", "n"): "n",
    ("experiment", "m"): "m",
    ("experiment", "learner"): "learner",
    ("experiment", "pi"): "pi",
    ("experiment", "weights"): "pi",
    ("experiment", "family"): "family",
    ("experiment", "model"): "model",
    ("experiment", "engine"): "engine",
    ("sweep", "n_values"): "n_values",
    ("sweep", "lambdas"): "lambdas",
    ("sweep", "mode"): "mode",
    ("mc", "seed"): "seed",
    ("mc", "samples"): "samples",
    ("mc", "workers"): "workers",
    ("budget", "pairs"): "budget_pairs",
    ("budget", "functions"): "budget_functions",
    ("output", "path"): "output",
}
SECTIONS = {section for section, _ in LAYOUT}
INT_FIELDS = {"n", "m", "seed", "samples", "workers", "budget_pairs", "budget_functions"}


def _int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"{key} must be an integer, got {text!r}") from None


def _fraction(key: str, text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"{key}: {text!r} is not a rational number") from None


def _int_list(text: str) -> tuple[int, ...]:
    if ".." in text:
        lo, _, hi = text.partition("..")
        return tuple(range(_int("n_values", lo.strip()), _int("n_values", hi.strip()) + 1))
    return tuple(_int("n_values", t.strip()) for t in text.split(",") if t.strip())


def parse_pi(spec: str, n: int) -> Distribution:
    """``uniform``, ``dyadic``, ``point:K``, ``first-half``, ``second-half`` or ``p1,p2,...``."""
    spec = spec.strip()
    try:
        if spec == "uniform":
            return uniform(n)
        if spec == "dyadic":
            return dyadic(n)
        if spec.startswith("point:"):
            x = _int("point", spec[6:])
            if not 0 <= x < n:
                raise ValidationError(f"point mass at {x} lies outside 0..{n - 1}")
            return point_mass(n, x)
        if spec in ("first-half", "second-half"):
            return overlap_pair(n)[spec == "second-half"]
        if "," in spec or "/" in spec or spec.isdigit():
            weights = [_fraction("weights", w) for w in spec.split(",")]
            if len(weights) != n:
                raise ValidationError(f"weights: expected {n} entries, got {len(weights)}")
            total = sum(weights, Fraction(0))
            if total != 1:
                raise ValidationError(f"weights sum to {total}, not 1")
            return Distribution(tuple(weights))
    except InvalidDistribution as exc:
        raise ValidationError(f"weights: {exc}") from None
    raise ValidationError(
        f"unknown distribution {spec!r}; use uniform, dyadic, point:K, first-half, "
        "second-half or a comma-separated list of rationals"
    )


def parse_family(spec: str, pi: Distribution) -> TestDistributionFamily:
    """``ots``, ``uniform-off``, ``random-off:SEED`` or ``constant:<pi spec>``."""
    spec = spec.strip()
    if spec == "ots":
        return ots_induced_family(pi)
    if spec == "uniform-off":
        return uniform_off_family(pi.n)
    if spec.startswith("random-off:"):
        return random_off_family(_int("random-off seed", spec[11:]), pi.n)
    if spec.startswith("constant:"):
        inner = spec[9:]
        pibar = pi if inner == "pi" else parse_pi(inner, pi.n)
        return constant_family(pibar, name=f"constant{render_weights(pibar)}")
    raise ValidationError(
        f"unknown family {spec!r}; use ots, uniform-off, random-off:SEED or constant:<distribution>"
    )


def _learners(cfg: ExperimentConfig):
    return zoo() if cfg.learner == "all" else [parse_learner(cfg.learner)]


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every field and return the config with normalized spellings."""
    if cfg.command not in COMMANDS:
        raise ValidationError(f"command must be one of {', '.join(COMMANDS)}, got {cfg.command!r}")
    if cfg.n < 2:
        raise ValidationError(f"n must be >= 2, got {cfg.n}")
    if cfg.m < 1:
        raise ValidationError(f"m must be >= 1, got {cfg.m}")
    learner = cfg.learner.strip()
    if learner != "all":
        try:
            learner = parse_learner(learner).spec
        except UnknownLearner as exc:
            raise ValidationError(str(exc)) from None
    pi_spec = cfg.pi.replace(" ", "")
    pi = parse_pi(pi_spec, cfg.n)
    family = cfg.family.replace(" ", "")
    parse_family(family, pi)
    for key, value, allowed in (("mode", cfg.mode, MODES), ("engine", cfg.engine, ENGINES),
                                ("model", cfg.model, MODELS)):
        if value not in allowed:
            raise ValidationError(f"{key} must be one of {', '.join(allowed)}, got {value!r}")
    if not cfg.n_values or list(cfg.n_values) != sorted(set(cfg.n_values)) or cfg.n_values[0] < 2:
        raise ValidationError(f"n_values must be strictly ascending integers >= 2, got {cfg.n_values}")
    if not cfg.lambdas or any(not 0 <= lam <= 1 for lam in cfg.lambdas):
        raise ValidationError(f"lambdas must lie in [0, 1], got {[str(x) for x in cfg.lambdas]}")
    if cfg.samples < 1:
        raise ValidationError("samples must be >= 1")
    if cfg.workers < 1:
        raise ValidationError("workers must be >= 1")
    if cfg.budget_pairs < 1 or cfg.budget_functions < 1:
        raise ValidationError("budgets must be positive")
    if cfg.command == "verify" and cfg.m >= len(pi.support):
        raise ValidationError(
            f"verify requires m < |support(pi)| (got m={cfg.m}, |support|={len(pi.support)}); "
            "otherwise some training set leaves no off-training mass"
        )
    return replace(cfg, learner=learner, pi=pi_spec, family=family)


def parse_config(text: str) -> ExperimentConfig:
    values: dict[str, object] = {}
    seen: dict[tuple[str, str], int] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(lineno, f"malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ParseError(lineno, f"unknown section [{section}]; known: {', '.join(sorted(SECTIONS))}")
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ParseError(lineno, f"expected 'key = value', got {line!r}")
        key, value = key.strip(), value.strip()
        if section is None:
            raise ParseError(lineno, f"key {key!r} appears before any section header")
        if (section, key) not in LAYOUT:
            raise ParseError(lineno, f"unknown key {key!r} in [{section}]")
        name = LAYOUT[(section, key)]
        if name in values:
            raise ParseError(lineno, f"{key!r} already set on line {seen[name]}")
        seen[name] = lineno
        if name in INT_FIELDS:
            values[name] = _int(key, value)
        elif name == "n_values":
            values[name] = _int_list(value)
        elif name == "lambdas":
            values[name] = tuple(_fraction("lambdas", t) for t in value.split(",") if t.strip())
        else:
            values[name] = value
    return validate(ExperimentConfig(**values))


def emit_config(cfg: ExperimentConfig) -> str:
    """Render a config in the file format; every field is written."""
    out = []
    current = None
    for (section, key), name in LAYOUT.items():
        if key == "weights":
            continue
        if section != current:
            if current is not None:
                out.append("")
            out.append(f"[{section}]")
            current = section
        out.append(f"{key} = {_render_value(getattr(cfg, name))}")
    return "\n".join(out) + "\n"


def _render_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def decimal_str(q: Fraction, places: int = 12) -> str:
    """Exact half-even rounding of ``q`` to ``places`` decimals."""
    r = round(Fraction(q) * 10**places)
    sign = "-" if r < 0 else ""
    digits = str(abs(r)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


@dataclass
class ResultArtifact:
    metadata: list[tuple[str, str]]
    columns: list[str]
    rows: list[list[str]]
    exit_code: int = EXIT_OK
    wall_time: float = 0.0

    def to_csv(self, timing: bool = False) -> str:
        buf = io.StringIO()
        meta = list(self.metadata)
        if timing:
            meta.append(("wall_time_s", f"{self.wall_time:.3f}"))
        for key, value in meta:
            buf.write(f"# {key}: {value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()


def _bool(b: bool) -> str:
    return "true" if b else "false"


def _pairs(d) -> str:
    return " ".join(f"({x};{y})" for x, y in d.pairs)


def _bits(f) -> str:
    return "".join(map(str, f.bits))


def _run_verify(cfg):
    pi = parse_pi(cfg.pi, cfg.n)
    columns = ["n", "m", "learner", "pi", "family", "vertical", "support", "value",
               "value_decimal", "equals_half", "engine"]
    rows, failed = [], False
    for learner in _learners(cfg):
        if cfg.family == "ots":
            rep = verify_nfl(learner, pi, cfg.m, budget=cfg.budget, engine=cfg.engine)
        else:
            rep = adversarial_family_demo(learner, pi, cfg.m, parse_family(cfg.family, pi),
                                          budget=cfg.budget, engine=cfg.engine)
        failed |= rep.hypotheses_hold and not rep.equals_half
        rows.append([rep.n, rep.m, rep.learner, rep.pi, rep.family, _bool(rep.vertical.holds),
                     _bool(rep.support.holds), str(rep.value), decimal_str(rep.value),
                     _bool(rep.equals_half), rep.engine])
    return columns, rows, [("theorem_check", "fail" if failed else "pass")], EXIT_THEOREM if failed else EXIT_OK


def _sweep_columns(first):
    return [first, "n", "m", "learner", "family", "engine", "value", "value_decimal", "stderr"]


def _sweep_row(first, row):
    if row.exact:
        return [first, row.n, row.m, row.learner, row.family, row.engine, str(row.value),
                decimal_str(row.value), ""]
    return [first, row.n, row.m, row.learner, row.family, row.engine, "", repr(row.estimate),
            repr(row.stderr)]


def _run_sweep_n(cfg):
    rows = []
    for learner in _learners(cfg):
        for i, row in enumerate(sweep_large_n(learner, cfg.m, cfg.n_values, mode=cfg.mode, seed=cfg.seed,
                                              samples=cfg.samples, budget=cfg.budget, workers=cfg.workers)):
            rows.append(_sweep_row(i, row))
    return _sweep_columns("index"), rows, [], EXIT_OK


def _run_sweep_overlap(cfg):
    rows = []
    for learner in _learners(cfg):
        for row in sweep_overlap(learner, cfg.n, cfg.m, cfg.lambdas, budget=cfg.budget, engine=cfg.engine):
            rows.append(_sweep_row(row.param, row))
    return _sweep_columns("lambda"), rows, [], EXIT_OK


def _run_estimate(cfg):
    pi = parse_pi(cfg.pi, cfg.n)
    family = parse_family(cfg.family, pi)
    columns = ["n", "m", "learner", "pi", "family", "samples", "seed", "workers", "estimate", "stderr"]
    rows = []
    for learner in _learners(cfg):
        est = mc_expected_ots(learner, pi, family, cfg.m, cfg.samples, cfg.seed, cfg.workers)
        rows.append([cfg.n, cfg.m, learner.spec, render_weights(pi), family.name, est.samples, est.seed,
                     est.workers, repr(est.estimate), repr(est.stderr)])
    return columns, rows, [], EXIT_OK


def _run_check_model(cfg):
    model = IIDModel(parse_pi(cfg.pi, cfg.n)) if cfg.model == "iid" else PositiveConditionalModel()
    res = check_vertical(model, cfg.n, cfg.m, budget=cfg.budget)
    columns = ["model", "n", "m", "vertical", "witness_d", "witness_f", "witness_f_prime", "p", "p_prime"]
    w = res.witness
    row = [cfg.model, cfg.n, cfg.m, _bool(res.holds)]
    row += [_pairs(w.d), _bits(w.f), _bits(w.f_prime), str(w.p), str(w.p_prime)] if w else [""] * 5
    return columns, [row], [], EXIT_OK


def _run_list_learners(cfg):
    rows = [[name, pname, f"{name}:{pname}=0", desc] for name, (_, pname, _, desc) in REGISTRY.items()]
    return ["name", "parameter", "example", "description"], rows, [], EXIT_OK


RUNNERS = {
    "verify": _run_verify,
    "sweep-n": _run_sweep_n,
    "sweep-overlap": _run_sweep_overlap,
    "estimate": _run_estimate,
    "check-model": _run_check_model,
    "list-learners": _run_list_learners,
}


def run(cfg: ExperimentConfig) -> ResultArtifact:
    """Execute a validated config; engine errors propagate to the caller."""
    t0 = time.perf_counter()
    columns, rows, extra, code = RUNNERS[cfg.command](cfg)
    meta = [("tool", "otslab"), ("version", __version__), ("schema", SCHEMA), ("command", cfg.command)]
    for (section, key), name in LAYOUT.items():
        if key != "weights":
            meta.append((f"{section}.{key}", _render_value(getattr(cfg, name))))
    meta += extra
    return ResultArtifact(meta, columns, [[str(v) for v in r] for r in rows], code, time.perf_counter() - t0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otslab", description="Exact off-training-set NFL experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--output", metavar="PATH")
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--budget", type=int, help="cap on enumerated (f, d) pairs")
        p.add_argument("--timing", action="store_true", help="record wall time in the metadata header")
    return parser


def resolve(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = ExperimentConfig()
    overrides = {"command": args.command}
    for flag, name in (("output", "output"), ("seed", "seed"), ("samples", "samples"),
                       ("workers", "workers"), ("budget", "budget_pairs")):
        value = getattr(args, flag)
        if value is not None:
            overrides[name] = value
    return validate(replace(cfg, **overrides))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        artifact = run(cfg)
        text = artifact.to_csv(timing=args.timing)
        if cfg.output == "-":
            sys.stdout.write(text)
        else:
            with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except ParseError as exc:
        return _fail(EXIT_PARSE, f"parse error: {exc}")
    except (ValidationError, PreconditionViolated, NoOffTrainingMass, InvalidDistribution) as exc:
        return _fail(EXIT_VALIDATION, f"invalid configuration: {exc}")
    except BudgetExceeded as exc:
        return _fail(EXIT_BUDGET, f"budget exceeded: {exc}")
    except OSError as exc:
        return _fail(EXIT_VALIDATION, f"file error: {exc}")
    if artifact.exit_code == EXIT_THEOREM:
        print("otslab: theorem check failed: equals_half is false although both hypotheses hold",
              file=sys.stderr)
    return artifact.exit_code


def _fail(code: int, message: str) -> int:
    print(f"otslab: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

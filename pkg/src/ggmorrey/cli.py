"""Command-line front end: ``ggmorrey {norm,operator,constants,verify}``.

Exit codes: 0 success, 1 failed verification suite, 2 bad config or input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import constants as K
from .dsl import EvalDomainError, FamilySpec, ParseError, parse
from .grid import Domain, Grading, make_grid
from .norms import ParameterError, SpaceParams, delta_exponent, s_max
from .operators import maximal, singular
from .verify import (
    NORM_KINDS,
    CorpusItem,
    Discretization,
    default_corpus,
    norm_computation,
    refine_until,
    run_dominance_suite,
    run_embedding_suite,
    run_kernel_suite,
    run_operator_oracle_suite,
    run_reduction_suite,
)

log = logging.getLogger("ggmorrey")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class DomainConfig(_Strict):
    type: Literal["interval", "box"] = "interval"
    bounds: list

    def build(self):
        b = self.bounds
        try:
            if self.type == "interval":
                boxes = [b] if np.ndim(b) == 1 else b
                return Domain(tuple((tuple(iv),) for iv in boxes))
            boxes = [b] if np.ndim(b) == 2 else b
            return Domain(tuple(tuple(tuple(ax) for ax in box) for box in boxes))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"domain.bounds {exc}") from exc


class GradingConfig(_Strict):
    point: Union[float, list[float]]
    levels: int = Field(12, ge=0)
    ratio: float = Field(0.5, gt=0, lt=1)
    subdivisions: int = Field(4, ge=1)


class GridConfig(_Strict):
    cells: int = Field(2**12, ge=2)
    grading: list[GradingConfig] = []


class FamilyConfig(_Strict):
    name: Literal["power", "indicator", "oscillatory", "constant"]
    params: dict = {}


class FunctionConfig(_Strict):
    expr: Optional[str] = None
    family: Optional[FamilyConfig] = None
    singular_points: list[Union[float, list[float]]] = []
    blowup: float = 0.0

    @model_validator(mode="after")
    def _one_source(self):
        if (self.expr is None) == (self.family is None):
            raise ValueError("give exactly one of expr or family")
        return self


class SpaceConfig(_Strict):
    p: float
    lam: float = Field(0.0, alias="lambda")
    theta: float = 1.0
    alpha: float = 0.0

    @field_validator("p")
    @classmethod
    def _p(cls, v):
        if not v > 1:
            raise ValueError("must exceed 1")
        return v

    @model_validator(mode="after")
    def _valid(self):
        try:
            self.params()
        except ParameterError as exc:
            raise ValueError(str(exc)) from None
        return self

    def params(self):
        return SpaceParams(float(self.p), float(self.lam), float(self.theta), float(self.alpha))


class EpsConfig(_Strict):
    approach_count: int = Field(20, ge=1)
    uniform_count: int = Field(64, ge=0)


class BallsConfig(_Strict):
    stride: Optional[int] = Field(None, ge=1)
    per_octave: int = Field(8, ge=1)
    min_radius_cells: float = Field(2.0, gt=0)


class SweepsConfig(_Strict):
    eps: EpsConfig = EpsConfig()
    balls: BallsConfig = BallsConfig()


class OperatorConfig(_Strict):
    kind: Literal["maximal", "singular"] = "maximal"
    kernel: Literal["hilbert", "riesz1", "riesz2"] = "hilbert"
    delta_factor: float = Field(0.5, gt=0, lt=1)


class ConstantsConfig(_Strict):
    c0: float = Field(1.0, ge=0)
    c: float = Field(1.0, ge=0)
    C0: float = Field(1.0, ge=0)
    calibrate: bool = False


class SuiteConfig(_Strict):
    name: Literal["embedding", "dominance", "reduction", "operators", "kernel"] = "dominance"
    corpus: Literal["default", "function"] = "default"
    sigma: Optional[float] = None
    s: Optional[float] = None
    levels: int = Field(2, ge=1)
    rel_tol: float = Field(0.01, gt=0)
    max_levels: int = Field(6, ge=1)
    seed: int = 0
    samples: int = Field(10_000, ge=1)
    gamma: float = Field(1.0, ge=0)


class NormConfig(_Strict):
    kind: Literal["lebesgue", "morrey", "grand_lebesgue", "grand_grand"] = "grand_grand"


class OutputConfig(_Strict):
    path: Optional[str] = None
    format: Literal["json", "csv"] = "json"


class Config(_Strict):
    domain: DomainConfig = DomainConfig(bounds=[0.0, 1.0])
    grid: GridConfig = GridConfig()
    function: Optional[FunctionConfig] = None
    space: Optional[SpaceConfig] = None
    sweeps: SweepsConfig = SweepsConfig()
    operator: OperatorConfig = OperatorConfig()
    constants: ConstantsConfig = ConstantsConfig()
    suite: SuiteConfig = SuiteConfig()
    norm: NormConfig = NormConfig()
    output: OutputConfig = OutputConfig()

    def to_dict(self):
        return self.model_dump(by_alias=True, mode="json")

    def require_space(self):
        if self.space is None:
            raise ConfigError("space is required for this command")
        return self.space.params()

    def discretization(self):
        domain = self.domain.build()
        g = self.grid.grading[0] if self.grid.grading else GradingConfig(point=0.0)
        return Discretization(
            domain=domain,
            cells=self.grid.cells,
            grading_levels=g.levels,
            grading_ratio=g.ratio,
            grading_subdivisions=g.subdivisions,
            approach_count=self.sweeps.eps.approach_count,
            uniform_count=self.sweeps.eps.uniform_count,
            stride=self.sweeps.balls.stride,
            per_octave=self.sweeps.balls.per_octave,
            min_radius_cells=self.sweeps.balls.min_radius_cells,
        )

    def gradings(self, dim):
        return [Grading(_point(g.point, dim), g.levels, g.ratio, g.subdivisions) for g in self.grid.grading]

    def corpus_item(self):
        if self.function is None:
            raise ConfigError("function is required for this command")
        dim = self.domain.build().dim
        fn = self.function
        points = [_point(p, dim) for p in fn.singular_points] + [g.point for g in self.gradings(dim)]
        try:
            if fn.expr is not None:
                return CorpusItem("function", parse(fn.expr, dim), tuple(points), fn.blowup)
            spec = FamilySpec(fn.family.name, dict(fn.family.params))
            item = CorpusItem.from_family(fn.family.name, spec, dim)
        except ParseError as exc:
            raise ConfigError(f"function.expr {exc}") from exc
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"function.family {exc}") from exc
        pts = tuple(dict.fromkeys(_point(p, dim) for p in tuple(item.singular_points) + tuple(points)))
        return CorpusItem(item.label, item.ast, pts, item.blowup)


def _point(value, dim):
    pt = tuple(float(v) for v in np.atleast_1d(value))
    if len(pt) == 1 and dim == 2:
        pt = pt * 2
    return pt


def _format_errors(exc):
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"])
        msg = err["msg"].removeprefix("Value error, ")
        lines.append(f"{path} {msg}" if path else msg)
    return "; ".join(lines)


def _filled_defaults(model, prefix=""):
    out = []
    for name, info in type(model).model_fields.items():
        key = info.alias or name
        path = f"{prefix}{key}"
        value = getattr(model, name)
        if name not in model.model_fields_set:
            out.append(path)
        elif isinstance(value, BaseModel):
            out.extend(_filled_defaults(value, path + "."))
    return out


def config_from_dict(data, overrides=None):
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = json.loads(json.dumps(data))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, field = key.split(".")
        data.setdefault(section, {})[field] = value
    try:
        cfg = Config.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None
    for path in _filled_defaults(cfg):
        log.debug("default filled: %s", path)
    return cfg


def load_config(path, overrides=None):
    """Read and validate a JSON config, filling defaults; unknown keys are errors."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data, overrides)


def write_grid_function_csv(f, stream):
    """Columns ``x1[,x2],value``; 17 significant digits so values reload exactly."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([f"x{i + 1}" for i in range(f.grid.dim)] + ["value"])
    for c, v in zip(f.grid.centers, f.values):
        writer.writerow([f"{x:.17g}" for x in c] + [f"{v:.17g}"])


def read_grid_function_csv(stream):
    """Centers ``(N, n)`` and values ``(N,)`` from :func:`write_grid_function_csv` output."""
    rows = list(csv.reader(stream))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    n = len(header) - 1
    return body[:, :n], body[:, n]


def _emit(text, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_norm(cfg, args):
    params = cfg.require_space()
    kind = args.kind or cfg.norm.kind
    item = cfg.corpus_item()
    compute = norm_computation(kind, item, params, cfg.discretization())
    if args.refine:
        res = refine_until(compute, cfg.suite.rel_tol, cfg.suite.max_levels)
        # the value comes from the finer level of the agreeing pair
        value, converged = res.value, res.converged
        level = res.level + 1 if converged else res.level
    else:
        value, level, converged = compute(0), 0, None
    cells = cfg.discretization().at(level).grid(item.singular_points).size
    result = {
        "norm": kind,
        "value": value,
        "params": {"p": params.p, "lambda": params.lam, "theta": params.theta, "alpha": params.alpha},
        "grid": {"cells": cells, "levels": level},
        "converged": converged,
    }
    print(repr(value))
    print(f"norm={kind} cells={cells} level={level} converged={converged}")
    out = args.out or cfg.output.path
    if out and cfg.output.format == "csv":
        Path(out).write_text(f"norm,value,cells,levels\n{kind},{value!r},{cells},{level}\n")
    elif out:
        Path(out).write_text(json.dumps(result, indent=2) + "\n")
    return EXIT_OK


def cmd_operator(cfg, args):
    item = cfg.corpus_item()
    disc = cfg.discretization()
    if cfg.operator.kind == "maximal":
        grid = disc.grid(item.singular_points)
        uf = maximal(item.sample(grid), disc.balls(grid, centers="all"))
    else:
        grid = make_grid(disc.domain, disc.cells)
        try:
            uf = singular(item.sample(grid), cfg.operator.kernel, cfg.operator.delta_factor)
        except ValueError as exc:
            raise ConfigError(f"operator {exc}") from exc
    buf = io.StringIO()
    write_grid_function_csv(uf, buf)
    _emit(buf.getvalue(), args.out or cfg.output.path)
    return EXIT_OK


def cmd_constants(args):
    cfg = K.ConstantConfig(args.c0, args.c, args.C0)
    which = args.which
    need = lambda *names: [_require(args, n) for n in names]
    if which == "maximal":
        p, lam = need("p", "lam")
        value = K.maximal_constant(p, lam, args.n, cfg)
    elif which == "cz":
        p, lam = need("p", "lam")
        value = K.cz_constant(p, lam, cfg)
    elif which == "dominance":
        value = K.dominance_constant(args.n, _require(args, "d"))
    elif which == "s_max":
        value = s_max(_space_from_args(args))
    elif which == "delta":
        eps, sigma = need("eps", "sigma")
        value = delta_exponent(eps, sigma, _space_from_args(args))
    elif which == "reduction":
        sigma, sup_c = need("sigma", "supc")
        value = K.reduction_constant(_space_from_args(args), sigma, sup_c, cfg)
    else:
        iv = K.admissible_sigma(_space_from_args(args), args.kind)
        print(f"({iv.lo!r}, {iv.hi!r})")
        return EXIT_OK
    print(repr(value))
    return EXIT_OK


def _require(args, name):
    value = getattr(args, name)
    if value is None:
        raise ConfigError(f"--{'lambda' if name == 'lam' else name} is required")
    return value


def _space_from_args(args):
    pick = lambda value, default: default if value is None else value
    return SpaceParams(_require(args, "p"), pick(args.lam, 0.0), pick(args.theta, 1.0), pick(args.alpha, 0.0))


def cmd_verify(cfg, args):
    name = args.suite or cfg.suite.name
    s = cfg.suite
    disc = cfg.discretization()
    levels = tuple(range(s.levels))
    if name == "operators":
        report = run_operator_oracle_suite()
    elif name == "kernel":
        report = run_kernel_suite(cfg.operator.kernel, s.gamma, s.samples, s.seed)
    else:
        params = cfg.require_space()
        corpus = [cfg.corpus_item()] if s.corpus == "function" else default_corpus(params, disc.domain)
        if name == "embedding":
            report = run_embedding_suite(corpus, params, disc)
        elif name == "dominance":
            if s.sigma is None or s.s is None:
                raise ConfigError("suite.sigma and suite.s are required for the dominance suite")
            report = run_dominance_suite(corpus, params, s.s, s.sigma, disc, levels)
        else:
            if s.sigma is None:
                raise ConfigError("suite.sigma is required for the reduction suite")
            c = cfg.constants
            report = run_reduction_suite(
                cfg.operator.kind, corpus, params, s.sigma, disc,
                K.ConstantConfig(c.c0, c.c, c.C0), c.calibrate, levels,
                cfg.operator.kernel, cfg.operator.delta_factor,
            )
    for line in report.lines():
        log.info(line)
    _emit(report.to_json() + "\n", args.out or cfg.output.path)
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="ggmorrey", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON config file")
        p.add_argument("--out", help="output path (default: config output.path or stdout)")
        p.add_argument("--format", choices=["json", "csv"])
        p.add_argument("--verbose", "-v", action="store_true")
        p.add_argument("--p", type=float)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--sigma", type=float)

    p = sub.add_parser("norm", help="compute a norm of the configured function")
    common(p)
    p.add_argument("--kind", choices=NORM_KINDS)
    p.add_argument("--refine", action="store_true", help="refine until suite.rel_tol is met")
    p = sub.add_parser("operator", help="apply M or T and write the result as CSV")
    common(p)
    p = sub.add_parser("verify", help="run a verification suite and write a JSON report")
    common(p)
    p.add_argument("--suite", choices=["embedding", "dominance", "reduction", "operators", "kernel"])
    p = sub.add_parser("constants", help="evaluate an explicit constant")
    common(p, config_required=False)
    p.add_argument("which", choices=["maximal", "cz", "dominance", "reduction", "sigma", "s_max", "delta"])
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--d", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--supc", type=float)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--C0", type=float, default=1.0)
    p.add_argument("--kind", choices=["maximal", "singular"], default="maximal")
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr
    )
    try:
        if args.command == "constants":
            return cmd_constants(args)
        overrides = {
            "space.p": args.p,
            "space.lambda": args.lam,
            "space.theta": args.theta,
            "space.alpha": args.alpha,
            "suite.sigma": args.sigma,
            "output.format": args.format,
        }
        cfg = load_config(args.config, overrides)
        handler = {"norm": cmd_norm, "operator": cmd_operator, "verify": cmd_verify}[args.command]
        return handler(cfg, args)
    except (ConfigError, ParameterError, ParseError, EvalDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main():
    sys.exit(run())

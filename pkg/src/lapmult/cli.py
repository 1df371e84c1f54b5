"""Command line front end.

Subcommands ``kernel``, ``compare``, ``scan`` and ``probe`` read a
``key = value`` config file (optional) and flags of the same names; flags
win.  Reports are CSV with a ``#`` header echoing the resolved config, and
optionally mirrored to JSON.

Exit codes: 0 success, 1 tolerance failure, 2 config error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from .estimates import ScanFailure, ScanGrid, cz_scan, laguerre_bound_scan
from .heatkernels import CLASSICAL, HERMITE, ORNSTEIN_UHLENBECK, KernelFamily, laguerre
from .multipliers import (
    DiagonalEvaluation,
    SpectralTruncation,
    bump_corpus,
    multiplier_kernel,
    parse_symbol,
    pv_apply,
    spectral_coefficients,
    spectral_values,
)
from .quadrature import MaxSubdivisionsExceeded, Tolerance
from .vecspace import CoordinateSpace, default_corpus, gamma_norm_probe

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

_DEFAULT_POINTS = {
    "real": "-1.1,-0.3,0.3,0.9,2.2",
    "positive": "0.8,1.4,2.1,2.9,3.6",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    family: str = "hermite"
    alpha: float = 0.5
    symbol: str = "imaginary:0.5"
    K: int = 400
    abs_tol: float = 1e-15
    rel_tol: float = 1e-10
    max_subdivisions: int = 50000
    x_min: float = -4.0
    x_max: float = 4.0
    y_min: float = -4.0
    y_max: float = 4.0
    n: int = 17
    relative: bool = False
    points: str = ""
    tolerance: float = 1e-3
    scan: str = "cz"
    p: float = 2.0
    q: float = 2.0
    dimension: int = 2
    gammas: str = "0,0.5,1,2,4"
    seed: int = 20240501
    output: str = "-"
    json: str = ""


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key, raw):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        return raw
    except ValueError:
        raise ConfigError(f"bad value for key {key!r}: {raw!r}") from None


def read_config_file(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), delimiters=("=",))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[run]\n" + fh.read(), source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from None
    raw = dict(parser.items("run"))
    unknown = sorted(set(raw) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return raw


def resolve_config(file_values: dict, overrides: dict) -> RunConfig:
    merged = {**file_values, **{k: v for k, v in overrides.items() if v is not None}}
    unknown = sorted(set(merged) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    values = {k: _parse_value(k, str(v)) for k, v in merged.items()}
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    try:
        family_from(cfg)
    except ValueError as exc:
        raise ConfigError(f"key 'family'/'alpha': {exc}") from None
    try:
        parse_symbol(cfg.symbol)
    except ValueError as exc:
        raise ConfigError(f"key 'symbol': {exc}") from None
    for key in ("K", "n", "dimension", "max_subdivisions"):
        if getattr(cfg, key) < 1:
            raise ConfigError(f"key {key!r} must be positive")
    if cfg.n < 3:
        raise ConfigError("key 'n' must be at least 3")
    if not (0 < cfg.abs_tol < 1 and 0 < cfg.rel_tol < 1 and cfg.tolerance > 0):
        raise ConfigError("keys 'abs_tol', 'rel_tol' and 'tolerance' must be positive (and < 1 for quadrature)")
    if not (cfg.x_min < cfg.x_max and cfg.y_min < cfg.y_max):
        raise ConfigError("keys 'x_min' < 'x_max' and 'y_min' < 'y_max' required")
    if cfg.scan not in ("cz", "a", "b", "c", "d"):
        raise ConfigError(f"key 'scan' must be one of cz, a, b, c, d; got {cfg.scan!r}")
    if not (1 < cfg.p < math.inf) or not cfg.q >= 1:
        raise ConfigError("keys 'p' in (1, inf) and 'q' >= 1 required")
    for key in ("points", "gammas"):
        try:
            _float_list(getattr(cfg, key))
        except ValueError:
            raise ConfigError(f"key {key!r} must be a comma separated list of numbers") from None


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def family_from(cfg: RunConfig) -> KernelFamily:
    name = cfg.family.lower()
    if name == "hermite":
        return HERMITE
    if name in ("ou", "ornstein-uhlenbeck", "ornsteinuhlenbeck"):
        return ORNSTEIN_UHLENBECK
    if name == "classical":
        return CLASSICAL
    if name == "laguerre":
        return laguerre(cfg.alpha)
    raise ValueError(f"unknown family {cfg.family!r}")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


class Report:
    """CSV body plus header comments; rendered once at the end."""

    def __init__(self, command: str, cfg: RunConfig, columns):
        self.command = command
        self.cfg = cfg
        self.columns = list(columns)
        self.rows = []
        self.summary = {}

    def add(self, *row):
        self.rows.append(row)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(f"# command={self.command}\n")
        for f in fields(RunConfig):
            out.write(f"# {f.name}={_fmt(getattr(self.cfg, f.name))}\n")
        for k, v in self.summary.items():
            out.write(f"# {k}={_fmt(v)}\n")
        out.write(",".join(self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(_fmt(v) for v in row) + "\n")
        return out.getvalue()

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "config": dataclasses.asdict(self.cfg),
            "summary": {k: _plain(v) for k, v in self.summary.items()},
            "columns": self.columns,
            "rows": [[_plain(v) for v in row] for row in self.rows],
        }
        return json.dumps(payload, indent=1, sort_keys=False)


def _plain(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _tolerance(cfg):
    return Tolerance(cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)


def cmd_kernel(cfg: RunConfig):
    family = family_from(cfg)
    symbol = parse_symbol(cfg.symbol)
    xs = np.linspace(cfg.x_min, cfg.x_max, cfg.n)
    ys = np.linspace(cfg.y_min, cfg.y_max, cfg.n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    keep = X != Y
    if family.domain == "positive":
        keep &= (X > 0) & (Y > 0)
    px, py = X[keep], Y[keep]
    if px.size == 0:
        raise ConfigError("grid has no off-diagonal points in the domain")
    res = multiplier_kernel(family, symbol, px, py, _tolerance(cfg))
    rep = Report("kernel", cfg, ["x", "y", "re_K", "im_K", "quad_error"])
    for x, y, k, e in zip(px, py, np.atleast_1d(res.value), np.atleast_1d(res.error_estimate)):
        rep.add(x, y, complex(k).real, complex(k).imag, e)
    rep.summary["max_abs_K"] = float(np.max(np.abs(res.value)))
    return rep, EXIT_OK


def cmd_compare(cfg: RunConfig):
    family = family_from(cfg)
    if family.tag not in ("Hermite", "Laguerre"):
        raise ConfigError("key 'family': compare needs hermite or laguerre")
    symbol = parse_symbol(cfg.symbol)
    points = np.array(_float_list(cfg.points or _DEFAULT_POINTS[family.domain]))
    try:
        family.check_points(points)
    except ValueError as exc:
        raise ConfigError(f"key 'points': {exc}") from None
    rep = Report("compare", cfg, ["bump", "x", "spectral_re", "spectral_im", "pv_re", "pv_im", "abs_diff"])
    worst = 0.0
    for b, f in enumerate(bump_corpus(family.domain)):
        coeffs = spectral_coefficients(family, f, cfg.K)
        spec = spectral_values(family, symbol, f, points, coefficients=coeffs)
        pv = pv_apply(family, symbol, f, points, warn=False).value
        for x, s, v in zip(points, spec, pv):
            diff = abs(s - v)
            worst = max(worst, diff)
            rep.add(b, x, s.real, s.imag, v.real, v.imag, diff)
    passed = worst <= cfg.tolerance
    rep.summary["max_abs_diff"] = worst
    rep.summary["result"] = "PASS" if passed else "FAIL"
    return rep, EXIT_OK if passed else EXIT_TOLERANCE


def cmd_scan(cfg: RunConfig):
    symbol = parse_symbol(cfg.symbol)
    grid = ScanGrid((cfg.x_min, cfg.x_max), (cfg.y_min, cfg.y_max), cfg.n, cfg.relative)
    if cfg.scan == "cz":
        reports = cz_scan(family_from(cfg), symbol, grid)
    else:
        reports = (laguerre_bound_scan(cfg.alpha, symbol, cfg.scan, grid),)
    rep = Report("scan", cfg, ["id", "x", "y", "ratio"])
    ok = True
    for i, r in enumerate(reports):
        for k, v in r.summary().items():
            if k in ("x_range", "y_range", "resolution", "worst_point"):
                v = " ".join(_fmt(u) for u in v)
            rep.summary[f"report{i}.{k}"] = v
        for x, y, ratio in r.points:
            rep.add(r.id, x, y, ratio)
        ok &= not r.inconclusive
    rep.summary["result"] = "PASS" if ok else "FAIL"
    return rep, EXIT_OK if ok else EXIT_TOLERANCE


def cmd_probe(cfg: RunConfig):
    family = family_from(cfg)
    if family.tag not in ("Hermite", "Laguerre"):
        raise ConfigError("key 'family': probe needs hermite or laguerre")
    gammas = _float_list(cfg.gammas)
    if not gammas:
        raise ConfigError("key 'gammas' is empty")
    space = CoordinateSpace(cfg.q, cfg.dimension)
    corpus = default_corpus(cfg.dimension, family.domain, cfg.seed)
    rows = gamma_norm_probe(family, cfg.p, space, gammas, corpus, trunc=SpectralTruncation(cfg.K))
    rep = Report("probe", cfg, ["gamma", "max_ratio"] + [f"ratio_{i}" for i in range(len(corpus))])
    for r in rows:
        rep.add(r.gamma, r.max_ratio, *r.ratios)
    return rep, EXIT_OK


COMMANDS = {"kernel": cmd_kernel, "compare": cmd_compare, "scan": cmd_scan, "probe": cmd_probe}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lapmult", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__name__.replace("cmd_", "") + " report")
        p.add_argument("--config", help="key = value config file")
        for f in fields(RunConfig):
            p.add_argument(f"--{f.name}", dest=f.name, default=None, metavar=f.name.upper())
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(file_values, overrides)
        report, code = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MaxSubdivisionsExceeded, ScanFailure, DiagonalEvaluation, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = report.to_csv()
    try:
        if cfg.output == "-":
            sys.stdout.write(text)
        else:
            with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        if cfg.json:
            with open(cfg.json, "w", encoding="utf-8") as fh:
                fh.write(report.to_json() + "\n")
    except OSError as exc:
        print(f"config error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())

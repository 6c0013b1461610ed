"""Command-line entry point: ``sdiqrng {simulate,certify,scan,finite-size,quadrature}``.

Settings come from a flat YAML file (``--config``) and are overridden by
flags.  Exit codes: 0 success, 2 input error, 3 infeasible statistics,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import List, Optional, Sequence

import numpy as np
import yaml

from . import __version__
from .finitesize import SWEEP_COLUMNS, FiniteSizeParams, rate_table
from .guessing import InfeasibleStats, SolverFailure, guessing_probability
from .photonics import (DetectorConfig, SourceConfig, event_probabilities,
                        overlaps_from_amplitudes)
from .qstates import InfeasibleOverlaps, OverlapBounds
from .radau import gauss_radau
from .report import CertifyOptions, certify, ensemble_for
from .seesaw import SeesawNotConverged, SeesawOptions, shannon_bound
from .simulator import RunConfig, RunRecord, simulate
from .stats import ConditionalStats

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4
THREADS_ENV = "SDIQRNG_THREADS"
DIGITS = 12


class InputError(ValueError):
    pass


@dataclass
class Settings:
    """Every configurable value; field names are the config-file keys."""

    alpha: float = 0.4
    beta0: float = 0.66
    beta1: float = 0.66
    priors: List[float] = dataclasses.field(default_factory=lambda: [0.25, 0.25, 0.5])
    eta: float = 0.94
    p_dc: float = 1e-6
    g: List[float] = dataclasses.field(default_factory=lambda: [0.5, 0.5, 0.0])
    d01: Optional[float] = None       # overlap bounds; default: from the amplitudes
    d02: Optional[float] = None
    d12: Optional[float] = None
    n_rounds: int = 10**6
    seed: int = 0
    repetitions: int = 1
    jitter: float = 0.0
    dim: int = 3
    m: int = 8
    n_lambda: int = 3
    restarts: int = 5
    seesaw_seed: int = 0
    seesaw_tol: float = 1e-4
    epsilon: float = 1e-8
    epsilon_ext: float = 1e-8
    pr_omega: float = 0.5
    alpha_renyi: Optional[float] = None
    relax: bool = False

    def source(self) -> SourceConfig:
        return SourceConfig(self.alpha, self.beta0, self.beta1, tuple(self.priors))

    def detector(self) -> DetectorConfig:
        return DetectorConfig(self.eta, self.p_dc, tuple(self.g))

    def overlaps(self) -> OverlapBounds:
        model = overlaps_from_amplitudes(self.source())
        return OverlapBounds(*(model_v if v is None else v for v, model_v in
                               zip((self.d01, self.d02, self.d12), model.as_tuple())))

    def run_config(self) -> RunConfig:
        return RunConfig(self.source(), self.detector(), self.n_rounds, self.seed,
                         self.repetitions, self.jitter)

    def certify_options(self) -> CertifyOptions:
        return CertifyOptions(self.dim, self.m, self.relax, SeesawOptions(
            n_lambda=self.n_lambda, restarts=self.restarts, seed=self.seesaw_seed,
            tol=self.seesaw_tol))

    def finite_params(self, n_rounds: float) -> FiniteSizeParams:
        return FiniteSizeParams(n_rounds, self.epsilon, self.epsilon_ext, 3, self.pr_omega,
                                self.alpha_renyi)


def _coerce(name: str, value, default):
    if value is None:
        return None
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise InputError(f"{name}: expected true/false, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, (list, tuple)) or len(value) != len(default):
            raise InputError(f"{name}: expected a list of {len(default)} numbers")
        return [float(v) for v in value]
    if isinstance(default, int) and not isinstance(value, bool):
        as_float = float(value)
        if as_float != int(as_float):
            raise InputError(f"{name}: expected an integer, got {value!r}")
        return int(as_float)
    try:
        return float(value)
    except (TypeError, ValueError):
        raise InputError(f"{name}: expected a number, got {value!r}") from None


def load_settings(path: Optional[str], overrides: dict) -> Settings:
    values = {}
    if path:
        try:
            with open(path) as fh:
                doc = yaml.safe_load(fh)
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise InputError(f"{path}: {exc}") from None
        if doc is None:
            doc = {}
        if not isinstance(doc, dict):
            raise InputError(f"{path}: expected a flat key: value mapping")
        values.update(doc)
    values.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name: f for f in fields(Settings)}
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise InputError(f"unknown setting(s): {', '.join(unknown)}")
    defaults = Settings()
    kwargs = {}
    for k, v in values.items():
        default = getattr(defaults, k)
        if default is None:          # optional floats
            default = 1.0
        kwargs[k] = _coerce(k, v, default)
    return Settings(**kwargs)


# -- stats files --------------------------------------------------------------

def parse_stats_text(text: str, source: str = "<stats>") -> ConditionalStats:
    """3x3 table, rows b and columns x; integer entries are counts.

    Blank lines and ``#`` comments are ignored.
    """
    rows, first_line = [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        first_line = first_line or lineno
        parts = line.replace(",", " ").split()
        if len(parts) != 3:
            raise InputError(f"{source}:{lineno}: expected 3 entries, found {len(parts)}")
        try:
            rows.append(([float(p) for p in parts], parts, lineno))
        except ValueError:
            raise InputError(f"{source}:{lineno}: not a number in {line!r}") from None
        if len(rows) > 3:
            raise InputError(f"{source}:{lineno}: more than 3 rows")
    if not rows:
        raise InputError(f"{source}:1: empty stats file")
    if len(rows) < 3:
        raise InputError(f"{source}:{rows[-1][2]}: expected 3 rows, found {len(rows)}")
    table = np.array([r[0] for r in rows])
    if np.any(table < 0):
        raise InputError(f"{source}: negative entry")
    is_counts = all("." not in p and "e" not in p.lower() for r in rows for p in r[1])
    try:
        if is_counts:
            return ConditionalStats.from_counts(table.astype(np.int64))
        return ConditionalStats(table)
    except ValueError as exc:
        raise InputError(f"{source}:{first_line}: {exc}") from None


def read_stats(path: str, rep: Optional[int] = None) -> ConditionalStats:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read stats {path}: {exc.strerror}") from None
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{exc.lineno}: {exc.msg}") from None
        try:
            if "counts" in doc:
                record = RunRecord.from_json(text)
                return record.pooled() if rep is None else record.stats(rep)
            if "probs" in doc:
                return ConditionalStats(np.asarray(doc["probs"], dtype=float))
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            raise InputError(f"{path}: {exc}") from None
        raise InputError(f"{path}: JSON stats need a 'counts' or 'probs' field")
    return parse_stats_text(text, path)


# -- output -------------------------------------------------------------------

def fmt(v: float) -> str:
    return f"{v:.{DIGITS}g}"


def _round(obj):
    if isinstance(obj, float):
        return obj if not math.isfinite(obj) else float(fmt(obj))
    if isinstance(obj, (np.floating,)):
        return _round(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def provenance(command: str, settings: Settings, extra: Optional[dict] = None) -> dict:
    doc = {"tool": "sdiqrng", "version": __version__, "command": command,
           "settings": dataclasses.asdict(settings)}
    if extra:
        doc.update(extra)
    return _round(doc)


def emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def csv_text(header: dict, columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = ["# " + json.dumps(header, sort_keys=True), ",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def json_text(doc: dict) -> str:
    return json.dumps(_round(doc), indent=2, sort_keys=True) + "\n"


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


# -- commands -----------------------------------------------------------------

def cmd_simulate(args, settings: Settings) -> int:
    record = simulate(settings.run_config())
    doc = json.loads(record.to_json())
    doc["provenance"] = provenance("simulate", settings)
    emit(json_text(doc), args.out)
    return EXIT_OK


def _stats_and_rounds(args, settings: Settings):
    if args.stats:
        stats = read_stats(args.stats, args.rep)
        n = args.n_rounds_eval or stats.n_rounds or settings.n_rounds
    else:
        stats = event_probabilities(settings.source(), settings.detector())
        n = args.n_rounds_eval or settings.n_rounds
    return stats, float(n)


def cmd_certify(args, settings: Settings) -> int:
    stats, n = _stats_and_rounds(args, settings)
    rep = certify(stats, settings.overlaps(), settings.finite_params(n),
                  settings.certify_options(), tuple(settings.priors))
    doc = rep.as_dict()
    doc["stats"] = stats.probs.tolist()
    doc["provenance"] = provenance("certify", settings,
                                   {"stats_file": args.stats, "rep": args.rep})
    emit(json_text(doc), args.out)
    return EXIT_OK


def scan_point(settings: Settings, alpha: float, beta: float, shannon: bool):
    s = dataclasses.replace(settings, alpha=alpha, beta0=beta, beta1=beta,
                            d01=None, d02=None, d12=None)
    stats = event_probabilities(s.source(), s.detector())
    try:
        ens = ensemble_for(s.overlaps(), s.dim, tuple(s.priors))
        hmin = guessing_probability(stats, ens, s.dim).min_entropy
        sh = math.nan
        if shannon:
            opts = s.certify_options()
            sh = shannon_bound(stats, ens, gauss_radau(s.m), s.dim, opts.seesaw).s_star
    except (InfeasibleStats, InfeasibleOverlaps):
        return alpha, beta, math.nan, math.nan
    return alpha, beta, hmin, sh


def _grid(lo: float, hi: float, n: int) -> List[float]:
    if n < 1 or n > 200:
        raise InputError("grid size must be between 1 and 200")
    if not (0 <= lo <= 1.5 and 0 <= hi <= 1.5):
        raise InputError("amplitude ranges must lie within [0, 1.5]")
    return [lo] if n == 1 else [float(v) for v in np.linspace(lo, hi, n)]


def cmd_scan(args, settings: Settings) -> int:
    alphas = _grid(*args.alpha_range, args.grid[0])
    betas = _grid(*args.beta_range, args.grid[1])
    points = [(a, b) for a in alphas for b in betas]
    shannon = not args.no_shannon
    workers = _threads()
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(scan_point, [settings] * len(points),
                                 [p[0] for p in points], [p[1] for p in points],
                                 [shannon] * len(points)))
    else:
        rows = [scan_point(settings, a, b, shannon) for a, b in points]
    rows.sort(key=lambda r: (r[0], r[1]))
    header = provenance("scan", settings, {"alpha_range": list(args.alpha_range),
                                           "beta_range": list(args.beta_range),
                                           "grid": list(args.grid), "shannon": shannon})
    emit(csv_text(header, ("alpha", "beta", "hmin", "shannon"), rows), args.out)
    return EXIT_OK


def cmd_finite_size(args, settings: Settings) -> int:
    stats, _ = _stats_and_rounds(args, settings)
    n_list = sorted(args.n_list) if args.n_list else \
        [float(v) for v in np.logspace(3, 7, 17)]
    opts = settings.certify_options()
    ens = ensemble_for(settings.overlaps(), settings.dim, tuple(settings.priors))
    guess = guessing_probability(stats, ens, settings.dim, relax=settings.relax)
    bound = shannon_bound(guess.stats, ens, gauss_radau(settings.m), settings.dim, opts.seesaw)
    table = rate_table(bound.s_star, guess.min_entropy, guess.stats.column(2), n_list,
                       settings.finite_params(n_list[0]))
    rows = [[r.as_dict()[c] for c in SWEEP_COLUMNS] for r in table]
    header = provenance("finite-size", settings, {"stats_file": args.stats,
                                                  "s_star": bound.s_star,
                                                  "hmin": guess.min_entropy})
    if args.format == "json":
        emit(json_text({"provenance": header, "columns": list(SWEEP_COLUMNS), "rows": rows}),
             args.out)
    else:
        emit(csv_text(header, SWEEP_COLUMNS, rows), args.out)
    return EXIT_OK


def cmd_quadrature(args, settings: Settings) -> int:
    rule = gauss_radau(args.order)
    rows = [(float(t), float(w)) for t, w in zip(rule.nodes, rule.weights)]
    emit(csv_text(provenance("quadrature", settings, {"m": args.order}), ("t", "w"), rows),
         args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat YAML settings file")
    p.add_argument("--out", help="write output here instead of stdout")
    for f in fields(Settings):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "relax":
            p.add_argument(flag, action="store_const", const=True, default=None,
                           help="certify the nearest reproducible table if the input is not")
        elif f.name in ("priors", "g"):
            p.add_argument(flag, type=float, nargs=3, default=None)
        elif f.name in ("n_rounds", "seed", "repetitions", "dim", "m", "n_lambda",
                        "restarts", "seesaw_seed"):
            p.add_argument(flag, type=lambda v: int(float(v)), default=None)
        else:
            p.add_argument(flag, type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdiqrng", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo record of counts n[b, x]")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    for name, func, helptext in (
            ("certify", cmd_certify, "full certification report (JSON)"),
            ("finite-size", cmd_finite_size, "rates versus round count (CSV/JSON)")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("stats", nargs="?",
                       help="record JSON or 3x3 text table; omitted: model probabilities")
        p.add_argument("--rep", type=int, default=None,
                       help="use one repetition of a record instead of the pooled counts")
        p.add_argument("--n-rounds-eval", type=float, default=None,
                       help="round count N for finite-size terms (default: from the counts)")
        _common(p)
        p.set_defaults(func=func)
        if name == "finite-size":
            p.add_argument("--n-list", type=float, nargs="+", default=None)
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("scan", help="H_min and Shannon bound over an amplitude grid (CSV)")
    p.add_argument("--alpha-range", type=float, nargs=2, default=(0.1, 1.0))
    p.add_argument("--beta-range", type=float, nargs=2, default=(0.1, 1.0))
    p.add_argument("--grid", type=int, nargs=2, default=(10, 10))
    p.add_argument("--no-shannon", action="store_true", help="skip the see-saw column")
    _common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("quadrature", help="Gauss-Radau nodes and weights on (0, 1] (CSV)")
    p.add_argument("order", type=int)
    _common(p)
    p.set_defaults(func=cmd_quadrature)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {f.name: getattr(args, f.name) for f in fields(Settings)}
    try:
        settings = load_settings(args.config, overrides)
        settings.source(), settings.detector()       # validate early
        return args.func(args, settings)
    except (InfeasibleStats, InfeasibleOverlaps) as exc:
        print(f"sdiqrng {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SolverFailure, SeesawNotConverged) as exc:
        print(f"sdiqrng {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InputError, ValueError) as exc:
        print(f"sdiqrng {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Batch experiment runner.

Subcommands write tidy CSV: a few ``#`` comment lines (schema version and the
effective configuration), then a mandatory header row. Outputs contain no
timestamps or paths, so equal configurations give byte-identical files.

Configuration comes from ``--config`` (``key=value`` lines, ``#`` comments)
and command-line flags; flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
import warnings
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .core import KINDS, Domain, ProblemBounds, make_loss_sequence, parse_keyvalue
from .ogd import run_ogd
from .regret import REPORT_COLUMNS, regret_report
from .sogd import RegimeWarning, build_grid, run_sogd
from .special import ConfidenceParams
from .verification import BIT_FAMILIES, geometric_margin, payoff_corpus, potential_corpus, potential_gap_grid

log = logging.getLogger("discounted_oco")

SCHEMA_VERSION = 1
SUBCOMMANDS = ("run-ogd", "run-sogd", "verify-dnp", "sweep-lambda")
DNP_COLUMNS = ("family", "n", "Z", "eta", "check", "min_margin", "tolerance", "pass", "in_hypothesis",
               "sequences", "T")


class ConfigError(ValueError):
    pass


def _fraction(text: str) -> float:
    return float(Fraction(text.strip()))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(_fraction(s) for s in text.split(",") if s.strip())


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _cells(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in _str_list(text):
        n, _, z = item.partition(":")
        if not z:
            raise ValueError(f"cell {item!r} is not n:Z")
        out.append((_fraction(n), _fraction(z)))
    return tuple(out)


@dataclass
class RunConfig:
    subcommand: str = "run-ogd"
    T: int | None = None
    tau: int | None = None
    Z: float | None = None
    dim: int = 1
    G: float = 1.0
    radius: float = 0.5
    gen: str = "piecewise-stationary-absolute"
    seed: int = 0
    lambdas: tuple[float, ...] | None = None
    samples: int = 20
    points: int = 100
    families: tuple[str, ...] = BIT_FAMILIES
    cells: tuple[tuple[float, float], ...] = ((256.0, 1 / 1024), (1024.0, 1 / 8192))
    sequences: int = 50
    out: str = "-"
    verbosity: int = 0

    PARSERS = {
        "subcommand": str, "T": int, "tau": int, "Z": _fraction, "dim": int, "G": _fraction,
        "radius": _fraction, "gen": str, "seed": int, "lambdas": _float_list, "samples": int,
        "points": int, "families": _str_list, "cells": _cells, "sequences": int, "out": str,
        "verbosity": int,
    }
    # keys that do not change results and are left out of the echoed config
    NOT_ECHOED = ("out", "subcommand")

    @classmethod
    def from_entries(cls, entries: dict[str, tuple[str, str]]) -> "RunConfig":
        """Build from ``{key: (raw value, source location)}``."""
        cfg = cls()
        for key, (raw, where) in entries.items():
            if key not in cls.PARSERS:
                raise ConfigError(f"{where}: unknown key {key!r}")
            try:
                setattr(cfg, key, cls.PARSERS[key](raw))
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"{where}: bad value {raw!r} for {key}: {exc}") from None
        cfg._sources = {k: where for k, (_, where) in entries.items()}
        return cfg

    def where(self, key: str) -> str:
        return getattr(self, "_sources", {}).get(key, f"default {key}")

    def resolved(self) -> "RunConfig":
        """Fill subcommand-dependent defaults and validate."""
        sub = self.subcommand
        if sub not in SUBCOMMANDS:
            raise ConfigError(f"{self.where('subcommand')}: unknown subcommand {sub!r}")
        if self.T is None:
            self.T = {"run-ogd": 2000, "verify-dnp": 2000}.get(sub, 8192)
        if self.tau is None:
            self.tau = 512 if self.T >= 512 else self.T
        if self.Z is None:
            self.Z = 1.0 / self.T
        if self.lambdas is None:
            self.lambdas = (0.9, 0.99, 0.999)
        self._validate()
        return self

    def _validate(self) -> None:
        def bad(key, msg):
            raise ConfigError(f"{self.where(key)}: {msg}")

        if self.T < 1:
            bad("T", f"T must be >= 1, got {self.T}")
        if not 1 <= self.tau <= self.T:
            bad("tau", f"tau must lie in 1..T, got {self.tau}")
        if not 0 < self.Z <= 1 / math.e:
            bad("Z", f"Z must lie in (0, 1/e], got {self.Z}")
        if self.dim < 1:
            bad("dim", f"dim must be >= 1, got {self.dim}")
        if not self.G > 0:
            bad("G", f"G must be positive, got {self.G}")
        if not self.radius > 0:
            bad("radius", f"radius must be positive, got {self.radius}")
        if self.gen not in KINDS:
            bad("gen", f"unknown generator {self.gen!r}; expected one of {', '.join(KINDS)}")
        for lam in self.lambdas:
            if not 0 < lam < 1:
                bad("lambdas", f"discount factor {lam} outside (0, 1)")
        if not self.families:
            bad("families", "empty corpus: no bit families")
        for fam in self.families:
            if fam not in BIT_FAMILIES:
                bad("families", f"unknown bit family {fam!r}")
        if not self.cells:
            bad("cells", "empty corpus: no (n, Z) cells")
        if self.samples < 0 or self.points < 1 or self.sequences < 1:
            bad("samples", "samples >= 0, points >= 1 and sequences >= 1 required")

    def echo(self) -> list[str]:
        lines = []
        for f in fields(self):
            if f.name in self.NOT_ECHOED:
                continue
            v = getattr(self, f.name)
            if f.name == "cells":
                text = ",".join(f"{n!r}:{z!r}" for n, z in v)
            elif isinstance(v, tuple):
                text = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, float):
                text = repr(v)
            else:
                text = str(v)
            lines.append(f"{f.name}={text}")
        return lines


def _problem(cfg: RunConfig):
    domain = Domain.ball(np.zeros(cfg.dim), cfg.radius)
    bounds = ProblemBounds(cfg.G, domain.diameter)
    return make_loss_sequence(cfg.gen, cfg.T, domain, bounds, cfg.seed)


def _header(cfg: RunConfig) -> str:
    lines = [f"# discounted-oco {cfg.subcommand} schema=v{SCHEMA_VERSION} package={__version__}"]
    lines += [f"# {line}" for line in cfg.echo()]
    return "\n".join(lines) + "\n"


def _report_csv(cfg: RunConfig, reports) -> str:
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def cmd_run_ogd(cfg: RunConfig) -> str:
    reports = []
    for lam in cfg.lambdas:
        losses = _problem(cfg)
        decisions = run_ogd(lam, losses)
        reports.append(regret_report(decisions, losses, lam, "thm1"))
    return _report_csv(cfg, reports)


def sampled_lambdas(T: int, tau: int, count: int, seed: int) -> np.ndarray:
    """Discounts with ``1 - lam`` log-uniform on ``[1/T, 1/tau]``, sorted descending."""
    rng = np.random.default_rng([seed, 0x5A3D])
    logs = rng.uniform(math.log(1 / T), math.log(1 / tau), size=count)
    return np.sort(1.0 - np.exp(logs))[::-1]


def sweep_lambdas(T: int, tau: int, points: int) -> np.ndarray:
    if points == 1:
        return np.array([1.0 - 1.0 / T])
    return 1.0 - np.exp(np.linspace(math.log(1 / T), math.log(1 / tau), points))


def _run_sogd_checked(cfg: RunConfig):
    losses = _problem(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        run = run_sogd(cfg.T, cfg.tau, cfg.Z, losses)
    for w in caught:
        if issubclass(w.category, RegimeWarning):
            print(f"warning: {w.message}", file=sys.stderr)
    return losses, run


def _write_traces(cfg: RunConfig, run) -> None:
    if cfg.out == "-":
        log.warning("traces need --out; skipped")
        return
    stem = Path(cfg.out)
    K = run.omegas.shape[1]
    for name, data in (("omega", run.omegas), ("deviation", run.deviations)):
        path = stem.with_name(stem.name + f".{name}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"level{i}" for i in range(1, K + 1)])
            for t, row in enumerate(data, 1):
                w.writerow([t] + [repr(float(v)) for v in row])


def cmd_run_sogd(cfg: RunConfig) -> str:
    losses, run = _run_sogd_checked(cfg)
    grid = run.grid
    reports = [regret_report(run.decisions, losses, lam, "eq29-grid", Z=run.Z, N=grid.N) for lam in grid.lambdas]
    for lam in sampled_lambdas(cfg.T, cfg.tau, cfg.samples, cfg.seed):
        reports.append(regret_report(run.decisions, losses, float(lam), "thm3-uniform", Z=run.Z, N=grid.N))
    if cfg.verbosity >= 2:
        _write_traces(cfg, run)
    return _report_csv(cfg, reports)


def cmd_sweep_lambda(cfg: RunConfig) -> str:
    losses, run = _run_sogd_checked(cfg)
    reports = [
        regret_report(run.decisions, losses, float(lam), "thm3-uniform", Z=run.Z, N=run.grid.N)
        for lam in sweep_lambdas(cfg.T, cfg.tau, cfg.points)
    ]
    if cfg.verbosity >= 2:
        _write_traces(cfg, run)
    return _report_csv(cfg, reports)


def cmd_verify_dnp(cfg: RunConfig) -> str:
    rows = []
    for n, Z in cfg.cells:
        p = ConfidenceParams(n, Z)
        rho = p.rho
        etas = sorted({rho, (1 + rho) / 2, 0.999})
        results = payoff_corpus(p, etas, cfg.families, cfg.sequences, cfg.T, cfg.seed)
        results += potential_corpus(p, etas, cfg.families, max(1, cfg.sequences // 5), min(cfg.T, 2000), cfg.seed)
        for r in results:
            rows.append([r.family, repr(r.n), repr(r.Z), repr(r.eta), r.check, repr(r.min_margin),
                         repr(r.tolerance), str(r.passed).lower(), str(r.in_hypothesis).lower(),
                         r.sequences, r.T])
        _, gap = potential_gap_grid(p)
        halfline_margin = float(gap.min())
        rows.append(["grid", repr(n), repr(Z), "", "potential-vs-halfline", repr(halfline_margin), "1e-08",
                     str(halfline_margin >= -1e-8).lower(), str(p.U >= 22).lower(), 1, len(gap)])
        geo = geometric_margin(p) - 1.0
        rows.append(["grid", repr(n), repr(Z), "", "triangle-area", repr(geo), "0.0",
                     str(geo >= 0).lower(), str(n >= 32 and p.U >= 22).lower(), 1, 1])
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DNP_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


COMMANDS = {
    "run-ogd": cmd_run_ogd,
    "run-sogd": cmd_run_sogd,
    "verify-dnp": cmd_verify_dnp,
    "sweep-lambda": cmd_sweep_lambda,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discounted-oco", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value config file")
        for key in RunConfig.PARSERS:
            if key == "subcommand":
                continue
            p.add_argument(f"--{key}", dest=key, default=None)
    return parser


def load_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    entries: dict[str, tuple[str, str]] = {}
    if args.config:
        path = Path(args.config)
        text = path.read_text(encoding="utf-8")
        parsed = parse_keyvalue(text, str(path))
        lines = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            key = raw.split("#", 1)[0].partition("=")[0].strip()
            if key:
                lines[key] = lineno
        for k, v in parsed.items():
            entries[k] = (v, f"{path}:{lines[k]}")
    for key in RunConfig.PARSERS:
        v = getattr(args, key, None)
        if v is not None and key != "subcommand":
            entries[key] = (v, f"--{key}")
    entries["subcommand"] = (args.subcommand, "argv")
    return RunConfig.from_entries(entries).resolved()


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(argv)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if cfg.verbosity >= 1:
        log.setLevel(logging.INFO)
    text = COMMANDS[cfg.subcommand](cfg)
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        Path(cfg.out).write_text(text, encoding="utf-8")
        log.info("wrote %s", cfg.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

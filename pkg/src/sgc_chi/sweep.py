"""Batch evaluation of the susceptibilities over (p, delta_p) grids."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .core import SystemParams, effective_rabi, validate_params
from .errors import ConfigError, ExtractionUnreliable, NonUniqueSteadyState, SingularityError
from .perturbation import extract_orders, response_scale
from .susceptibility import (
    chi1_denominator,
    chi1_kernel,
    chi2_denominator,
    chi2_kernel,
    relative_residual,
)

MODES = ("analytic", "full")
FORMATS = ("csv", "json")
BASE_COLUMNS = ("delta_p", "p", "omega_c_eff", "re_chi1", "im_chi1", "re_chi2", "im_chi2", "abs_chi2")
ORACLE_COLUMNS = ("oracle_residual_c1", "oracle_residual_c2")
THREADS_ENV = "SGC_THREADS"


@dataclass(frozen=True)
class DeltaGrid:
    min: float = -10.0
    max: float = 10.0
    count: int = 1001

    def values(self) -> np.ndarray:
        grid = np.linspace(self.min, self.max, self.count)
        if self.min == -self.max:
            # mirror so that symmetric grids are symmetric bit for bit
            upper = grid[self.count // 2:]
            grid = np.concatenate((-upper[::-1][: self.count - upper.size], upper))
        # keep an exact zero when the grid straddles resonance symmetrically
        step = (self.max - self.min) / (self.count - 1)
        grid[np.abs(grid) < 1e-9 * step] = 0.0
        return grid


@dataclass(frozen=True)
class SweepConfig:
    """Sweep definition; ``base.p`` and ``base.delta_p`` are overridden by the grid."""

    base: SystemParams = field(default_factory=SystemParams)
    delta_grid: DeltaGrid = field(default_factory=DeltaGrid)
    p_values: Sequence[float] = (0.0, 0.99)
    mode: str = "analytic"
    output_path: Optional[str] = None
    format: str = "csv"

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(data)
        try:
            if "base" in kwargs:
                kwargs["base"] = SystemParams(**kwargs["base"])
            if "delta_grid" in kwargs:
                kwargs["delta_grid"] = DeltaGrid(**kwargs["delta_grid"])
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        if "p_values" in kwargs:
            values = kwargs["p_values"]
            if not isinstance(values, (list, tuple)):
                raise ConfigError("p_values must be a list")
            kwargs["p_values"] = tuple(values)
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "SweepConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["p_values"] = list(self.p_values)
        return out


def validate_config(config: SweepConfig) -> List[str]:
    problems = []
    grid = config.delta_grid
    if not isinstance(grid.count, int) or isinstance(grid.count, bool) or grid.count < 2:
        problems.append("delta_grid.count must be an integer >= 2")
    if not (isinstance(grid.min, (int, float)) and isinstance(grid.max, (int, float))
            and math.isfinite(grid.min) and math.isfinite(grid.max)):
        problems.append("delta_grid bounds must be finite numbers")
    elif not grid.min < grid.max:
        problems.append("delta_grid.min must be below delta_grid.max")
    if not config.p_values:
        problems.append("p_values must not be empty")
    for p in config.p_values:
        if not isinstance(p, (int, float)) or isinstance(p, bool) or not abs(p) <= 1:
            problems.append(f"p value {p!r} out of [-1,1]")
    if config.mode not in MODES:
        problems.append(f"mode must be one of {MODES}")
    if config.format not in FORMATS:
        problems.append(f"format must be one of {FORMATS}")
    base = validate_params(config.base.with_(p=0.0, delta_p=0.0))
    problems.extend(f"base: {v}" for v in base.violations)
    return problems


@dataclass(frozen=True)
class SweepRow:
    delta_p: float
    p: float
    omega_c_eff: float
    re_chi1: float
    im_chi1: float
    re_chi2: float
    im_chi2: float
    abs_chi2: float
    oracle_residual_c1: Optional[float] = None
    oracle_residual_c2: Optional[float] = None
    singular: bool = False


@dataclass
class SweepTable:
    rows: List[SweepRow] = field(default_factory=list)
    full: bool = False

    @property
    def columns(self):
        cols = BASE_COLUMNS + (ORACLE_COLUMNS if self.full else ())
        return cols + ("singular",)

    def __len__(self):
        return len(self.rows)

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _oracle_residuals(params: SystemParams):
    """Relative oracle error of both response orders, or None if unavailable."""
    try:
        numeric = extract_orders(params)
    except (NonUniqueSteadyState, ExtractionUnreliable, SingularityError):
        return None
    dp = params.delta_p
    oc = params.omega_c
    c1 = complex(chi1_kernel(dp, oc, params.gamma2, params.gamma3))
    c2 = complex(chi2_kernel(dp, oc, params.p, params.gamma2, params.gamma3))
    r1 = relative_residual(numeric.c13_1, c1, response_scale(params, 1))
    r2 = relative_residual(numeric.c13_2, c2, response_scale(params, 2))
    return r1, r2


def _block(base: SystemParams, p: float, deltas: np.ndarray):
    oc = effective_rabi(base.omega_c0, p)
    g2, g3 = base.gamma2, base.gamma3
    singular = (chi1_denominator(deltas, oc, g2, g3) == 0) | (chi2_denominator(deltas, oc, g2, g3) == 0)
    safe = np.where(singular, 1.0, deltas)
    c1 = np.where(singular, 0.0, chi1_kernel(safe, oc, g2, g3))
    c2 = np.where(singular, 0.0, chi2_kernel(safe, oc, p, g2, g3))
    return oc, c1, c2, singular


def run_sweep(config: SweepConfig) -> SweepTable:
    """Evaluate every (p, delta_p) pair, p outer and delta_p ascending.

    Singular points are kept and marked ``singular``.  In ``full`` mode each
    row also carries the relative error of the numeric order extraction.
    """
    problems = validate_config(config)
    if problems:
        raise ConfigError("; ".join(problems))
    deltas = config.delta_grid.values()
    full = config.mode == "full"
    base = config.base

    blocks = []
    for p in config.p_values:
        p = float(p)
        oc, c1, c2, singular = _block(base, p, deltas)
        blocks.append((p, oc, c1, c2, singular))

    oracle = None
    if full:
        points = [base.with_(p=p, delta_p=float(d)) for p, *_ in blocks for d in deltas]
        workers = _thread_count()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                oracle = list(pool.map(_oracle_residuals, points))
        else:
            oracle = [_oracle_residuals(pt) for pt in points]

    rows = []
    k = 0
    for p, oc, c1, c2, singular in blocks:
        for d, z1, z2, sing in zip(deltas, c1, c2, singular):
            extra = {}
            sing = bool(sing)
            if full:
                res = oracle[k]
                if res is None:
                    sing = True
                    res = (0.0, 0.0)
                extra = {"oracle_residual_c1": res[0], "oracle_residual_c2": res[1]}
            k += 1
            rows.append(SweepRow(
                delta_p=float(d) + 0.0, p=p + 0.0, omega_c_eff=oc,
                re_chi1=float(z1.real) + 0.0, im_chi1=float(z1.imag) + 0.0,
                re_chi2=float(z2.real) + 0.0, im_chi2=float(z2.imag) + 0.0,
                abs_chi2=float(abs(z2)),
                singular=sing, **extra,
            ))
    return SweepTable(rows, full=full)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    return format(float(value), ".17g")


def table_to_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = table.columns
    writer.writerow(cols)
    for row in table.rows:
        writer.writerow([_format_value(getattr(row, c)) for c in cols])
    return buf.getvalue()


def table_to_json(table: SweepTable) -> str:
    cols = table.columns
    records = [{c: getattr(row, c) for c in cols} for row in table.rows]
    return json.dumps(records, indent=1) + "\n"


def write_output(table: SweepTable, config: SweepConfig, path=None) -> Optional[Path]:
    """Serialise ``table`` to ``path`` (default ``config.output_path``).

    Returns the written path, or None when writing to stdout (path ``-`` or
    unset).

    Raises
    ------
    OSError
        With the target path in the message.
    """
    text = table_to_json(table) if config.format == "json" else table_to_csv(table)
    target = path if path is not None else config.output_path
    if target in (None, "-"):
        sys.stdout.write(text)
        return None
    target = Path(target)
    try:
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {target}: {exc.strerror}") from exc
    return target

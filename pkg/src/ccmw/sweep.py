"""Sweep configuration, execution and the versioned CSV record format."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .analytic import NoClosedForm, analytic_ccmw
from .hamiltonians import parse_hamiltonian
from .isres import OptimizerConfig
from .numerics import MAX_DIM
from .optimizer import DEFAULT_TOLERANCE, ccmw_mixed, ccmw_pure, default_config
from .states import max_coherence

log = logging.getLogger(__name__)

CSV_VERSION = "# ccmw-csv v1"
MODES = ("analytic", "numeric-pure", "numeric-mixed")
OPTIMIZER_KEYS = {"population", "max_evaluations", "restarts", "stall_generations", "stall_tolerance"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CoherenceGrid:
    count: int = 21
    scaled: bool = True
    maximum: float | None = None  # raw-C upper end for unscaled grids, capped at d - 1

    def points(self, d: int) -> list[float]:
        """Raw coherence values for dimension ``d``, ascending and inclusive."""
        cmax = max_coherence(d)
        if self.scaled:
            return [float(t) * cmax for t in np.linspace(0.0, 1.0, self.count)]
        top = cmax if self.maximum is None else min(float(self.maximum), cmax)
        return [float(c) for c in np.linspace(0.0, top, self.count)]


@dataclass(frozen=True)
class SweepConfig:
    dimensions: tuple
    hamiltonian: str
    coherence_grid: CoherenceGrid = CoherenceGrid()
    optimizer: dict = field(default_factory=dict)
    modes: tuple = ("numeric-pure",)
    output_path: str = "ccmw_sweep.csv"
    seed: int = 0
    record_timing: bool = False

    def __post_init__(self):
        if not self.dimensions:
            raise ConfigError("dimensions must be a non-empty list")
        for d in self.dimensions:
            if not isinstance(d, int) or isinstance(d, bool) or not 2 <= d <= MAX_DIM:
                raise ConfigError(f"dimension {d!r} outside [2, {MAX_DIM}]")
        if self.coherence_grid.count < 2:
            raise ConfigError("coherence_grid.count must be at least 2")
        bad = [m for m in self.modes if m not in MODES]
        if bad or not self.modes:
            raise ConfigError(f"modes must be a non-empty subset of {list(MODES)}, got {list(self.modes)}")
        unknown = set(self.optimizer) - OPTIMIZER_KEYS
        if unknown:
            raise ConfigError(f"unknown optimizer keys: {sorted(unknown)}")
        for d in self.dimensions:
            try:
                parse_hamiltonian(self.hamiltonian, d)
            except ValueError as exc:
                raise ConfigError(f"hamiltonian {self.hamiltonian!r} for d={d}: {exc}") from None

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "dimensions" not in raw or "hamiltonian" not in raw:
            raise ConfigError("config needs 'dimensions' and 'hamiltonian'")
        kw = dict(raw)
        kw["dimensions"] = tuple(raw["dimensions"]) if isinstance(raw["dimensions"], list) else ()
        kw["hamiltonian"] = hamiltonian_id(raw["hamiltonian"])
        grid = raw.get("coherence_grid", {})
        if not isinstance(grid, dict) or set(grid) - {"count", "scaled", "max"}:
            raise ConfigError("coherence_grid must be an object with count, scaled and optional max")
        try:
            kw["coherence_grid"] = CoherenceGrid(int(grid.get("count", 21)), bool(grid.get("scaled", True)),
                                                 grid.get("max"))
        except (TypeError, ValueError):
            raise ConfigError("coherence_grid.count must be an integer") from None
        if "modes" in raw:
            kw["modes"] = tuple(raw["modes"])
        if not isinstance(kw.get("optimizer", {}), dict):
            raise ConfigError("optimizer must be an object")
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "SweepConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(raw)


def hamiltonian_id(spec) -> str:
    """Normalize a Hamiltonian spec: a string like 'offdiag:1,0' or {"kind": ..., "params": [...]}."""
    if isinstance(spec, str):
        return spec
    if isinstance(spec, dict) and "kind" in spec:
        params = spec.get("params", [])
        return spec["kind"] + (":" + ",".join(repr(float(p)) for p in params) if params else "")
    raise ConfigError(f"cannot read hamiltonian {spec!r}")


@dataclass(frozen=True)
class SweepRecord:
    dimension: int
    hamiltonian_id: str
    coherence: float
    scaled_coherence: float
    mode: str
    value: float
    constraint_violation: float
    seed: int
    wall_time_ms: float
    infeasible: bool = False


COLUMNS = [f.name for f in fields(SweepRecord)]


@dataclass(frozen=True)
class _Task:
    dimension: int
    hamiltonian: str
    coherence: float
    mode: str
    config: OptimizerConfig | None
    record_timing: bool


def _run_task(task: _Task) -> SweepRecord:
    d, C = task.dimension, task.coherence
    H = parse_hamiltonian(task.hamiltonian, d)
    t0 = time.perf_counter()
    if task.mode == "analytic":
        value, viol, seed = analytic_ccmw(H, C), 0.0, -1
    else:
        solver = ccmw_pure if task.mode == "numeric-pure" else ccmw_mixed
        est = solver(H, d, C, task.config)
        value, viol, seed = est.value, est.constraint_violation, task.config.seed
    ms = (time.perf_counter() - t0) * 1e3 if task.record_timing else 0.0
    return SweepRecord(d, task.hamiltonian, C, C / max_coherence(d), task.mode, float(value),
                       float(viol), int(seed), float(ms), bool(viol > DEFAULT_TOLERANCE))


def plan(config: SweepConfig) -> list[_Task]:
    """Tasks in output order: dimension, then grid point, then mode.

    Numeric tasks get seeds base + k * restarts (k counts numeric tasks), so
    the restart seeds of different tasks never overlap. Analytic tasks for a
    dimension without a closed form are skipped with a warning.
    """
    tasks, k = [], 0
    for d in config.dimensions:
        base = default_config(d, **config.optimizer)
        H = parse_hamiltonian(config.hamiltonian, d)
        for C in config.coherence_grid.points(d):
            for mode in config.modes:
                if mode == "analytic":
                    try:
                        analytic_ccmw(H, C)
                    except NoClosedForm as exc:
                        if C == 0.0:
                            log.warning("skipping analytic rows: %s", exc)
                        continue
                    tasks.append(_Task(d, config.hamiltonian, C, mode, None, config.record_timing))
                else:
                    cfg = replace(base, seed=config.seed + k * max(1, base.restarts))
                    k += 1
                    tasks.append(_Task(d, config.hamiltonian, C, mode, cfg, config.record_timing))
    return tasks


def run_sweep(config: SweepConfig, threads: int = 1, progress=None) -> list[SweepRecord]:
    """Run every task; rows come back in plan order whatever the thread count."""
    tasks = plan(config)
    if threads <= 1:
        out = []
        for i, t in enumerate(tasks):
            out.append(_run_task(t))
            if progress:
                progress(i + 1, len(tasks))
        return out
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_task, tasks))


# CSV ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records, timestamp: str | None = None) -> str:
    buf = io.StringIO()
    buf.write(CSV_VERSION + "\n")
    stamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    buf.write(f"# generated {stamp}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def write_records(path, records, timestamp: str | None = None) -> None:
    Path(path).write_text(records_to_csv(records, timestamp), encoding="utf-8", newline="\n")


def parse_records(text: str) -> list[SweepRecord]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_VERSION:
        raise ValueError(f"not a {CSV_VERSION} file")
    body = [ln for ln in lines if not ln.startswith("#")]
    rows = list(csv.reader(body))
    if not rows or rows[0] != COLUMNS:
        raise ValueError("unexpected CSV columns")
    types = {f.name: f.type for f in fields(SweepRecord)}
    out = []
    for row in rows[1:]:
        kw = {}
        for name, raw in zip(COLUMNS, row):
            t = types[name]
            if t == "int":
                kw[name] = int(raw)
            elif t == "float":
                kw[name] = float(raw)
            elif t == "bool":
                kw[name] = raw == "1"
            else:
                kw[name] = raw
        out.append(SweepRecord(**kw))
    return out


def read_records(path) -> list[SweepRecord]:
    return parse_records(Path(path).read_text(encoding="utf-8"))


def csv_body(text: str) -> str:
    """CSV content without comment lines, for reproducibility comparisons."""
    return "".join(ln + "\n" for ln in text.splitlines() if not ln.startswith("#"))


def config_as_dict(config: SweepConfig) -> dict:
    d = asdict(config)
    g = d.pop("coherence_grid")
    d["coherence_grid"] = {"count": g["count"], "scaled": g["scaled"], "max": g["maximum"]}
    d["dimensions"], d["modes"] = list(config.dimensions), list(config.modes)
    return d

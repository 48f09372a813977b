"""Monte Carlo evaluation harness: grid sweeps, aggregation, and emission.

One trial draws a single channel matrix (from a seed derived from the
master seed, grid point, and trial index) and runs every configured
algorithm on that identical matrix, so comparisons are paired. Trials are
independent tasks; results are post-sorted by trial index before
aggregation, which makes the output invariant to worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import LinkBudget, generate_iid_rayleigh, noise_power
from .metrics import SingularSetError, sum_spectral_efficiency
from .numerics import BasisConstructionError, OpLedger, subset_count
from .seeding import derive_seed, stream
from .selectors import (
    EXHAUSTIVE_SUBSET_CAP,
    MCORE_MAX_ANTENNAS,
    Algorithm,
    SelectionConfig,
    run_selection,
)

__all__ = [
    "ExperimentConfig",
    "AlgoInstance",
    "GridPoint",
    "CellResult",
    "TrialReport",
    "AggregateRow",
    "parse_config_text",
    "grid_points",
    "algo_instances",
    "run_trial",
    "run_monte_carlo",
    "sweep",
    "oracle_check",
    "rows_to_csv",
    "rows_to_json",
    "emit",
    "CSV_COLUMNS",
]

# Stream roles, mixed into per-trial seeds so channel generation, basis
# draws, and random selection never share a stream.
_ROLE_CHANNEL = 0
_ROLE_SELECT = 1
_ROLE_RANDOM = 2

CSV_COLUMNS = (
    "scenario_id",
    "algorithm",
    "M",
    "U",
    "K_max",
    "L",
    "alpha",
    "p0_dbm",
    "trials",
    "mean_se",
    "stderr_se",
    "mean_kb",
    "mean_macs",
    "mean_wall_us",
)

_ALGORITHM_NAMES = tuple(a.value for a in Algorithm)


@dataclass
class ExperimentConfig:
    """Experiment grid, per-algorithm tunables, and run controls."""

    m_values: tuple[int, ...] = (4, 8)
    u_values: tuple[int, ...] = (20, 50, 100)
    p0_dbm_values: tuple[float, ...] = (-90.0, -95.0)
    bandwidth_hz: float = 20e6
    noise_figure_db: float = 5.0
    algorithms: tuple[str, ...] = ("ssus", "sus", "gzf", "random")
    ssus_num_bases: tuple[int, ...] = (10,)
    ssus_alpha: tuple[float, ...] = (0.45,)
    sus_epsilon: float = 0.3
    k_max: int | None = None
    random_k: int | None = None
    trials: int = 1000
    master_seed: int = 1234
    workers: int = 1
    timing: bool = False
    output_path: str | None = None
    output_format: str = "csv"

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        for name in ("m_values", "u_values", "p0_dbm_values", "algorithms",
                     "ssus_num_bases", "ssus_alpha"):
            if not getattr(self, name):
                raise ValueError(f"config list {name} must be non-empty")
        if any(m < 1 for m in self.m_values):
            raise ValueError(f"antenna counts must be >= 1, got {self.m_values}")
        if any(u < 1 for u in self.u_values):
            raise ValueError(f"user counts must be >= 1, got {self.u_values}")
        for algo in self.algorithms:
            if algo not in _ALGORITHM_NAMES:
                raise ValueError(
                    f"unknown algorithm {algo!r}; choose from {_ALGORITHM_NAMES}"
                )
        if self.k_max is not None:
            if self.k_max < 1:
                raise ValueError(f"k_max must be >= 1, got {self.k_max}")
            bad = [m for m in self.m_values if self.k_max > m]
            if bad:
                raise ValueError(
                    f"k_max={self.k_max} exceeds antenna count for M in {bad}"
                )
        if any(l < 1 for l in self.ssus_num_bases):
            raise ValueError(f"ssus.l entries must be >= 1, got {self.ssus_num_bases}")
        if any(not 0.0 < a < 1.0 for a in self.ssus_alpha):
            raise ValueError(f"ssus.alpha entries must lie in (0, 1), got {self.ssus_alpha}")
        if not 0.0 < self.sus_epsilon < 1.0:
            raise ValueError(f"sus.epsilon must lie in (0, 1), got {self.sus_epsilon}")
        if self.random_k is not None and self.random_k < 1:
            raise ValueError(f"random.k must be >= 1, got {self.random_k}")
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth_hz}")
        if self.output_format not in ("csv", "json"):
            raise ValueError(f"output format must be csv or json, got {self.output_format!r}")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        known = {
            "trials": "trials",
            "master_seed": "master_seed",
            "workers": "workers",
            "timing": "timing",
            "grid.m": "m_values",
            "grid.u": "u_values",
            "grid.p0_dbm": "p0_dbm_values",
            "link.bandwidth_hz": "bandwidth_hz",
            "link.noise_figure_db": "noise_figure_db",
            "select.algorithms": "algorithms",
            "select.k_max": "k_max",
            "ssus.l": "ssus_num_bases",
            "ssus.alpha": "ssus_alpha",
            "sus.epsilon": "sus_epsilon",
            "random.k": "random_k",
            "output.path": "output_path",
            "output.format": "output_format",
        }
        unknown = sorted(set(mapping) - set(known))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        list_fields = {"m_values", "u_values", "p0_dbm_values", "algorithms",
                       "ssus_num_bases", "ssus_alpha"}
        kwargs = {}
        for key, value in mapping.items():
            name = known[key]
            if name in list_fields:
                value = tuple(value) if isinstance(value, (list, tuple)) else (value,)
            kwargs[name] = value
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ValueError(f"cannot read config file {path}: {exc}") from exc
        return cls.from_mapping(parse_config_text(text))


def _parse_scalar(token: str):
    token = token.strip()
    if token.startswith(("'", '"')) and token.endswith(token[0]) and len(token) >= 2:
        return token[1:-1]
    low = token.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def parse_config_text(text: str) -> dict:
    """Parse the flat ``key = value`` config format into a mapping.

    Keys use dotted section names; values are scalars (int, float, bool,
    bare or quoted string) or comma-separated lists in square brackets.
    ``#`` starts a comment.
    """
    mapping: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ValueError(f"config line {lineno}: empty key or value in {raw!r}")
        if key in mapping:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        if value.startswith("[") and value.endswith("]"):
            inner = value[1:-1].strip()
            mapping[key] = [_parse_scalar(t) for t in inner.split(",")] if inner else []
        else:
            mapping[key] = _parse_scalar(value)
    return mapping


@dataclass(frozen=True)
class AlgoInstance:
    """One algorithm variant evaluated at every grid point."""

    algorithm: Algorithm
    num_bases: int | None = None
    alpha: float | None = None

    @property
    def label(self) -> str:
        return self.algorithm.value


@dataclass(frozen=True)
class GridPoint:
    """One (M, U, P0) scenario with its resolved tunables."""

    index: int
    m: int
    u: int
    p0_dbm: float
    k_max: int
    random_k: int
    n0: float
    scenario_id: str


@dataclass(frozen=True)
class CellResult:
    """Outcome of one algorithm on one trial."""

    selected: tuple[int, ...]
    se: float
    macs: int
    divisions: int
    comparisons: int
    wall_ns: int
    error: str | None = None

    @property
    def k_b(self) -> int:
        return len(self.selected)


@dataclass(frozen=True)
class TrialReport:
    trial_index: int
    scenario_id: str
    channel_hash: str
    cells: dict[AlgoInstance, CellResult] = field(default_factory=dict)


@dataclass(frozen=True)
class AggregateRow:
    """One output row: an algorithm variant aggregated at one grid point."""

    scenario_id: str
    algorithm: str
    m: int
    u: int
    k_max: int
    num_bases: int | None
    alpha: float | None
    p0_dbm: float
    trials: int
    mean_se: float | None
    stderr_se: float | None
    mean_kb: float | None
    mean_macs: float | None
    mean_wall_us: float | None
    skip_reason: str | None = None


def grid_points(cfg: ExperimentConfig) -> list[GridPoint]:
    """Expand the scenario grid in declaration order (M outer, then U, P0)."""
    points = []
    index = 0
    for m in cfg.m_values:
        for u in cfg.u_values:
            for p0 in cfg.p0_dbm_values:
                k_max = cfg.k_max if cfg.k_max is not None else m
                random_k = cfg.random_k if cfg.random_k is not None else min(k_max, u)
                n0 = noise_power(
                    LinkBudget(
                        p0_dbm=p0,
                        bandwidth_hz=cfg.bandwidth_hz,
                        noise_figure_db=cfg.noise_figure_db,
                    )
                )
                points.append(
                    GridPoint(
                        index=index,
                        m=m,
                        u=u,
                        p0_dbm=float(p0),
                        k_max=k_max,
                        random_k=random_k,
                        n0=n0,
                        scenario_id=f"m{m}_u{u}_p{p0:g}",
                    )
                )
                index += 1
    return points


def algo_instances(cfg: ExperimentConfig) -> list[AlgoInstance]:
    """Expand configured algorithms into concrete variants, in config order."""
    instances = []
    for name in cfg.algorithms:
        algo = Algorithm(name)
        if algo is Algorithm.SSUS:
            for l in cfg.ssus_num_bases:
                for a in cfg.ssus_alpha:
                    instances.append(AlgoInstance(algo, num_bases=int(l), alpha=float(a)))
        else:
            instances.append(AlgoInstance(algo))
    return instances


def _infeasible_reason(point: GridPoint, inst: AlgoInstance) -> str | None:
    if inst.algorithm is Algorithm.MCORE_PLUS and point.m > MCORE_MAX_ANTENNAS:
        return f"mcore_plus requires M <= {MCORE_MAX_ANTENNAS}, scenario has M={point.m}"
    if inst.algorithm is Algorithm.EXHAUSTIVE:
        space = subset_count(point.u, min(point.k_max, point.m, point.u))
        if space > EXHAUSTIVE_SUBSET_CAP:
            return (
                f"exhaustive search space {space} exceeds cap {EXHAUSTIVE_SUBSET_CAP}"
            )
    if inst.algorithm is Algorithm.RANDOM and point.random_k > min(point.m, point.u):
        return (
            f"random selection needs K <= min(M, U) = {min(point.m, point.u)}, "
            f"configured K={point.random_k}"
        )
    return None


def run_trial(
    cfg: ExperimentConfig,
    point: GridPoint,
    instances: list[AlgoInstance],
    trial_index: int,
) -> TrialReport:
    """Run every algorithm variant on one freshly drawn channel matrix."""
    rng = stream(cfg.master_seed, point.index, trial_index, _ROLE_CHANNEL)
    h = generate_iid_rayleigh(point.m, point.u, rng)
    channel_hash = hashlib.sha256(np.ascontiguousarray(h).tobytes()).hexdigest()[:16]
    select_seed = derive_seed(cfg.master_seed, point.index, trial_index, _ROLE_SELECT)
    random_seed = derive_seed(cfg.master_seed, point.index, trial_index, _ROLE_RANDOM)

    cells: dict[AlgoInstance, CellResult] = {}
    for inst in instances:
        ledger = OpLedger()
        sel_cfg = SelectionConfig(
            algorithm=inst.algorithm,
            k_max=point.random_k if inst.algorithm is Algorithm.RANDOM else point.k_max,
            num_bases=inst.num_bases or 1,
            alpha=inst.alpha if inst.alpha is not None else 0.45,
            sus_epsilon=cfg.sus_epsilon,
            rng_seed=random_seed if inst.algorithm is Algorithm.RANDOM else select_seed,
        )
        start = time.perf_counter_ns()
        try:
            result = run_selection(h, sel_cfg, point.n0, ledger)
            # Evaluation of the final set is measurement, not selection: it
            # goes to a throwaway ledger so MAC counts stay comparable with
            # the selection cost models, and columns are passed in sorted
            # order so every algorithm's set is scored bit-for-bit like the
            # oracle's enumeration of the same subset.
            se = sum_spectral_efficiency(h[:, sorted(result.selected)], point.n0, OpLedger())
            cells[inst] = CellResult(
                selected=result.selected,
                se=se,
                macs=ledger.complex_macs,
                divisions=ledger.divisions,
                comparisons=ledger.comparisons,
                wall_ns=time.perf_counter_ns() - start,
            )
        except (ValueError, SingularSetError, BasisConstructionError) as exc:
            cells[inst] = CellResult(
                selected=(),
                se=float("nan"),
                macs=ledger.complex_macs,
                divisions=ledger.divisions,
                comparisons=ledger.comparisons,
                wall_ns=time.perf_counter_ns() - start,
                error=str(exc),
            )
    return TrialReport(
        trial_index=trial_index,
        scenario_id=point.scenario_id,
        channel_hash=channel_hash,
        cells=cells,
    )


def _trial_chunk(args) -> list[TrialReport]:
    cfg, point, instances, indices = args
    return [run_trial(cfg, point, instances, t) for t in indices]


def _run_point_trials(
    cfg: ExperimentConfig, point: GridPoint, instances: list[AlgoInstance]
) -> list[TrialReport]:
    indices = list(range(cfg.trials))
    if cfg.workers <= 1 or cfg.trials <= 1:
        reports = [run_trial(cfg, point, instances, t) for t in indices]
    else:
        n_workers = min(cfg.workers, cfg.trials)
        n_chunks = n_workers * 4
        chunks = [indices[i::n_chunks] for i in range(n_chunks) if indices[i::n_chunks]]
        tasks = [(cfg, point, instances, chunk) for chunk in chunks]
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            reports = [r for batch in pool.map(_trial_chunk, tasks) for r in batch]
        reports.sort(key=lambda r: r.trial_index)
    return reports


def _aggregate(
    point: GridPoint,
    inst: AlgoInstance,
    reports: list[TrialReport],
    timing: bool,
) -> AggregateRow:
    cells = [r.cells[inst] for r in reports if r.cells[inst].error is None]
    n = len(cells)
    if n == 0:
        return AggregateRow(
            scenario_id=point.scenario_id,
            algorithm=inst.label,
            m=point.m,
            u=point.u,
            k_max=point.k_max,
            num_bases=inst.num_bases,
            alpha=inst.alpha,
            p0_dbm=point.p0_dbm,
            trials=0,
            mean_se=None,
            stderr_se=None,
            mean_kb=None,
            mean_macs=None,
            mean_wall_us=None,
            skip_reason="all trials failed",
        )
    mean_se = math.fsum(c.se for c in cells) / n
    if n > 1:
        var = math.fsum((c.se - mean_se) ** 2 for c in cells) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    mean_kb = math.fsum(c.k_b for c in cells) / n
    mean_macs = math.fsum(c.macs for c in cells) / n
    mean_wall_us = (
        math.fsum(c.wall_ns for c in cells) / n / 1000.0 if timing else 0.0
    )
    return AggregateRow(
        scenario_id=point.scenario_id,
        algorithm=inst.label,
        m=point.m,
        u=point.u,
        k_max=point.k_max,
        num_bases=inst.num_bases,
        alpha=inst.alpha,
        p0_dbm=point.p0_dbm,
        trials=n,
        mean_se=mean_se,
        stderr_se=stderr,
        mean_kb=mean_kb,
        mean_macs=mean_macs,
        mean_wall_us=mean_wall_us,
    )


def sweep(cfg: ExperimentConfig) -> list[AggregateRow]:
    """Cross the grid with every algorithm variant, one aggregate row each.

    Infeasible cells (for example the exhaustive oracle on a too-large
    pool) become skipped rows with zero trials; the reason is logged to
    stderr and kept on the row object.
    """
    cfg.validate()
    instances = algo_instances(cfg)
    rows: list[AggregateRow] = []
    for point in grid_points(cfg):
        feasible = []
        skip_for: dict[AlgoInstance, str] = {}
        for inst in instances:
            reason = _infeasible_reason(point, inst)
            if reason is None:
                feasible.append(inst)
            else:
                skip_for[inst] = reason
        reports = _run_point_trials(cfg, point, feasible) if feasible else []
        for inst in instances:
            if inst in skip_for:
                print(
                    f"skipped {inst.label} at {point.scenario_id}: {skip_for[inst]}",
                    file=sys.stderr,
                )
                rows.append(
                    AggregateRow(
                        scenario_id=point.scenario_id,
                        algorithm=inst.label,
                        m=point.m,
                        u=point.u,
                        k_max=point.k_max,
                        num_bases=inst.num_bases,
                        alpha=inst.alpha,
                        p0_dbm=point.p0_dbm,
                        trials=0,
                        mean_se=None,
                        stderr_se=None,
                        mean_kb=None,
                        mean_macs=None,
                        mean_wall_us=None,
                        skip_reason=skip_for[inst],
                    )
                )
            else:
                rows.append(_aggregate(point, inst, reports, cfg.timing))
    return rows


def run_monte_carlo(cfg: ExperimentConfig) -> list[AggregateRow]:
    """Run the full Monte Carlo experiment described by the config."""
    return sweep(cfg)


def oracle_check(
    m: int = 4,
    u: int = 8,
    trials: int = 50,
    master_seed: int = 1234,
    k_max: int | None = None,
    num_bases: int = 10,
    alpha: float = 0.45,
    sus_epsilon: float = 0.3,
    p0_dbm: float = -90.0,
    bandwidth_hz: float = 20e6,
    noise_figure_db: float = 5.0,
) -> list[dict]:
    """Compare every feasible heuristic with the exhaustive oracle.

    Returns one row per algorithm with the paired mean and minimum SE ratio
    against the oracle and the count of bound violations (which should
    always be zero: the oracle maximizes the same metric).
    """
    k_cap = k_max if k_max is not None else m
    cfg = ExperimentConfig(
        m_values=(m,),
        u_values=(u,),
        p0_dbm_values=(p0_dbm,),
        bandwidth_hz=bandwidth_hz,
        noise_figure_db=noise_figure_db,
        algorithms=tuple(
            a.value
            for a in (
                Algorithm.SSUS,
                Algorithm.SUS,
                Algorithm.GZF,
                Algorithm.MCORE_PLUS,
                Algorithm.RANDOM,
                Algorithm.EXHAUSTIVE,
            )
            if not (a is Algorithm.MCORE_PLUS and m > MCORE_MAX_ANTENNAS)
        ),
        ssus_num_bases=(num_bases,),
        ssus_alpha=(alpha,),
        sus_epsilon=sus_epsilon,
        k_max=k_cap,
        trials=trials,
        master_seed=master_seed,
    )
    cfg.validate()
    point = grid_points(cfg)[0]
    instances = algo_instances(cfg)
    oracle_inst = next(i for i in instances if i.algorithm is Algorithm.EXHAUSTIVE)
    if _infeasible_reason(point, oracle_inst) is not None:
        raise ValueError(
            f"oracle infeasible at M={m}, U={u}, K_max={k_cap}: "
            f"{_infeasible_reason(point, oracle_inst)}"
        )
    reports = _run_point_trials(cfg, point, instances)
    rows = []
    for inst in instances:
        if inst.algorithm is Algorithm.EXHAUSTIVE:
            continue
        ratios = []
        violations = 0
        for report in reports:
            cell = report.cells[inst]
            oracle = report.cells[oracle_inst]
            if cell.error is not None or oracle.error is not None:
                continue
            ratios.append(cell.se / oracle.se)
            if cell.se > oracle.se:
                violations += 1
        rows.append(
            {
                "algorithm": inst.label,
                "m": m,
                "u": u,
                "k_max": k_cap,
                "trials": len(ratios),
                "mean_ratio": math.fsum(ratios) / len(ratios) if ratios else float("nan"),
                "min_ratio": min(ratios) if ratios else float("nan"),
                "violations": violations,
            }
        )
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _row_values(row: AggregateRow) -> dict:
    return {
        "scenario_id": row.scenario_id,
        "algorithm": row.algorithm,
        "M": row.m,
        "U": row.u,
        "K_max": row.k_max,
        "L": row.num_bases,
        "alpha": row.alpha,
        "p0_dbm": row.p0_dbm,
        "trials": row.trials,
        "mean_se": row.mean_se,
        "stderr_se": row.stderr_se,
        "mean_kb": row.mean_kb,
        "mean_macs": row.mean_macs,
        "mean_wall_us": row.mean_wall_us,
    }


def rows_to_csv(rows: list[AggregateRow]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        values = _row_values(row)
        lines.append(
            ",".join(
                str(values[c]) if c in ("scenario_id", "algorithm") else _fmt(values[c])
                for c in CSV_COLUMNS
            )
        )
    return "\n".join(lines) + "\n"


def rows_to_json(rows: list[AggregateRow]) -> str:
    def jsonable(value):
        if value is None or isinstance(value, (str, int)):
            return value
        return float(f"{float(value):.12g}")

    payload = [
        {key: jsonable(value) for key, value in _row_values(row).items()}
        for row in rows
    ]
    return json.dumps(payload, indent=2) + "\n"


def emit(rows: list[AggregateRow], fmt: str = "csv", path=None) -> str:
    """Serialize rows to CSV or JSON; write to ``path`` when given.

    Returns the serialized text either way.
    """
    if fmt == "csv":
        text = rows_to_csv(rows)
    elif fmt == "json":
        text = rows_to_json(rows)
    else:
        raise ValueError(f"output format must be csv or json, got {fmt!r}")
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValueError(f"cannot write output file {path}: {exc}") from exc
    return text

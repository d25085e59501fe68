"""
`compare` command: A2C and PPO trained per seed on the same mission
"""

import argparse
import csv
import statistics
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from ..astro.orbit import OrbitCatalog
from ..config import settings
from ..errors import ConfigError, OrbitPlannerError, TrainingError
from ..schemas.mission import MissionConfig
from ..schemas.training import CatalogSource, ComparisonReport, ComparisonRow, TrainerConfig
from ..utils.logging import get_run_logger
from .train import build_catalog, resolve_mission, run_training

logger = get_run_logger()

ALGORITHMS = ("a2c", "ppo")
DEFAULT_BUDGETS = {"a2c": 10_000, "ppo": 70_000}
COMPARISON_HEADER = ("algorithm", "seed", "first_success_timestep", "final_reward", "objectives_met")


def parse_seeds(text: str) -> List[int]:
    try:
        seeds = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--seeds must be a comma-separated list of integers, got {text!r}") from None
    if not seeds:
        raise ConfigError("--seeds needs at least one seed")
    return seeds


def median_first_success(rows: Sequence[ComparisonRow], algorithm: str) -> Optional[float]:
    """Median over successful runs of one algorithm; None when no run succeeded"""
    steps = [row.first_success_timestep for row in rows
             if row.algorithm == algorithm and row.first_success_timestep is not None]
    return float(statistics.median(steps)) if steps else None


def compare(
    mission: MissionConfig,
    catalog: OrbitCatalog,
    catalog_source: CatalogSource,
    seeds: Sequence[int],
    budgets: Dict[str, int],
    output_dir: Path,
    overrides: Optional[Dict[str, Any]] = None,
) -> ComparisonReport:
    """
    Train every (algorithm, seed) pair; a failed run becomes an error row

    ``overrides`` apply to both algorithms on top of their defaults.
    """
    rows: List[ComparisonRow] = []
    for seed in seeds:
        for algorithm in ALGORITHMS:
            config = TrainerConfig.for_algorithm(
                algorithm, **{**(overrides or {}), "seed": seed, "total_timesteps": budgets[algorithm]}
            )
            run_dir = output_dir / f"{algorithm}-seed{seed}"
            try:
                manifest = run_training(config, mission, catalog, catalog_source, run_dir)
            except OrbitPlannerError as exc:
                logger.error("comparison_run_failed", algorithm=algorithm, seed=seed, error=exc.message)
                rows.append(ComparisonRow(algorithm=algorithm, seed=seed, error=exc.message))
                continue
            rows.append(
                ComparisonRow(
                    algorithm=algorithm,
                    seed=seed,
                    first_success_timestep=manifest.first_success_timestep,
                    final_reward=manifest.final_evaluation.mean_reward,
                    objectives_met=manifest.final_evaluation.objectives_met_rate >= 1.0,
                )
            )

    return ComparisonReport(
        rows=rows,
        median_first_success={algorithm: median_first_success(rows, algorithm) for algorithm in ALGORITHMS},
    )


def _cell(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def write_comparison(report: ComparisonReport, path: Path) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(COMPARISON_HEADER)
        for row in report.rows:
            if row.error:
                writer.writerow([row.algorithm, row.seed, "error", "error", "error"])
                continue
            writer.writerow([row.algorithm, row.seed, _cell(row.first_success_timestep),
                             _cell(row.final_reward), _cell(row.objectives_met)])
        for algorithm, median in report.median_first_success.items():
            writer.writerow([algorithm, "median", _cell(median), "", ""])
    return path


def run_compare(args: argparse.Namespace) -> int:
    seeds = parse_seeds(args.seeds)
    budgets = dict(DEFAULT_BUDGETS)
    if args.timesteps is not None:
        budgets = {algorithm: args.timesteps for algorithm in ALGORITHMS}

    mission = resolve_mission(args.mission)
    catalog, count = build_catalog(args.catalog, mission)
    output_dir = Path(args.out or settings.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    report = compare(mission, catalog, CatalogSource(source=args.catalog, records=count), seeds, budgets, output_dir)
    path = write_comparison(report, output_dir / "comparison.csv")
    print(path.read_text(encoding="utf-8"), end="")

    failures = [row for row in report.rows if row.error]
    if failures:
        raise TrainingError(f"{len(failures)} of {len(report.rows)} comparison runs failed; partial results in {path}")
    return 0

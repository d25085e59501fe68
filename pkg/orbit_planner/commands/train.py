"""
`train` command: one training run with metrics, checkpoints and a manifest
"""

import argparse
import asyncio
from datetime import datetime
from pathlib import Path
from typing import Optional

from ..astro.orbit import OrbitCatalog
from ..config import settings
from ..learning.trainer import Trainer, TrainingResult
from ..schemas.mission import MissionConfig, load_mission
from ..schemas.training import CatalogSource, EvaluationSummary, RunManifest, TrainerConfig
from ..services.ingest import load_reference_orbits
from ..utils.time import format_duration, now_in_timezone


def resolve_mission(path: Optional[str]) -> MissionConfig:
    return load_mission(path or settings.default_mission_path)


def build_catalog(source: Optional[str], mission: MissionConfig):
    elements, count = asyncio.run(load_reference_orbits(source))
    return OrbitCatalog(elements, mission.orbit_samples), count


def run_training(
    config: TrainerConfig,
    mission: MissionConfig,
    catalog: OrbitCatalog,
    catalog_source: CatalogSource,
    output_dir: Path,
) -> RunManifest:
    """Train once and keep the manifest in step with the run's progress"""
    output_dir.mkdir(parents=True, exist_ok=True)
    trainer = Trainer(config, mission, catalog, output_dir)
    manifest = RunManifest(
        run_id=trainer.run_id,
        trainer=config,
        mission=mission,
        seed=config.seed,
        catalog=catalog_source,
        started_at=now_in_timezone().isoformat(),
        metrics=str(output_dir / "metrics.csv"),
    )
    manifest_path = output_dir / "manifest.yaml"
    manifest.write(manifest_path)

    try:
        result: TrainingResult = trainer.train()
    except Exception as exc:
        manifest = manifest.model_copy(
            update={"status": "failed", "error": str(exc), "finished_at": now_in_timezone().isoformat(),
                    "timesteps": trainer.timesteps}
        )
        manifest.write(manifest_path)
        raise

    final = result.final_evaluation
    manifest = manifest.model_copy(
        update={
            "status": "completed",
            "finished_at": now_in_timezone().isoformat(),
            "timesteps": result.timesteps,
            "interventions": result.interventions,
            "first_success_timestep": result.first_success_timestep,
            "final_evaluation": EvaluationSummary(
                mean_reward=final.mean_reward,
                std_reward=final.std_reward,
                objectives_met_rate=final.objectives_met_rate,
                episodes=len(final.episode_rewards),
            ),
            "checkpoint": str(output_dir / "model.ckpt"),
            "best_checkpoint": str(output_dir / "best.ckpt") if result.best_evaluation else None,
        }
    )
    manifest.write(manifest_path)
    return manifest


def run_train(args: argparse.Namespace) -> int:
    overrides = {"seed": args.seed}
    if args.timesteps is not None:
        overrides["total_timesteps"] = args.timesteps
    config = TrainerConfig.for_algorithm(args.algorithm, **overrides)
    mission = resolve_mission(args.mission)
    catalog, count = build_catalog(args.catalog, mission)
    output_dir = Path(args.out or settings.output_dir)

    manifest = run_training(config, mission, catalog, CatalogSource(source=args.catalog, records=count), output_dir)

    evaluation = manifest.final_evaluation
    print(f"algorithm:            {config.algorithm}")
    print(f"timesteps:            {manifest.timesteps}")
    print(f"mean reward:          {evaluation.mean_reward:.6f} (std {evaluation.std_reward:.6f})")
    print(f"objectives met rate:  {evaluation.objectives_met_rate:.2f}")
    print(f"first success:        {manifest.first_success_timestep if manifest.first_success_timestep is not None else 'none'}")
    print(f"interventions:        {manifest.interventions}")
    print(f"artifacts:            {output_dir}")
    started = datetime.fromisoformat(manifest.started_at)
    finished = datetime.fromisoformat(manifest.finished_at)
    print(f"wall time:            {format_duration((finished - started).total_seconds())}")
    return 0

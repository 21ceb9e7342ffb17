from __future__ import annotations

from pathlib import Path

from prefect import get_run_logger, task
from prefect.cache_policies import NONE

from plasmon.tasks.config import RunConfig, resolve_run_config

OUTPUT_DIR = "out"


@task(name="load_run_config", cache_policy=NONE)
def load_config(config_path: str | None = None, **flags) -> RunConfig:
    logger = get_run_logger()
    run = resolve_run_config(config_path, **flags)
    logger.info(
        f"Config: {run.source or 'default'} | hash={run.medium.fingerprint()} "
        f"| n_max={run.numerics.n_max} threads={run.threads}"
    )
    return run


def output_target(run: RunConfig, command: str) -> tuple[Path, str]:
    """Path e formato di uscita; senza path esplicito: out/<comando>.<formato>."""
    fmt = run.output.format
    if run.output.path:
        return Path(run.output.path), fmt
    return Path(OUTPUT_DIR) / f"{command}.{fmt}", fmt

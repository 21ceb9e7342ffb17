from __future__ import annotations

import sys

from prefect import flow, get_run_logger, task
from prefect.cache_policies import NONE

from plasmon.errors import ConfigError
from plasmon.flows.common import load_config, output_target
from plasmon.tasks.config import RunConfig
from plasmon.tasks.export import export_grid
from plasmon.tasks.scattering import (
    DensitySolution,
    FieldGrid,
    full_solution_grid,
    incident_trace_coeffs,
    parse_grid_spec,
    scattering_ratio,
    solve_densities,
)
from plasmon.tasks.spectrum import assert_admissible
from plasmon.test.gate_fields import validate_field_grid

DEFAULT_GRID = "z=0:x[-3,3,121]:y[-3,3,121]"
# corona esterna (in unita' di R) su cui si riporta max|E^s| / max|E^i|
RATIO_SHELL = (1.1, 3.0)


@task(name="solve_densities", cache_policy=NONE)
def solve(run: RunConfig) -> DensitySolution:
    logger = get_run_logger()
    cfg, n_max = run.medium, run.numerics.n_max
    spectrum = assert_admissible(cfg, n_max)
    src = incident_trace_coeffs(run.incident, cfg, n_max, spectrum, quad_order=run.numerics.quad_order)
    density = solve_densities(src, spectrum)
    logger.info(
        f"Densita': grado effettivo {density.effective_degree()}, min|tau| eccitato={density.min_tau:.3e}, "
        f"amplificazione={density.amplification:.3e}"
    )
    return density


@task(name="evaluate_field_grid", cache_policy=NONE)
def evaluate_grid(run: RunConfig, density: DensitySolution, grid: str) -> FieldGrid:
    points = parse_grid_spec(grid)
    return full_solution_grid(
        run.incident, run.medium, points, run.numerics.n_max,
        spectrum=density.spectrum, threads=run.threads, density=density,
        delta_min=run.numerics.delta_min,
    )


@flow(name="Plasmon Scattering", log_prints=True)
def scatter_flow(
    config_path: str | None = None,
    grid: str = DEFAULT_GRID,
    n_max: int | None = None,
    out: str | None = None,
    threads: int | None = None,
    seed: int | None = None,
) -> dict:
    print("Avvio soluzione del problema di trasmissione")

    # 1) Config
    run = load_config(config_path, n_max=n_max, out=out, threads=threads, seed=seed)
    if run.incident is None:
        raise ConfigError("la sezione 'incident' e' obbligatoria per scatter")

    # 2) Densita' spettrali
    density = solve(run)

    # 3) Campi sulla griglia
    fg = evaluate_grid(run, density, grid)
    n_excl = fg.metadata["excluded_points"]
    delta_min = run.numerics.delta_min
    print(f"punti esclusi nella fascia |r-R| < {delta_min}R: {n_excl}", file=sys.stderr)

    # 4) Quality gate
    frame = validate_field_grid(fg.to_frame(), run.medium.R, delta_min)

    # 5) Export
    path, fmt = output_target(run, "scatter")
    export_grid(fg, path, fmt, frame=frame)

    R = run.medium.R
    ratio = scattering_ratio(run.incident, run.medium, fg, RATIO_SHELL[0] * R, RATIO_SHELL[1] * R)
    if ratio is not None:
        print(f"max|E^s| / max|E^i| su {RATIO_SHELL[0]}R <= r <= {RATIO_SHELL[1]}R = {ratio:.6e}")
    print(f"Griglia scritta in {path} ({frame.height} punti)")
    return {"path": str(path), "points": frame.height, "excluded": n_excl, "scattering_ratio": ratio,
            "amplification": density.amplification}


if __name__ == "__main__":
    scatter_flow()

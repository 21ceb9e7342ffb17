from __future__ import annotations

from prefect import flow, get_run_logger, task
from prefect.cache_policies import NONE

from plasmon.errors import ConfigError, PlasmonError
from plasmon.flows.common import load_config, output_target
from plasmon.tasks.config import RunConfig
from plasmon.tasks.design import (
    EXCITATION_REL,
    ScanReport,
    check_regime,
    dominant_regime,
    scan_cloaking,
    scan_resonance,
)
from plasmon.tasks.export import export_scan
from plasmon.tasks.scattering import incident_trace_coeffs
from plasmon.test.gate import validate_scan


@task(name="run_parameter_scan", cache_policy=NONE)
def run_scan(run: RunConfig) -> ScanReport:
    logger = get_run_logger()
    sc = run.scan
    if not sc.sweep:
        raise ConfigError("la scansione richiede almeno un asse in scan.sweep")
    axes = sc.axes()
    logger.info(f"Scansione {sc.mode}: assi {', '.join(f'{k}[{v.size}]' for k, v in axes.items())}, gradi {sc.n_range}")
    thresholds = {"theta_big": run.numerics.theta_big, "theta_small": run.numerics.theta_small}
    try:
        if sc.mode == "resonance":
            return scan_resonance(run.medium, axes, channel=sc.channel, n_range=sc.n_range,
                                  threads=run.threads, **thresholds)
        source = None
        if run.incident is None:
            logger.info(f"nessun campo incidente: modi eccitati presi da scan.source_channels={sc.source_channels}")
        else:
            top = sc.n_range[1]
            if run.incident.kind == "spectral_multipole":
                top = max(top, run.incident.index.degree)
            # modi eccitati dalla traccia del campo incidente sul punto base
            source = incident_trace_coeffs(run.incident, run.medium, top)
            excited = sorted({(c, idx.degree) for c, idx in source.nonzero(EXCITATION_REL)})
            logger.info(f"modi eccitati (canale, grado) fino a n={top}: {excited}")
        return scan_cloaking(run.medium, axes, source_channels=sc.source_channels, n_range=sc.n_range,
                             threads=run.threads, source=source, **thresholds)
    except PlasmonError:
        raise
    except ValueError as exc:
        raise ConfigError(f"scansione non valida: {exc}") from exc


@flow(name="Plasmon Parameter Scan", log_prints=True)
def scan_flow(
    config_path: str | None = None,
    mode: str | None = None,
    out: str | None = None,
    threads: int | None = None,
    seed: int | None = None,
) -> dict:
    print("Avvio scansione dei parametri del materiale")

    # 1) Config
    run = load_config(config_path, mode=mode, out=out, threads=threads, seed=seed)

    # 2) Verdetti di regime del punto base
    base = dominant_regime(check_regime(run.medium, run.numerics.theta_big))
    print(f"regime del punto base: {base}")

    # 3) Scansione a griglia (parallela sui punti)
    report = run_scan(run)

    # 4) Quality gate
    frame = validate_scan(report.to_frame(), report.n_range)

    # 5) Export
    path, fmt = output_target(run, "scan")
    export_scan(report, path, fmt, frame=frame)

    best = report.best
    if best is not None:
        params = ", ".join(f"{k}={v:.6g}" for k, v in best.params.items())
        print(f"migliore: {params} | n*={best.n_star} canale {best.channel} | obiettivo={best.objective:.6e}")
    met = sum(p.meets_threshold for p in report.points)
    print(f"punti oltre la soglia ({'theta_small' if report.kind == 'resonance' else 'theta_big'}): {met}")
    print(f"Scansione scritta in {path}: {len(report.points)} punti, {len(report.skipped)} scartati")
    return {
        "path": str(path),
        "points": len(report.points),
        "skipped": len(report.skipped),
        "best": None if best is None else {"params": best.params, "n_star": best.n_star, "objective": best.objective},
    }


if __name__ == "__main__":
    scan_flow()

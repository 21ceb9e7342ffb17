from __future__ import annotations

import numpy as np
import polars as pl
from prefect import flow, get_run_logger, task
from prefect.cache_policies import NONE

from plasmon.flows.common import load_config, output_target
from plasmon.tasks.export import export_spectrum
from plasmon.tasks.spectrum import MediumConfig, SpectrumTable, assert_admissible
from plasmon.test.gate import validate_spectrum


@task(name="compute_spectrum", cache_policy=NONE)
def compute_spectrum(cfg: MediumConfig, n_max: int) -> SpectrumTable:
    logger = get_run_logger()
    logger.info(f"Spettro per n = 1..{n_max}, k_m={cfg.k_m:.6g}, k_c={cfg.k_c:.6g}")
    table = assert_admissible(cfg, n_max)
    n_def = int(table.defective[1:].any(axis=1).sum())
    if n_def:
        logger.warning(f"{n_def} gradi con autovalori doppi difettivi")
    return table


def spectrum_summary(table: SpectrumTable) -> dict:
    """Grado con |tau| minimo per canale, e mediana."""
    mag = np.abs(table.tau[1:])
    out = {}
    for ch in range(4):
        i = int(np.argmin(mag[:, ch]))
        out[f"channel_{ch + 1}"] = {
            "n_min": i + 1,
            "abs_tau_min": float(mag[i, ch]),
            "median_abs_tau": float(np.median(mag[:, ch])),
        }
    return out


@flow(name="Plasmon Spectrum", log_prints=True)
def spectrum_flow(
    config_path: str | None = None,
    n_max: int | None = None,
    out: str | None = None,
    threads: int | None = None,
    seed: int | None = None,
) -> dict:
    print("Avvio calcolo dello spettro di I + K")

    # 1) Config
    run = load_config(config_path, n_max=n_max, out=out, threads=threads, seed=seed)

    # 2) Spettro (tutti i gradi, vettoriale)
    table = compute_spectrum(run.medium, run.numerics.n_max)

    # 3) Quality gate
    frame: pl.DataFrame = validate_spectrum(table.to_frame())

    # 4) Export
    path, fmt = output_target(run, "spectrum")
    export_spectrum(table, path, fmt, frame=frame)

    summary = spectrum_summary(table)
    for ch, info in summary.items():
        print(f"{ch}: min |tau| = {info['abs_tau_min']:.6e} a n = {info['n_min']} (mediana {info['median_abs_tau']:.3e})")
    print(f"Spettro scritto in {path}")
    return {"path": str(path), "rows": frame.height, "summary": summary}


if __name__ == "__main__":
    spectrum_flow()

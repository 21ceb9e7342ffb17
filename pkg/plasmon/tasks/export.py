"""Scrittura di tabelle, griglie, scansioni e report (CSV o JSON), sempre atomica."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import polars as pl
from prefect.logging import get_logger

from plasmon.tasks.design import DrudeFit, ScanReport
from plasmon.tasks.scattering import FieldGrid
from plasmon.tasks.spectrum import SpectrumRecord, SpectrumTable, WaveSpectrum
from plasmon.utils import atomic_output

logger = get_logger("plasmon.export")

# 17 cifre significative: round-trip esatto dei double
CSV_OPTIONS = {"float_scientific": True, "float_precision": 16}


# -------------------------
# Helpers
# -------------------------
def to_jsonable(obj):
    """Complessi come {"re", "im"}, non finiti come null, array numpy come liste."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(float(obj.real)), "im": to_jsonable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(payload: dict, path: str | Path) -> Path:
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=False, allow_nan=False)
    with atomic_output(path) as tmp:
        tmp.write_text(text + "\n", encoding="utf-8")
    logger.info(f"scritto {path}")
    return Path(path)


def write_frame(df: pl.DataFrame, path: str | Path, fmt: str = "csv", extra: dict | None = None) -> Path:
    if fmt == "json":
        payload = dict(extra or {})
        payload["rows"] = df.to_dicts()
        return write_json(payload, path)
    with atomic_output(path) as tmp:
        df.write_csv(tmp, **CSV_OPTIONS)
    logger.info(f"scritto {path}: {df.height} righe")
    return Path(path)


# -------------------------
# Esportatori
# -------------------------
def _wave(w: WaveSpectrum) -> dict:
    return {
        "k": w.k, "lambda": w.lam, "chi": w.chi, "pi": list(w.pi), "sigma": list(w.sigma),
        "m1": w.m1, "m2": w.m2, "l1": w.l1, "l2": w.l2,
    }


def spectrum_record_dict(r: SpectrumRecord) -> dict:
    return {
        "n": r.degree,
        "tau": r.tau,
        "alpha": r.alpha,
        "vectors": r.vectors,
        "beta": r.beta,
        "tau_asymptotic": r.tau_asym,
        "admissible": r.admissible,
        "defective": list(r.defective),
        "eigen_residual": r.eigen_residual,
        "closed_form_discrepancy": r.closed_form_discrepancy,
        "medium": _wave(r.medium),
        "core": _wave(r.core),
    }


def export_spectrum(table: SpectrumTable, path: str | Path, fmt: str = "csv", frame: pl.DataFrame | None = None) -> Path:
    if fmt == "json":
        return write_json(
            {
                "config": table.config.as_dict(),
                "config_hash": table.config.fingerprint(),
                "n_max": table.n_max,
                "records": [spectrum_record_dict(r) for r in table.records],
            },
            path,
        )
    return write_frame(frame if frame is not None else table.to_frame(), path, "csv")


def export_grid(grid: FieldGrid, path: str | Path, fmt: str = "csv", frame: pl.DataFrame | None = None) -> Path:
    frame = frame if frame is not None else grid.to_frame()
    return write_frame(frame, path, fmt, extra={"metadata": grid.metadata})


def export_scan(report: ScanReport, path: str | Path, fmt: str = "csv", frame: pl.DataFrame | None = None) -> Path:
    if fmt == "json":
        return write_json(
            {
                "kind": report.kind,
                "n_range": list(report.n_range),
                "points": [
                    {
                        "params": p.params,
                        "n_star": p.n_star,
                        "channel": p.channel,
                        "objective": p.objective,
                        "meets_threshold": p.meets_threshold,
                        "verdicts": [{"kind": v.kind, "satisfied": v.satisfied, "margins": v.margins} for v in p.verdicts],
                    }
                    for p in report.points
                ],
                "skipped": [{"params": p, "reason": reason} for p, reason in report.skipped],
            },
            path,
        )
    return write_frame(frame if frame is not None else report.to_frame(), path, "csv")


def export_verify(checks: list[dict], path: str | Path, summary: dict | None = None) -> Path:
    """Il report di verifica e' solo JSON."""
    payload = dict(summary or {})
    payload["checks"] = checks
    payload["passed"] = all(c.get("passed", False) for c in checks)
    return write_json(payload, path)


def export_drude(fit: DrudeFit, path: str | Path) -> Path:
    p = fit.params
    return write_json(
        {
            "params": {
                "omega_p_sq": p.omega_p_sq, "tau_damp": p.tau_damp, "omega0": p.omega0,
                "filling": p.filling, "eps0": p.eps0, "mu0": p.mu0,
            },
            "omega_p_sq_leak": fit.omega_p_sq_leak,
            "filling_leak": fit.filling_leak,
            "eps_residual": fit.eps_residual,
            "mu_residual": fit.mu_residual,
        },
        path,
    )

"""Verifica: identita' delle funzioni radiali, oracoli di quadratura, residui di trasmissione e radiazione.

Livelli:
- quick: Wronskiano, due forme di lambda, oracoli lambda/chi per n <= 3;
- full:  in piu' lambda/chi e M/L fino a n = 6 su casi casuali, residui sui due punti di riferimento.
"""
from __future__ import annotations

import math
from contextlib import nullcontext

import numpy as np
from prefect import flow, get_run_logger, task
from prefect.cache_policies import NONE

from plasmon.errors import AdmissibilityViolation, ExtrapolationUnstable, LeakageExcessive
from plasmon.flows.common import OUTPUT_DIR
from plasmon.tasks.export import export_verify
from plasmon.tasks.harmonics import HarmonicIndex
from plasmon.tasks.oracle import LEAKAGE_TOL, ORACLE_MAX_DEGREE, oracle_M_L, single_layer_jumps
from plasmon.tasks.scattering import (
    IncidentField,
    incident_trace_coeffs,
    radiation_residual,
    solve_densities,
    transmission_residual,
)
from plasmon.tasks.specfun import fault_injection, radial_table
from plasmon.tasks.spectrum import cloaking_reference, m_l_coeffs, resonance_reference, spectrum_table

WRONSKIAN_TOL = 1e-10
ORACLE_TOL = 1e-4
TRANSMISSION_TOL = 1e-3
WRONSKIAN_SAMPLES = 500
ORACLE_CASES = {"quick": 2, "full": 20}
# n_max delle soluzioni complete nei controlli di trasmissione
VERIFY_N_MAX = 40


def _check(identity: str, case: dict, oracle, closed_form, tol: float, scale_floor: float = 1e-3) -> dict:
    err = abs(complex(oracle) - complex(closed_form))
    rel = err / max(abs(complex(closed_form)), scale_floor)
    return {
        "identity": identity, "case": case, "oracle": oracle, "closed_form": closed_form,
        "abs_error": err, "rel_error": rel, "tolerance": tol, "passed": bool(rel <= tol),
    }


def _failure(identity: str, case: dict, exc: Exception) -> dict:
    return {"identity": identity, "case": case, "error": str(exc), "passed": False}


def oracle_cases(rng: np.random.Generator, count: int) -> list[tuple[complex, float]]:
    """(k, R) di riferimento piu' casi casuali con |k| R <= 5."""
    cases = [(5.0 + 0j, 1.0), (1.0 + 0.2j, 0.8)]
    while len(cases) < count:
        R = float(rng.uniform(0.5, 1.5))
        mod = float(rng.uniform(0.5, 5.0 / R))
        arg = float(rng.uniform(0.0, math.pi / 4))
        cases.append((complex(mod * math.cos(arg), mod * math.sin(arg)), R))
    return cases[:count]


# -------------------------
# Tasks
# -------------------------
@task(name="verify_radial_identities", cache_policy=NONE)
def radial_identities(seed: int, inject_fault: bool) -> list[dict]:
    logger = get_run_logger()
    rng = np.random.default_rng(seed)
    checks = []
    with fault_injection() if inject_fault else nullcontext():
        for _ in range(WRONSKIAN_SAMPLES):
            n = int(rng.integers(0, 81))
            mod = float(rng.uniform(0.1, 20.0))
            arg = float(rng.uniform(0.0, math.pi / 2))
            R = float(rng.uniform(0.5, 2.0))
            z = complex(mod * math.cos(arg), mod * math.sin(arg)) * R
            p = radial_table(n, z).pair(n)
            case = {"n": n, "z": z}
            checks.append(_check("wronskian", case, p.wronskian, 1j / z**2, WRONSKIAN_TOL, scale_floor=0.0))
            lam = 0.5 - 1j * z**2 * p.j_prime * p.h1
            lam_dual = -0.5 - 1j * z**2 * p.j * p.h1_prime
            checks.append(_check("lambda_dual_forms", case, lam_dual, lam, WRONSKIAN_TOL, scale_floor=0.0))
    failed = sum(not c["passed"] for c in checks)
    logger.info(f"Identita' radiali: {len(checks)} controlli, {failed} falliti")
    return checks


@task(name="verify_layer_oracles", cache_policy=NONE)
def layer_oracles(cases: list[tuple[complex, float]], max_degree: int, with_operators: bool, inject_fault: bool) -> list[dict]:
    logger = get_run_logger()
    checks = []
    with fault_injection() if inject_fault else nullcontext():
        for k, R in cases:
            table = _closed_form_lambda_chi(k, R, max(max_degree, 1))
            for n in range(0, max_degree + 1):
                case = {"n": n, "k": k, "R": R}
                try:
                    value, normal = single_layer_jumps(n, k, R)
                except ExtrapolationUnstable as exc:
                    checks.append(_failure("lambda/chi", case, exc))
                    continue
                checks.append(_check("lambda", case, normal.average, table["lam"][n], ORACLE_TOL))
                checks.append(_check("chi", case, value.average, table["chi"][n], ORACLE_TOL))
                if not with_operators or n < 1:
                    continue
                try:
                    m1, m2, l1, l2 = m_l_coeffs(n, k, R)
                except AdmissibilityViolation as exc:
                    checks.append(_failure("m/l coefficients", case, exc))
                    continue
                # M[grad] = m2 grad, L[grad] = l2 grad x nu; M[grad x nu] = m1 grad x nu, L[grad x nu] = l1 grad
                for which, m_cf, l_cf in (("grad", m2, l2), ("grad_cross_nu", m1, l1)):
                    ocase = {**case, "density": which}
                    try:
                        resp = oracle_M_L(HarmonicIndex(n, 0), which, k, R, strict=False)
                    except (ExtrapolationUnstable, LeakageExcessive) as exc:
                        checks.append(_failure("M/L", ocase, exc))
                        continue
                    checks.append(_check("m_diagonal", ocase, resp.m_diagonal, m_cf, ORACLE_TOL))
                    checks.append(_check("l_coefficient", ocase, resp.l_coefficient, l_cf, ORACLE_TOL))
                    leak = max(resp.m_leakage, resp.l_leakage, resp.cross_degree_leakage, resp.order_spread)
                    checks.append({"identity": "leakage", "case": ocase, "oracle": leak, "closed_form": 0.0,
                                   "abs_error": leak, "rel_error": leak, "tolerance": LEAKAGE_TOL,
                                   "passed": bool(leak <= LEAKAGE_TOL)})
    failed = sum(not c["passed"] for c in checks)
    logger.info(f"Oracoli di strato: {len(checks)} controlli, {failed} falliti")
    return checks


def _closed_form_lambda_chi(k: complex, R: float, n_max: int) -> dict:
    """lambda, chi in forma chiusa per n = 0..n_max (valori diretti, senza controllo delle forme duali)."""
    tab = radial_table(n_max, k * R)
    z = k * R
    return {"lam": 0.5 - 1j * z**2 * tab.j_prime * tab.h1, "chi": -1j * z * R * tab.h1 * tab.j}


@task(name="verify_reference_solutions", cache_policy=NONE)
def reference_solutions(threads: int) -> list[dict]:
    logger = get_run_logger()
    plane = IncidentField.plane_wave([4.0, -4.0, 0.0], [1.0, 1.0, 0.0])
    vortex = IncidentField.closed_form_vortex()
    checks = []
    for name, cfg, f in (("resonance", resonance_reference(), plane), ("cloaking", cloaking_reference(), vortex)):
        case = {"config": name, "incident": f.kind}
        spectrum = spectrum_table(cfg, VERIFY_N_MAX, with_closed_form=False)
        density = solve_densities(incident_trace_coeffs(f, cfg, VERIFY_N_MAX, spectrum), spectrum)
        try:
            res_E, res_H = transmission_residual(f, cfg, VERIFY_N_MAX, density=density, threads=threads)
        except ExtrapolationUnstable as exc:
            checks.append(_failure("transmission", case, exc))
        else:
            for label, res in (("transmission_E", res_E), ("transmission_H", res_H)):
                checks.append({"identity": label, "case": case, "oracle": res, "closed_form": 0.0,
                               "abs_error": res, "rel_error": res, "tolerance": TRANSMISSION_TOL,
                               "passed": bool(res <= TRANSMISSION_TOL)})
        radiation = radiation_residual(density, cfg, threads=threads)
        decreasing = all(b < a for a, b in zip(radiation, radiation[1:]))
        checks.append({"identity": "radiation_decay", "case": {**case, "radii": [10.0, 20.0, 40.0]},
                       "oracle": radiation, "closed_form": None, "passed": bool(decreasing)})
    failed = sum(not c["passed"] for c in checks)
    logger.info(f"Soluzioni di riferimento: {len(checks)} controlli, {failed} falliti")
    return checks


# -------------------------
# Flow
# -------------------------
@flow(name="Plasmon Verify", log_prints=True)
def verify_flow(
    level: str = "quick",
    inject_fault: bool = False,
    seed: int = 0,
    out: str | None = None,
    threads: int = 1,
) -> dict:
    if level not in ORACLE_CASES:
        raise ValueError(f"livello sconosciuto (value={level})")
    print(f"Avvio verifica livello {level}" + (" con tabelle corrotte" if inject_fault else ""))
    rng = np.random.default_rng(seed)

    # 1) Wronskiano e forme duali di lambda
    checks = radial_identities(seed, inject_fault)

    # 2) Oracoli di quadratura
    cases = oracle_cases(rng, ORACLE_CASES[level])
    if level == "quick":
        checks += layer_oracles(cases, 3, False, inject_fault)
    else:
        checks += layer_oracles(cases, ORACLE_MAX_DEGREE, True, inject_fault)

    # 3) Residui di trasmissione e radiazione (solo full)
    if level == "full":
        checks += reference_solutions(threads)

    # 4) Report
    passed = all(c["passed"] for c in checks)
    path = out or f"{OUTPUT_DIR}/verify_{level}.json"
    export_verify(checks, path, summary={"level": level, "seed": seed, "inject_fault": inject_fault})
    failed = [c for c in checks if not c["passed"]]
    by_identity: dict[str, int] = {}
    for c in failed:
        by_identity[c["identity"]] = by_identity.get(c["identity"], 0) + 1
    print(f"controlli: {len(checks)}, falliti: {len(failed)} {by_identity if failed else ''}".rstrip())
    print(f"Report scritto in {path}")
    return {"path": path, "passed": passed, "checks": len(checks), "failed": len(failed)}


if __name__ == "__main__":
    verify_flow()

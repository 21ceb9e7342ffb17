from __future__ import annotations

from prefect import flow, get_run_logger, task
from prefect.cache_policies import NONE

from plasmon.errors import ConfigError
from plasmon.tasks.design import DRUDE_PRESETS, DrudeFit, DrudeParams, drude_forward, drude_inverse
from plasmon.tasks.export import export_drude


@task(name="drude_forward", cache_policy=NONE)
def forward(params: DrudeParams, omega: float) -> tuple[complex, complex]:
    logger = get_run_logger()
    eps_c, mu_c = drude_forward(params, omega)
    logger.info(f"Drude diretto: omega={omega}, omega_p^2={params.omega_p_sq}, F={params.filling}")
    return eps_c, mu_c


@task(name="drude_inverse", cache_policy=NONE)
def inverse(eps_c: complex, mu_c: complex, omega: float, tau_damp: float, omega0: float) -> DrudeFit:
    return drude_inverse(eps_c, mu_c, omega, tau_damp, omega0)


@flow(name="Plasmon Drude", log_prints=True)
def drude_flow(
    direction: str = "forward",
    preset: str | None = None,
    omega: float = 5.0,
    omega_p_sq: float | None = None,
    tau_damp: float = 1e-4,
    omega0: float = 2.0,
    filling: float = 0.0,
    eps_c: tuple[float, float] | None = None,
    mu_c: tuple[float, float] = (1.0, 0.0),
    out: str | None = None,
) -> dict:
    # 1) Parametri (preset o espliciti)
    if preset is not None:
        p = DRUDE_PRESETS[preset]
        params, omega = p.params, p.omega
        print(f"preset {preset} ({p.purpose}): valori stampati eps_c={p.eps_c}, mu_c={p.mu_c}")
    elif direction == "forward":
        if omega_p_sq is None:
            raise ConfigError("--omega-p-sq richiesto per il calcolo diretto")
        params = DrudeParams(omega_p_sq=omega_p_sq, tau_damp=tau_damp, omega0=omega0, filling=filling)

    # 2) Calcolo
    if direction == "forward":
        e, m = forward(params, omega)
        print(f"eps_c = {e.real:.6g} {e.imag:+.6g}i")
        print(f"mu_c  = {m.real:.6g} {m.imag:+.6g}i")
        return {"eps_c": e, "mu_c": m}

    if preset is not None:
        # si parte dai valori stampati del preset
        target_eps, target_mu = complex(p.eps_c), complex(p.mu_c)
        tau_damp, omega0 = params.tau_damp, params.omega0
    else:
        if eps_c is None:
            raise ConfigError("--eps-c richiesto per l'inversione")
        target_eps, target_mu = complex(*eps_c), complex(*mu_c)
    fit = inverse(target_eps, target_mu, omega, tau_damp, omega0)
    print(f"omega_p^2 = {fit.params.omega_p_sq:.8g} (parte immaginaria scartata {fit.omega_p_sq_leak:.3e})")
    print(f"F = {fit.params.filling:.8g} (parte immaginaria scartata {fit.filling_leak:.3e})")

    # 3) Export (facoltativo)
    if out is not None:
        export_drude(fit, out)
        print(f"Parametri scritti in {out}")
    return {"params": fit.params, "eps_residual": fit.eps_residual, "mu_residual": fit.mu_residual}


if __name__ == "__main__":
    drude_flow()

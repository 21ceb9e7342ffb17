"""Modello di Drude, verdetti di regime (risonanza / invisibilita') e scansioni a griglia."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import polars as pl
from joblib import Parallel, delayed
from prefect.logging import get_logger

from plasmon.errors import AdmissibilityViolation, InadmissibleConfig, NearPole, Unreachable
from plasmon.tasks.spectrum import MediumConfig, spectrum_table
from plasmon.utils import THETA_BIG, THETA_SMALL, THREADS, Numerics

logger = get_logger("plasmon.design")


# -------------------------
# Drude
# -------------------------
@dataclass(frozen=True)
class DrudeParams:
    omega_p_sq: float
    tau_damp: float
    omega0: float
    filling: float = 0.0
    eps0: float = 1.0
    mu0: float = 1.0

    def __post_init__(self):
        if self.tau_damp <= 0:
            raise ValueError(f"tau_damp deve essere positivo (value={self.tau_damp})")
        if self.eps0 <= 0 or self.mu0 <= 0 or self.omega0 <= 0:
            raise ValueError(f"eps0, mu0, omega0 devono essere positivi (value={(self.eps0, self.mu0, self.omega0)})")
        if not 0.0 <= self.filling < 1.0:
            raise ValueError(f"filling fuori da [0, 1) (value={self.filling})")


@dataclass(frozen=True)
class DrudePreset:
    params: DrudeParams
    omega: float
    eps_c: complex   # valori stampati
    mu_c: complex
    purpose: str


DRUDE_PRESETS: dict[str, DrudePreset] = {
    "resonance_1": DrudePreset(DrudeParams(51.0045, 1e-4, 2.0, 0.0), 5.0, -1.04018 + 0.00004j, 1.0, "resonance"),
    "resonance_2": DrudePreset(DrudeParams(51.518, 1e-5, 2.0, 0.1), 5.0, -1.06072 + 4.1e-6j, 0.880952 + 2.8e-7j, "resonance"),
    "cloaking_1": DrudePreset(DrudeParams(188.952, 6.615e-7, 2.0, 0.0), 5.0, -6.55806 + 0.000001j, 1.0, "cloaking"),
    "cloaking_2": DrudePreset(DrudeParams(186.769, 1e-5, 2.0, 0.02), 5.0, -6.47076 + 0.00001494j, 0.97619 + 5.66893e-8j, "cloaking"),
}


def _lorentz_denominator(p: DrudeParams, omega: float) -> complex:
    return omega**2 - p.omega0**2 + 1j * p.tau_damp * omega


def drude_forward(p: DrudeParams, omega: float) -> tuple[complex, complex]:
    if omega <= 0:
        raise ValueError(f"omega deve essere positivo (value={omega})")
    den = _lorentz_denominator(p, omega)
    if abs(den) < 1e-12:
        raise NearPole("frequenza sul polo di mu_c", abs(den))
    eps_c = p.eps0 * (1.0 - p.omega_p_sq / (omega * (omega + 1j * p.tau_damp)))
    mu_c = p.mu0 * (1.0 - p.filling * omega**2 / den)
    return complex(eps_c), complex(mu_c)


@dataclass(frozen=True)
class DrudeFit:
    params: DrudeParams
    omega_p_sq_leak: float   # parte immaginaria scartata di omega_p^2
    filling_leak: float
    eps_residual: float
    mu_residual: float


def drude_inverse(
    target_eps: complex,
    target_mu: complex,
    omega: float,
    tau_damp: float,
    omega0: float,
    eps0: float = 1.0,
    mu0: float = 1.0,
) -> DrudeFit:
    """Parametri di Drude che riproducono (eps_c, mu_c); le parti immaginarie scartate sono riportate."""
    if omega <= 0:
        raise ValueError(f"omega deve essere positivo (value={omega})")
    wp2 = omega * (omega + 1j * tau_damp) * (1.0 - complex(target_eps) / eps0)
    if wp2.real <= 0:
        raise Unreachable("omega_p^2 richiesto non positivo", wp2.real)
    den = omega**2 - omega0**2 + 1j * tau_damp * omega
    if abs(den) < 1e-12:
        raise NearPole("frequenza sul polo di mu_c", abs(den))
    filling = (1.0 - complex(target_mu) / mu0) * den / omega**2
    if not 0.0 <= filling.real < 1.0:
        raise Unreachable("fattore di riempimento fuori da [0, 1)", filling.real)

    params = DrudeParams(
        omega_p_sq=float(wp2.real), tau_damp=tau_damp, omega0=omega0,
        filling=float(filling.real), eps0=eps0, mu0=mu0,
    )
    eps_c, mu_c = drude_forward(params, omega)
    fit = DrudeFit(
        params=params,
        omega_p_sq_leak=float(wp2.imag),
        filling_leak=float(filling.imag),
        eps_residual=abs(eps_c - target_eps),
        mu_residual=abs(mu_c - target_mu),
    )
    logger.info(f"inversione Drude: omega_p^2={params.omega_p_sq:.6g}, F={params.filling:.6g}, leak={wp2.imag:.3e}")
    return fit


def drude_config(name: str, base: MediumConfig | None = None) -> MediumConfig:
    """Configurazione di riferimento con (eps_c, mu_c) calcolati dal preset di Drude."""
    preset = DRUDE_PRESETS[name]
    eps_c, mu_c = drude_forward(preset.params, preset.omega)
    base = base or MediumConfig()
    return base.replace(eps_c=eps_c, mu_c=mu_c, omega=preset.omega)


# -------------------------
# Verdetti di regime
# -------------------------
@dataclass(frozen=True)
class RegimeVerdict:
    kind: str
    satisfied: bool
    margins: dict[str, float] = field(default_factory=dict)


REGIME_KINDS = (
    "resonance_cf1", "resonance_cf2", "resonance_cf3", "resonance_cf4", "resonance_double",
    "cloak_re01", "cloak_re02", "cloak_re03", "cloak_re04", "cloak_cc1", "cloak_cc1a",
)


def _verdict(kind: str, **margins: float) -> RegimeVerdict:
    return RegimeVerdict(kind=kind, satisfied=all(v >= 0 for v in margins.values()), margins=margins)


def check_regime(cfg: MediumConfig, theta_big: float = THETA_BIG) -> list[RegimeVerdict]:
    """Ogni condizione con i suoi margini; soddisfatta se tutti i margini sono >= 0."""
    tol, slack = Numerics.EQUALITY_TOL, Numerics.STRICT_SLACK
    w2 = cfg.omega**2
    eps_sum = cfg.eps_c + cfg.eps_m
    mu_sum = cfg.mu_c + cfg.mu_m
    eps_big = abs(eps_sum * w2) - theta_big - slack
    mu_big = abs(mu_sum) - theta_big - slack
    split = ((mu_sum) - eps_sum * w2).real

    return [
        _verdict("resonance_cf1", eps_equal=tol - abs(cfg.eps_c + cfg.eps_m), re_mu_sum=mu_sum.real),
        _verdict("resonance_cf2", mu_equal=tol - abs(cfg.mu_c + cfg.mu_m), re_eps_sum_w2=(eps_sum * w2).real),
        _verdict("resonance_cf3", eps_equal=tol - abs(cfg.eps_m + cfg.eps_c), re_mu_sum=-mu_sum.real),
        _verdict("resonance_cf4", mu_equal=tol - abs(cfg.mu_m + cfg.mu_c), re_eps_sum_w2=-(eps_sum * w2).real),
        _verdict("resonance_double", eps_equal=tol - abs(eps_sum), mu_equal=tol - abs(mu_sum)),
        _verdict("cloak_re01", split=split, eps_big=eps_big),
        _verdict("cloak_re02", split=-split - slack, mu_big=mu_big),
        _verdict("cloak_re03", split=split, mu_big=mu_big),
        _verdict("cloak_re04", split=-split - slack, eps_big=eps_big),
        _verdict("cloak_cc1", mu_big=mu_big, eps_big=eps_big),
        _verdict("cloak_cc1a", eps_below=-(cfg.eps_c.real + cfg.eps_m.real) - slack, omega_big=w2 - theta_big - slack),
    ]


def dominant_regime(verdicts: list[RegimeVerdict]) -> str:
    for v in verdicts:
        if v.satisfied:
            return v.kind
    return "none"


# -------------------------
# Scansioni
# -------------------------
SWEEP_KEYS = ("re_eps_c", "im_eps_c", "re_mu_c", "omega")
# coefficienti di sorgente sotto questa frazione del massimo non contano come eccitati
EXCITATION_REL = 1e-12


def sweep_axis(lo: float, hi: float, step: float) -> np.ndarray:
    """lo, lo + step, ... fino a hi compreso; dimezzare il passo da' un sovrainsieme."""
    if step <= 0:
        raise ValueError(f"passo non positivo (value={step})")
    if hi < lo:
        return np.zeros(0)
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _apply(base: MediumConfig, params: dict[str, float]) -> MediumConfig:
    changes = {}
    eps_c, mu_c = base.eps_c, base.mu_c
    if "re_eps_c" in params:
        eps_c = complex(params["re_eps_c"], eps_c.imag)
    if "im_eps_c" in params:
        eps_c = complex(eps_c.real, params["im_eps_c"])
    if "re_mu_c" in params:
        mu_c = complex(params["re_mu_c"], mu_c.imag)
    changes["eps_c"], changes["mu_c"] = eps_c, mu_c
    if "omega" in params:
        changes["omega"] = float(params["omega"])
    return base.replace(**changes)


@dataclass(frozen=True)
class ScanPoint:
    params: dict[str, float]
    n_star: int
    objective: float
    channel: int
    verdicts: list[RegimeVerdict] = field(default_factory=list)
    # risonanza: objective < theta_small; invisibilita': objective > theta_big
    meets_threshold: bool = False

    def sort_key(self) -> tuple:
        return tuple(self.params[k] for k in sorted(self.params))


@dataclass(frozen=True)
class ScanReport:
    kind: str                 # "resonance" | "cloaking"
    points: list[ScanPoint]   # gia' ordinati
    skipped: list[tuple[dict, str]]
    n_range: tuple[int, int]

    @property
    def best(self) -> ScanPoint | None:
        return self.points[0] if self.points else None

    def to_frame(self) -> pl.DataFrame:
        keys = sorted(self.points[0].params) if self.points else []
        cols: dict[str, list] = {k: [p.params[k] for p in self.points] for k in keys}
        cols["n_star"] = [p.n_star for p in self.points]
        cols["channel"] = [p.channel for p in self.points]
        cols["objective"] = [p.objective for p in self.points]
        cols["meets_threshold"] = [p.meets_threshold for p in self.points]
        for kind in REGIME_KINDS:
            cols[kind] = [next((v.satisfied for v in p.verdicts if v.kind == kind), False) for p in self.points]
        return pl.DataFrame(cols, schema_overrides={"n_star": pl.Int64, "channel": pl.Int64})


def _grid(sweep: dict[str, np.ndarray]) -> list[dict[str, float]]:
    keys = [k for k in SWEEP_KEYS if k in sweep]
    unknown = set(sweep) - set(SWEEP_KEYS)
    if unknown:
        raise ValueError(f"assi di scansione sconosciuti (value={sorted(unknown)})")
    axes = [np.asarray(sweep[k], dtype=float) for k in keys]
    if any(a.size == 0 for a in axes) or not axes:
        return []
    for k, a in zip(keys, axes):
        if a.size < 2:
            raise ValueError(f"l'asse {k} richiede almeno 2 punti (value={a.size})")
    mesh = np.meshgrid(*axes, indexing="ij")
    return [dict(zip(keys, (float(m.flat[i]) for m in mesh))) for i in range(mesh[0].size)]


def _evaluate(kind, base, params, channels, n_range, excited, theta_big, theta_small):
    """(punto, None) oppure (None, motivo) se la configurazione non e' ammissibile."""
    lo, hi = n_range
    try:
        cfg = _apply(base, params)
        table = spectrum_table(cfg, hi, with_closed_form=False)
    except (InadmissibleConfig, AdmissibilityViolation) as exc:
        return None, str(exc)
    if not bool(np.all(table.admissible[lo : hi + 1])):
        return None, "condizione j_m(kR) != j_{m+2}(kR) violata"

    best = (math.inf, 0, 0)
    for ch in channels:
        for n in range(lo, hi + 1):
            if excited is not None and (ch, n) not in excited:
                continue
            val = abs(table.tau[n, ch - 1])
            if val < best[0]:
                best = (float(val), n, ch)
    if best[1] == 0:
        return None, "nessun modo eccitato nell'intervallo di gradi"
    met = best[0] < theta_small if kind == "resonance" else best[0] > theta_big
    point = ScanPoint(params=params, n_star=best[1], objective=best[0], channel=best[2],
                      verdicts=check_regime(cfg, theta_big), meets_threshold=bool(met))
    return point, None


def _scan(kind, base, sweep, channels, n_range, excited, threads, theta_big=THETA_BIG, theta_small=THETA_SMALL) -> ScanReport:
    lo, hi = n_range
    if lo < 1 or hi < lo:
        raise ValueError(f"intervallo di gradi non valido (value={n_range})")
    grid = _grid(sweep)
    results = Parallel(n_jobs=max(1, threads), prefer="threads")(
        delayed(_evaluate)(kind, base, p, tuple(channels), n_range, excited, theta_big, theta_small) for p in grid
    )
    points = [r for r, _ in results if r is not None]
    skipped = [(p, reason) for p, (r, reason) in zip(grid, results) if r is None]
    descending = kind == "cloaking"
    points.sort(key=lambda p: ((-p.objective if descending else p.objective), p.sort_key()))
    if skipped:
        logger.warning(f"scansione {kind}: {len(skipped)} punti scartati")
    logger.info(f"scansione {kind}: {len(points)} punti valutati")
    return ScanReport(kind=kind, points=points, skipped=skipped, n_range=(lo, hi))


def scan_resonance(
    base: MediumConfig,
    sweep: dict[str, np.ndarray],
    channel: int = 1,
    n_range: tuple[int, int] = (1, 60),
    threads: int = THREADS,
    theta_big: float = THETA_BIG,
    theta_small: float = THETA_SMALL,
) -> ScanReport:
    """Punti ordinati per min_n |tau_{channel,n}| crescente."""
    return _scan("resonance", base, sweep, (channel,), n_range, None, threads, theta_big, theta_small)


def scan_cloaking(
    base: MediumConfig,
    sweep: dict[str, np.ndarray],
    source_channels=(3,),
    n_range: tuple[int, int] = (1, 1),
    threads: int = THREADS,
    source=None,
    theta_big: float = THETA_BIG,
    theta_small: float = THETA_SMALL,
) -> ScanReport:
    """Punti ordinati per min |tau| sui modi eccitati, decrescente.

    Con `source` (SourceCoefficients) contano solo i (canale, grado) con |f| sopra
    EXCITATION_REL volte il massimo.
    """
    excited = None
    if source is not None:
        excited = {(c, idx.degree) for c, idx in source.nonzero(EXCITATION_REL)}
    return _scan("cloaking", base, sweep, tuple(source_channels), n_range, excited, threads, theta_big, theta_small)

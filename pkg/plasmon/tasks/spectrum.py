"""Sistema spettrale chiuso dell'operatore I + K per l'inclusione sferica.

Per ogni grado n:
- lambda, chi (autovalori di K* e del single layer su Y_n), in due forme duali;
- i sistemi pi/sigma e i coefficienti m1, m2 (operatore M) e l1, l2 (operatore L);
- le matrici 2x2 A_n (canali 1/2) e B_n (canali 3/4), i loro autovalori tau
  e i rapporti alpha delle autofunzioni;
- le espressioni asintotiche tau~ e le forme chiuse stampate delle radici (controllo).

Etichette: tau_{1,3} = (tr - sqrt(disc))/2, tau_{2,4} = (tr + sqrt(disc))/2 con radice principale,
la stessa scelta di segno delle espressioni asintotiche.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import polars as pl
from prefect.logging import get_logger

from plasmon.errors import AdmissibilityViolation, DegenerateEigenpair, InadmissibleConfig
from plasmon.tasks.specfun import radial_table
from plasmon.utils import N_MAX, Numerics, config_hash

logger = get_logger("plasmon.spectrum")


# -------------------------
# Configurazione del mezzo
# -------------------------
def wave_number(eps: complex, mu: complex, omega: float) -> complex:
    """k = omega sqrt(eps mu) sul ramo con Im k >= 0."""
    s = np.sqrt(complex(eps) * complex(mu))
    if s.imag < 0 or (s.imag == 0 and s.real < 0):
        s = -s
    return complex(omega * s)


@dataclass(frozen=True)
class MediumConfig:
    R: float = 1.0
    eps_m: complex = 1.0
    mu_m: complex = 1.0
    eps_c: complex = 1.0
    mu_c: complex = 1.0
    omega: float = 1.0

    def __post_init__(self):
        for name in ("eps_m", "mu_m", "eps_c", "mu_c"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "omega", float(self.omega))
        if self.R <= 0 or self.omega <= 0:
            raise InadmissibleConfig("R e omega devono essere positivi", (self.R, self.omega))
        if self.eps_c.imag < 0 or self.mu_c.imag < 0:
            raise InadmissibleConfig("Im eps_c e Im mu_c devono essere >= 0", (self.eps_c, self.mu_c))

    @property
    def k_m(self) -> complex:
        return wave_number(self.eps_m, self.mu_m, self.omega)

    @property
    def k_c(self) -> complex:
        return wave_number(self.eps_c, self.mu_c, self.omega)

    @property
    def branch(self) -> str:
        return "principal, Im k >= 0"

    def replace(self, **changes) -> "MediumConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        out = {"R": self.R, "omega": self.omega}
        for name in ("eps_m", "mu_m", "eps_c", "mu_c"):
            v = getattr(self, name)
            out[name] = {"re": v.real, "im": v.imag}
        return out

    def fingerprint(self) -> str:
        return config_hash(self.as_dict())


def resonance_reference() -> MediumConfig:
    return MediumConfig(R=1.0, eps_m=1.0, mu_m=1.0, eps_c=-1.04018 + 0.00004j, mu_c=1.0, omega=5.0)


def cloaking_reference() -> MediumConfig:
    return MediumConfig(R=1.0, eps_m=1.0, mu_m=1.0, eps_c=-6.55806 + 0.000001j, mu_c=1.0, omega=5.0)


# -------------------------
# Coefficienti per singolo numero d'onda
# -------------------------
@dataclass(frozen=True)
class WaveCoefficients:
    """Tutti i coefficienti a numero d'onda k; array su n = 1..n_max salvo lam/chi (0..n_max+2)."""
    k: complex
    R: float
    lam_all: np.ndarray
    lam_dual_all: np.ndarray
    chi_all: np.ndarray
    pi: np.ndarray      # (4, n_max)
    sigma: np.ndarray   # (4, n_max)
    m1: np.ndarray
    m2: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    margin: np.ndarray  # margine |j_m - j_{m+2}| relativo, m = 0..n_max

    @property
    def n_max(self) -> int:
        return self.m1.size


def _lambda_chi_arrays(n_top: int, k: complex, R: float):
    z = complex(k) * R
    tab = radial_table(n_top, z)
    with np.errstate(over="ignore", invalid="ignore"):
        lam = 0.5 - 1j * z**2 * tab.j_prime * tab.h1
        lam_dual = -0.5 - 1j * z**2 * tab.j * tab.h1_prime
        chi = -1j * z * R * tab.h1 * tab.j
    return tab, lam, lam_dual, chi


def _check_dual(lam: np.ndarray, lam_dual: np.ndarray, k: complex) -> None:
    rel = np.abs(lam - lam_dual) / np.maximum(np.abs(lam), 1e-300)
    bad = ~(rel <= Numerics.DUAL_LAMBDA_TOL)
    if np.any(bad):
        n_bad = int(np.argmax(bad))
        raise AdmissibilityViolation(
            f"le due forme di lambda non coincidono (k={k}, n={n_bad})", float(rel[n_bad])
        )


def wave_coefficients(k: complex, R: float, n_max: int) -> WaveCoefficients:
    tab, lam, lam_dual, chi = _lambda_chi_arrays(n_max + 2, k, R)
    _check_dual(lam[: n_max + 2], lam_dual[: n_max + 2], k)

    n = np.arange(1, n_max + 1)
    d = 2 * n + 1
    lm, lp = lam[n - 1], lam[n + 1]
    cm, cp = chi[n - 1], chi[n + 1]
    nn1 = n * (n + 1)
    pi = np.stack([((n + 1) * lm + n * lp) / d, nn1 * (lm - lp) / d, (lm - lp) / d, ((n + 1) * lp + n * lm) / d])
    sigma = np.stack([((n + 1) * cm + n * cp) / d, nn1 * (cm - cp) / d, (cm - cp) / d, ((n + 1) * cp + n * cm) / d])

    k = complex(k)
    m1 = pi[0] + (sigma[0] - nn1 * sigma[2]) / R
    m2 = lam[n] + chi[n] / R
    l1 = k**2 * chi[n]
    l2 = nn1 * chi[n] / R**2 - k**2 * sigma[0]

    jm = tab.j[: n_max + 1]
    jp2 = tab.j[2 : n_max + 3]
    margin = np.abs(jm - jp2) / np.maximum(np.maximum(np.abs(jm), np.abs(jp2)), 1e-300)
    return WaveCoefficients(
        k=k, R=R, lam_all=lam, lam_dual_all=lam_dual, chi_all=chi,
        pi=pi, sigma=sigma, m1=m1, m2=m2, l1=l1, l2=l2, margin=margin,
    )


def lambda_chi(n: int, k: complex, R: float) -> tuple[complex, complex]:
    _, lam, lam_dual, chi = _lambda_chi_arrays(max(n, 1), k, R)
    _check_dual(lam[n : n + 1], lam_dual[n : n + 1], k)
    return complex(lam[n]), complex(chi[n])


def pi_sigma(n: int, k: complex, R: float) -> tuple[tuple[complex, ...], tuple[complex, ...]]:
    if n < 1:
        raise ValueError("pi_sigma richiede n >= 1")
    wc = wave_coefficients(k, R, n)
    return tuple(complex(v) for v in wc.pi[:, -1]), tuple(complex(v) for v in wc.sigma[:, -1])


def m_l_coeffs(n: int, k: complex, R: float) -> tuple[complex, complex, complex, complex]:
    if n < 1:
        raise ValueError("m_l_coeffs richiede n >= 1")
    wc = wave_coefficients(k, R, n)
    return complex(wc.m1[-1]), complex(wc.m2[-1]), complex(wc.l1[-1]), complex(wc.l2[-1])


# -------------------------
# Matrici di modo
# -------------------------
@dataclass(frozen=True)
class ModeMatrix:
    degree: int
    A: np.ndarray  # su (psi lungo grad x nu, phi lungo grad)
    B: np.ndarray  # su (psi lungo grad, phi lungo grad x nu)


def _blocks(cfg: MediumConfig, wm: WaveCoefficients, wc: WaveCoefficients) -> tuple[np.ndarray, np.ndarray]:
    mu_c, mu_m = cfg.mu_c, cfg.mu_m
    kc2, km2 = cfg.k_c**2, cfg.k_m**2
    half = (mu_c + mu_m) / 2
    half_k = kc2 / (2 * mu_c) + km2 / (2 * mu_m)
    n = wm.n_max
    A = np.empty((n, 2, 2), dtype=complex)
    B = np.empty((n, 2, 2), dtype=complex)
    A[:, 0, 0] = half + mu_c * wc.m1 - mu_m * wm.m1
    A[:, 0, 1] = wc.l2 - wm.l2
    A[:, 1, 0] = wc.l1 - wm.l1
    A[:, 1, 1] = half_k + (kc2 / mu_c) * wc.m2 - (km2 / mu_m) * wm.m2
    B[:, 0, 0] = half + mu_c * wc.m2 - mu_m * wm.m2
    B[:, 0, 1] = wc.l1 - wm.l1
    B[:, 1, 0] = wc.l2 - wm.l2
    B[:, 1, 1] = half_k + (kc2 / mu_c) * wc.m1 - (km2 / mu_m) * wm.m1
    return A, B


def mode_matrices(cfg: MediumConfig, n: int) -> ModeMatrix:
    if n < 1:
        raise ValueError("mode_matrices richiede n >= 1")
    A, B = _blocks(cfg, wave_coefficients(cfg.k_m, cfg.R, n), wave_coefficients(cfg.k_c, cfg.R, n))
    return ModeMatrix(degree=n, A=A[-1], B=B[-1])


@dataclass(frozen=True)
class PairEigen:
    tau: np.ndarray       # (n, 2) -> (meno, piu')
    vectors: np.ndarray   # (n, 2, 2) -> [etichetta, (v_psi, v_phi)]
    defective: np.ndarray
    residual: np.ndarray  # (n, 2)
    disc: np.ndarray


def _normalize(v: np.ndarray) -> np.ndarray:
    # v_phi = 1 quando possibile (alpha = v_psi), altrimenti (1, 0)
    out = np.empty_like(v)
    norm = np.linalg.norm(v, axis=-1)
    small = np.abs(v[..., 1]) <= 1e-14 * np.maximum(norm, 1e-300)
    safe = np.where(small, 1.0, v[..., 1])
    out[..., 0] = np.where(small, 1.0, v[..., 0] / safe)
    out[..., 1] = np.where(small, 0.0, 1.0)
    return out


def eigen_pairs(M: np.ndarray) -> PairEigen:
    """Autocoppie di un lotto di matrici 2x2 (forma chiusa, etichette meno/piu')."""
    a, b, c, d = M[:, 0, 0], M[:, 0, 1], M[:, 1, 0], M[:, 1, 1]
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4 * det
    s = np.sqrt(disc)
    tau = np.stack([(tr - s) / 2, (tr + s) / 2], axis=-1)

    scale = np.maximum(np.abs(M).reshape(M.shape[0], -1).max(axis=1), 1e-300)
    vecs = np.empty((M.shape[0], 2, 2), dtype=complex)
    for lab in range(2):
        t = tau[:, lab]
        u = np.stack([b, t - a], axis=-1)
        w = np.stack([t - d, c], axis=-1)
        pick_u = np.linalg.norm(u, axis=-1) >= np.linalg.norm(w, axis=-1)
        v = np.where(pick_u[:, None], u, w)
        # matrice scalare: qualunque vettore va bene, si usano e1/e2
        flat = np.linalg.norm(v, axis=-1) <= 1e-13 * scale
        basis = np.array([1.0, 0.0] if lab == 0 else [0.0, 1.0], dtype=complex)
        v = np.where(flat[:, None], basis[None, :], v)
        vecs[:, lab] = _normalize(v)

    off = np.abs(b) + np.abs(c) + np.abs(a - d)
    defective = (np.abs(s) <= Numerics.DEGENERATE_TOL * np.maximum(1.0, np.abs(tr))) & (off > Numerics.DEGENERATE_TOL * scale)

    res = np.empty((M.shape[0], 2))
    for lab in range(2):
        v = vecs[:, lab]
        r = np.einsum("nij,nj->ni", M, v) - tau[:, lab, None] * v
        res[:, lab] = np.linalg.norm(r, axis=-1) / np.linalg.norm(v, axis=-1)
    return PairEigen(tau=tau, vectors=vecs, defective=defective, residual=res, disc=disc)


# -------------------------
# Forme chiuse stampate (controllo incrociato)
# -------------------------
def _closed_form_block(cfg, wm, wc, M, swap: bool, variant: str):
    mu_c, mu_m = cfg.mu_c, cfg.mu_m
    kc2, km2 = cfg.k_c**2, cfg.k_m**2
    mA_c, mA_m = (wc.m2, wm.m2) if swap else (wc.m1, wm.m1)   # fattore mu
    mB_c, mB_m = (wc.m1, wm.m1) if swap else (wc.m2, wm.m2)   # fattore k^2
    x = km2 * (2 * mB_m - 1) * mu_c + mu_m * (
        mu_c * (mu_c + 2 * mA_c * mu_c + mu_m - 2 * mA_m * mu_m) - kc2 * (2 * mB_c + 1)
    )
    # la discriminante stampata omette il termine mu_c mu_m^2 presente al numeratore
    x_beta = x - mu_c * mu_m**2 if variant == "printed" else x
    beta = 16 * M[:, 1, 0] * M[:, 0, 1] * mu_c**2 * mu_m**2 + x_beta**2
    root = np.sqrt(beta)
    den = 4 * M[:, 1, 0] * mu_c * mu_m
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha_plus = (x + root) / den
        alpha_minus = (x - root) / den
    tau_plus = alpha_plus * M[:, 1, 0] + M[:, 1, 1]
    tau_minus = alpha_minus * M[:, 1, 0] + M[:, 1, 1]
    return beta, np.stack([alpha_plus, alpha_minus], -1), np.stack([tau_plus, tau_minus], -1)


@dataclass(frozen=True)
class ClosedFormTau:
    """Radici nell'ordine stampato: (+sqrt beta1, -sqrt beta1, +sqrt beta2, -sqrt beta2)."""
    variant: str
    alpha: np.ndarray
    tau: np.ndarray
    beta: np.ndarray


def tau_closed_form(cfg: MediumConfig, n: int, variant: str = "consistent") -> ClosedFormTau:
    if variant not in ("printed", "consistent"):
        raise ValueError(f"variante sconosciuta: {variant}")
    wm = wave_coefficients(cfg.k_m, cfg.R, n)
    wc = wave_coefficients(cfg.k_c, cfg.R, n)
    A, B = _blocks(cfg, wm, wc)
    b1, a12, t12 = _closed_form_block(cfg, wm, wc, A, swap=False, variant=variant)
    b2, a34, t34 = _closed_form_block(cfg, wm, wc, B, swap=True, variant=variant)
    return ClosedFormTau(
        variant=variant,
        alpha=np.concatenate([a12[-1], a34[-1]]),
        tau=np.concatenate([t12[-1], t34[-1]]),
        beta=np.array([b1[-1], b2[-1]]),
    )


def pair_discrepancy(exact: np.ndarray, other: np.ndarray) -> float:
    """Scarto relativo massimo tra due coppie di autovalori, minimizzato sull'abbinamento."""
    scale = max(np.max(np.abs(exact)), 1e-300)
    direct = np.max(np.abs(exact - other))
    swapped = np.max(np.abs(exact - other[::-1]))
    val = min(direct, swapped) / scale
    return float(val) if np.isfinite(val) else float("inf")


# -------------------------
# Asintotica di ordine elevato
# -------------------------
def tau_asymptotic(cfg: MediumConfig, n: int, tau2_variant: str = "minus") -> np.ndarray:
    eps_c, eps_m, mu_c, mu_m = cfg.eps_c, cfg.eps_m, cfg.mu_c, cfg.mu_m
    w2 = cfg.omega**2
    ratio = (4 * n * n + 4 * n + 3) / (4 * n * n + 4 * n - 3)
    corr_minus = 4 * (eps_c * mu_c - eps_m * mu_m) ** 2 * ratio * w2**2 * cfg.R**2
    corr_plus = 4 * (eps_c * mu_c + eps_m * mu_m) ** 2 * ratio * w2**2 * cfg.R**2
    corr2 = corr_minus if tau2_variant == "minus" else corr_plus

    s_a = (n + 1) * mu_c + n * mu_m + ((n + 1) * eps_m + n * eps_c) * w2
    d_a = (n + 1) * mu_c + n * mu_m - ((n + 1) * eps_m + n * eps_c) * w2
    s_b = (n + 1) * mu_m + n * mu_c + ((n + 1) * eps_c + n * eps_m) * w2
    d_b = (n + 1) * mu_m + n * mu_c - ((n + 1) * eps_c + n * eps_m) * w2
    den = 2 * (2 * n + 1)
    return np.array(
        [
            (s_a - np.sqrt(d_a**2 - corr_minus)) / den,
            (s_a + np.sqrt(d_a**2 - corr2)) / den,
            (s_b - np.sqrt(d_b**2 - corr_minus)) / den,
            (s_b + np.sqrt(d_b**2 - corr_minus)) / den,
        ],
        dtype=complex,
    )


# -------------------------
# Record e tabella
# -------------------------
@dataclass(frozen=True)
class WaveSpectrum:
    k: complex
    lam: complex
    chi: complex
    pi: tuple
    sigma: tuple
    m1: complex
    m2: complex
    l1: complex
    l2: complex


@dataclass(frozen=True)
class SpectrumRecord:
    degree: int
    medium: WaveSpectrum     # a k_m
    core: WaveSpectrum       # a k_c
    tau: np.ndarray          # (4,)
    alpha: np.ndarray        # (4,) v_psi/v_phi, inf se v_phi = 0
    vectors: np.ndarray      # (4, 2)
    beta: np.ndarray         # (2,)
    tau_asym: np.ndarray     # (4,)
    admissible: bool
    defective: tuple[bool, bool]
    eigen_residual: float
    closed_form_discrepancy: dict = field(default_factory=dict)


def _wave_spectrum(w: WaveCoefficients, i: int) -> WaveSpectrum:
    n = i + 1
    return WaveSpectrum(
        k=w.k, lam=complex(w.lam_all[n]), chi=complex(w.chi_all[n]),
        pi=tuple(complex(v) for v in w.pi[:, i]), sigma=tuple(complex(v) for v in w.sigma[:, i]),
        m1=complex(w.m1[i]), m2=complex(w.m2[i]), l1=complex(w.l1[i]), l2=complex(w.l2[i]),
    )


def _alpha(vectors: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(vectors[..., 1] == 0, complex(np.inf, 0.0), vectors[..., 0] / np.where(vectors[..., 1] == 0, 1.0, vectors[..., 1]))


@dataclass(frozen=True)
class SpectrumTable:
    config: MediumConfig
    n_max: int
    records: list[SpectrumRecord]
    tau: np.ndarray       # (n_max + 1, 4), riga 0 inutilizzata
    vectors: np.ndarray   # (n_max + 1, 4, 2)
    defective: np.ndarray  # (n_max + 1, 4)
    admissible: np.ndarray  # (n_max + 1,)

    def record(self, n: int) -> SpectrumRecord:
        return self.records[n - 1]

    def to_frame(self) -> pl.DataFrame:
        cols: dict[str, list] = {"n": [r.degree for r in self.records]}
        for i in range(4):
            cols[f"re_tau{i + 1}"] = [float(r.tau[i].real) for r in self.records]
            cols[f"im_tau{i + 1}"] = [float(r.tau[i].imag) for r in self.records]
        for i in range(4):
            cols[f"re_alpha{i + 1}"] = [float(r.alpha[i].real) for r in self.records]
            cols[f"im_alpha{i + 1}"] = [float(np.nan_to_num(r.alpha[i].imag)) for r in self.records]
        cols["flag_admissible"] = [bool(r.admissible) for r in self.records]
        cols["flag_defective"] = [bool(any(r.defective)) for r in self.records]
        return pl.DataFrame(cols, schema_overrides={"n": pl.Int64})


def spectrum_table(cfg: MediumConfig, n_max: int = N_MAX, with_closed_form: bool = True) -> SpectrumTable:
    """Record per n = 1..n_max; ogni grado e' indipendente, calcolo vettoriale sui gradi."""
    if n_max < 1:
        raise ValueError("n_max deve essere >= 1")
    wm = wave_coefficients(cfg.k_m, cfg.R, n_max)
    wc = wave_coefficients(cfg.k_c, cfg.R, n_max)
    A, B = _blocks(cfg, wm, wc)
    ea, eb = eigen_pairs(A), eigen_pairs(B)

    if with_closed_form:
        cf = {}
        for variant in ("printed", "consistent"):
            _, _, t12 = _closed_form_block(cfg, wm, wc, A, swap=False, variant=variant)
            _, _, t34 = _closed_form_block(cfg, wm, wc, B, swap=True, variant=variant)
            cf[variant] = (t12, t34)
        beta1, _, _ = _closed_form_block(cfg, wm, wc, A, swap=False, variant="consistent")
        beta2, _, _ = _closed_form_block(cfg, wm, wc, B, swap=True, variant="consistent")
    else:
        beta1 = beta2 = np.full(n_max, np.nan + 0j)

    margin = np.minimum(wm.margin, wc.margin)
    tau = np.zeros((n_max + 1, 4), dtype=complex)
    vectors = np.zeros((n_max + 1, 4, 2), dtype=complex)
    defective = np.zeros((n_max + 1, 4), dtype=bool)
    admissible = np.ones(n_max + 1, dtype=bool)

    records = []
    for i in range(n_max):
        n = i + 1
        t = np.concatenate([ea.tau[i], eb.tau[i]])
        v = np.concatenate([ea.vectors[i], eb.vectors[i]])
        adm = bool(np.all(margin[max(0, n - 1) : n + 1] > Numerics.DEGENERATE_TOL))
        discrepancy = {}
        if with_closed_form:
            for variant, (t12, t34) in cf.items():
                discrepancy[variant] = max(pair_discrepancy(ea.tau[i], t12[i]), pair_discrepancy(eb.tau[i], t34[i]))
        tau[n], vectors[n] = t, v
        defective[n] = [ea.defective[i], ea.defective[i], eb.defective[i], eb.defective[i]]
        admissible[n] = adm
        records.append(
            SpectrumRecord(
                degree=n,
                medium=_wave_spectrum(wm, i),
                core=_wave_spectrum(wc, i),
                tau=t,
                alpha=_alpha(v),
                vectors=v,
                beta=np.array([beta1[i], beta2[i]]),
                tau_asym=tau_asymptotic(cfg, n),
                admissible=adm,
                defective=(bool(ea.defective[i]), bool(eb.defective[i])),
                eigen_residual=float(max(ea.residual[i].max(), eb.residual[i].max())),
                closed_form_discrepancy=discrepancy,
            )
        )
    logger.info(f"spettro calcolato: n_max={n_max}, config={cfg.fingerprint()}")
    return SpectrumTable(config=cfg, n_max=n_max, records=records, tau=tau, vectors=vectors,
                         defective=defective, admissible=admissible)


@dataclass(frozen=True)
class TauResult:
    tau: np.ndarray
    alpha: np.ndarray
    vectors: np.ndarray
    beta: np.ndarray
    defective: tuple[bool, bool]
    eigen_residual: float
    closed_form_discrepancy: dict


def tau_exact(cfg: MediumConfig, n: int, strict: bool = False) -> TauResult:
    """Autovalori delle matrici di modo (autorevoli) con lo scarto rispetto alle forme stampate."""
    if n < 1:
        raise ValueError("tau_exact richiede n >= 1")
    rec = spectrum_table(cfg, n).record(n)
    if strict and any(rec.defective):
        raise DegenerateEigenpair(f"autovalore doppio difettivo al grado {n}", rec.beta.tolist())
    return TauResult(
        tau=rec.tau, alpha=rec.alpha, vectors=rec.vectors, beta=rec.beta,
        defective=rec.defective, eigen_residual=rec.eigen_residual,
        closed_form_discrepancy=rec.closed_form_discrepancy,
    )


def assert_admissible(cfg: MediumConfig, n_max: int) -> SpectrumTable:
    """Tabella spettrale o InadmissibleConfig (codice di uscita 2 della CLI)."""
    try:
        table = spectrum_table(cfg, n_max)
    except AdmissibilityViolation as exc:
        raise InadmissibleConfig(str(exc)) from exc
    if not bool(np.all(table.admissible[1:])):
        bad = [int(n) for n in np.nonzero(~table.admissible[1:])[0] + 1]
        raise InadmissibleConfig("condizione j_m(kR) != j_{m+2}(kR) violata", bad)
    return table

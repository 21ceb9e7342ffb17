"""Campi incidenti, coefficienti di traccia, soluzione spettrale e campi di strato.

Struttura delle autofunzioni Xi:
- canali 1/2: psi lungo grad_S Y x nu, phi lungo grad_S Y (blocco A);
- canali 3/4: psi lungo grad_S Y, phi lungo grad_S Y x nu (blocco B).
Le coppie di coefficienti (v_psi, v_phi) vengono dalla SpectrumTable.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
import polars as pl
from prefect.logging import get_logger

from plasmon.errors import (
    DefectiveMode,
    ExtrapolationUnstable,
    NearSingularMode,
    TooCloseToSurface,
    TraceOnlySource,
)
from plasmon.tasks.harmonics import (
    HarmonicIndex,
    SphereQuadrature,
    legendre_tables,
    near_surface_order,
    project_tangential,
    spherical_frame,
    synthesize_tangential,
)
from plasmon.tasks.potentials import layer_fields
from plasmon.tasks.specfun import radial_table
from plasmon.tasks.spectrum import MediumConfig, SpectrumTable, spectrum_table
from plasmon.utils import DELTA_MIN, QUAD_PAD, THREADS, Numerics

logger = get_logger("plasmon.scattering")

# offset (in unita' di delta) per l'estrapolazione verso la superficie
TRANSMISSION_OFFSETS = (2.5, 2.0, 1.5, 1.25, 1.0)
EXTRAPOLATION_TOL = 1e-2


# -------------------------
# Campo incidente
# -------------------------
@dataclass(frozen=True)
class IncidentField:
    kind: str
    amplitude: np.ndarray | complex = 1.0
    direction: np.ndarray | None = None
    channel: int | None = None
    index: HarmonicIndex | None = None

    @classmethod
    def plane_wave(cls, amplitude, direction) -> "IncidentField":
        amp = np.asarray(amplitude, dtype=complex).reshape(3)
        d = np.asarray(direction, dtype=float).reshape(3)
        d = d / np.linalg.norm(d)
        if abs(np.dot(amp, d)) > 1e-12 * max(1.0, float(np.linalg.norm(amp))):
            raise ValueError(f"ampiezza non ortogonale alla direzione (value={np.dot(amp, d)})")
        return cls(kind="plane_wave", amplitude=amp, direction=d)

    @classmethod
    def spectral_multipole(cls, channel: int, index: HarmonicIndex, amplitude: complex = 1.0) -> "IncidentField":
        if channel not in (1, 2, 3, 4):
            raise ValueError(f"canale non valido (value={channel})")
        if index.degree < 1:
            raise ValueError(f"grado non valido per un multipolo (value={index.degree})")
        return cls(kind="spectral_multipole", amplitude=complex(amplitude), channel=channel, index=index)

    @classmethod
    def closed_form_vortex(cls, amplitude: float = 100.0) -> "IncidentField":
        return cls(kind="closed_form_vortex", amplitude=complex(amplitude))

    @property
    def evaluable(self) -> bool:
        return self.kind != "spectral_multipole"

    def describe(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "plane_wave":
            out["amplitude"] = [[v.real, v.imag] for v in self.amplitude]
            out["direction"] = self.direction.tolist()
        elif self.kind == "spectral_multipole":
            out.update(channel=self.channel, n=self.index.degree, m=self.index.order,
                       amplitude=[self.amplitude.real, self.amplitude.imag])
        else:
            out["amplitude"] = [self.amplitude.real, self.amplitude.imag]
        return out


def _vortex_profile(r: np.ndarray, k: complex, amp: complex, omega: float) -> tuple[np.ndarray, np.ndarray]:
    """u(r) = (amp/omega) j_1(kr)/r e la sua derivata; limite rimovibile u(0) = amp k / (3 omega)."""
    u = np.full(r.shape, amp * k / (3.0 * omega), dtype=complex)
    du = np.zeros(r.shape, dtype=complex)
    ok = r >= 1e-10
    if np.any(ok):
        rr = r[ok]
        tab = radial_table(1, k * rr)
        j1, j1p = tab.j[1], tab.j_prime[1]
        u[ok] = (amp / omega) * j1 / rr
        du[ok] = (amp / omega) * (k * j1p / rr - j1 / rr**2)
    return u, du


def incident_fields(f: IncidentField, X, cfg: MediumConfig) -> tuple[np.ndarray, np.ndarray]:
    """E^i, H^i nei punti X (P, 3)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    k, omega, mu = cfg.k_m, cfg.omega, cfg.mu_m
    if f.kind == "spectral_multipole":
        raise TraceOnlySource("il multipolo spettrale e' definito solo come traccia", f.describe())
    if f.kind == "plane_wave":
        phase = np.exp(1j * k * (X @ f.direction))
        E = phase[:, None] * f.amplitude[None, :]
        H = (k / (omega * mu)) * np.cross(f.direction[None, :], E)
        return E, H
    if f.kind == "closed_form_vortex":
        r = np.linalg.norm(X, axis=1)
        u, du = _vortex_profile(r, k, f.amplitude, omega)
        x, y, z = X[:, 0], X[:, 1], X[:, 2]
        E = np.stack([u * y, -u * x, np.zeros_like(u)], axis=-1)
        safe_r = np.where(r > 0, r, 1.0)
        g = du / safe_r
        curl = np.stack([g * z * x, g * z * y, g * z * z - (du * r + 2.0 * u)], axis=-1)
        return E, curl / (1j * omega * mu)
    raise ValueError(f"tipo di campo sconosciuto (value={f.kind})")


def incident_eval(f: IncidentField, x, cfg: MediumConfig) -> tuple[np.ndarray, np.ndarray]:
    E, H = incident_fields(f, np.asarray(x, dtype=float).reshape(1, 3), cfg)
    return E[0], H[0]


# -------------------------
# Coefficienti di sorgente
# -------------------------
@dataclass(frozen=True)
class SourceCoefficients:
    n_max: int
    coeffs: np.ndarray   # (4, n_max + 1, 2 n_max + 1)
    residual: float = 0.0

    def __getitem__(self, key: tuple[int, HarmonicIndex]) -> complex:
        channel, idx = key
        return complex(self.coeffs[channel - 1, idx.degree, idx.order + self.n_max])

    @classmethod
    def zeros(cls, n_max: int) -> "SourceCoefficients":
        return cls(n_max=n_max, coeffs=np.zeros((4, n_max + 1, 2 * n_max + 1), dtype=complex))

    def nonzero(self, rel: float = 0.0) -> list[tuple[int, HarmonicIndex]]:
        mag = np.abs(self.coeffs)
        cut = rel * mag.max() if mag.size and mag.max() > 0 else 0.0
        out = []
        for c, n, mi in zip(*np.nonzero(mag > cut)):
            out.append((int(c) + 1, HarmonicIndex(int(n), int(mi) - self.n_max)))
        return out


def _solve_pairs(vectors: np.ndarray, c_a: np.ndarray, c_b: np.ndarray, channels: tuple[int, int], degree: int) -> tuple[np.ndarray, np.ndarray]:
    """V f = c con colonne v_i = (v_psi, v_phi) per gli m del grado."""
    (p1, q1), (p2, q2) = vectors
    det = p1 * q2 - p2 * q1
    scale = max(abs(p1) + abs(q1), 1e-300) * max(abs(p2) + abs(q2), 1e-300)
    energy = float(np.max(np.abs(c_a)) + np.max(np.abs(c_b))) if c_a.size else 0.0
    if abs(det) <= Numerics.DEGENERATE_TOL * scale:
        if energy > 0:
            raise DefectiveMode(f"autovettori paralleli ai canali {channels}, grado {degree}", energy)
        return np.zeros_like(c_a), np.zeros_like(c_a)
    f1 = (c_a * q2 - c_b * p2) / det
    f2 = (p1 * c_b - q1 * c_a) / det
    return f1, f2


def coefficients_from_traces(proj_psi, proj_phi, spectrum: SpectrumTable, n_max: int, residual: float = 0.0) -> SourceCoefficients:
    coeffs = np.zeros((4, n_max + 1, 2 * n_max + 1), dtype=complex)
    for n in range(1, n_max + 1):
        v = spectrum.vectors[n]
        # canali 1/2: (psi su grad x nu, phi su grad); canali 3/4: (psi su grad, phi su grad x nu)
        coeffs[0, n], coeffs[1, n] = _solve_pairs(v[0:2], proj_psi.c_cross[n], proj_phi.c_grad[n], (1, 2), n)
        coeffs[2, n], coeffs[3, n] = _solve_pairs(v[2:4], proj_psi.c_grad[n], proj_phi.c_cross[n], (3, 4), n)
    return SourceCoefficients(n_max=n_max, coeffs=coeffs, residual=residual)


def trace_quadrature(cfg: MediumConfig, n_max: int, n_theta: int | None = None) -> SphereQuadrature:
    if n_theta is not None:
        return SphereQuadrature.build(max(n_theta, n_max + 1), cfg.R)
    # ordine sufficiente a integrare esattamente anche la coda oltre n_max
    n_theta = max(n_max, int(math.ceil(abs(cfg.k_m) * cfg.R)) + 24) + QUAD_PAD
    return SphereQuadrature.build(n_theta, cfg.R)


def incident_trace_coeffs(
    f: IncidentField,
    cfg: MediumConfig,
    n_max: int,
    spectrum: SpectrumTable | None = None,
    quad_order: int | None = None,
) -> SourceCoefficients:
    if f.kind == "spectral_multipole":
        if f.index.degree > n_max:
            raise ValueError(f"grado del multipolo oltre n_max (value={f.index.degree})")
        src = SourceCoefficients.zeros(n_max)
        src.coeffs[f.channel - 1, f.index.degree, f.index.order + n_max] = f.amplitude
        return src

    spectrum = spectrum if spectrum is not None else spectrum_table(cfg, n_max)
    quad = trace_quadrature(cfg, n_max, quad_order)
    nu = quad.nodes
    E, H = incident_fields(f, quad.points, cfg)
    F_psi = np.cross(nu, E)
    F_phi = 1j * cfg.omega * np.cross(nu, H)
    proj_psi = project_tangential(F_psi, quad, n_max)
    proj_phi = project_tangential(F_phi, quad, n_max)
    residual = max(proj_psi.residual, proj_phi.residual)
    logger.info(f"coefficienti di traccia: kind={f.kind}, n_max={n_max}, residuo={residual:.3e}")
    return coefficients_from_traces(proj_psi, proj_phi, spectrum, n_max, residual)


# -------------------------
# Soluzione spettrale
# -------------------------
@dataclass(frozen=True)
class DensitySolution:
    n_max: int
    coeffs: np.ndarray        # f / tau, stessa forma di SourceCoefficients.coeffs
    spectrum: SpectrumTable = field(repr=False)
    min_tau: float = math.inf
    max_coeff: float = 0.0
    amplification: float = 0.0

    def __getitem__(self, key: tuple[int, HarmonicIndex]) -> complex:
        channel, idx = key
        return complex(self.coeffs[channel - 1, idx.degree, idx.order + self.n_max])

    @property
    def config(self) -> MediumConfig:
        return self.spectrum.config

    def tangential(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(psi_grad, psi_cross, phi_grad, phi_cross) su [n, m + n_max]."""
        v = self.spectrum.vectors[: self.n_max + 1]   # (n, 4, 2)
        d = self.coeffs
        psi_cross = d[0] * v[:, 0, 0, None] + d[1] * v[:, 1, 0, None]
        phi_grad = d[0] * v[:, 0, 1, None] + d[1] * v[:, 1, 1, None]
        psi_grad = d[2] * v[:, 2, 0, None] + d[3] * v[:, 3, 0, None]
        phi_cross = d[2] * v[:, 2, 1, None] + d[3] * v[:, 3, 1, None]
        return psi_grad, psi_cross, phi_grad, phi_cross

    def effective_degree(self) -> int:
        mag = np.abs(self.coeffs)
        top = mag.max() if mag.size else 0.0
        if top == 0:
            return 0
        alive = np.nonzero((mag > 1e-14 * top).any(axis=(0, 2)))[0]
        return int(alive.max()) if alive.size else 0

    def zero_channel(self, channel: int) -> "DensitySolution":
        coeffs = self.coeffs.copy()
        coeffs[channel - 1] = 0.0
        return DensitySolution(self.n_max, coeffs, self.spectrum, self.min_tau, self.max_coeff, self.amplification)


def solve_densities(src: SourceCoefficients, spectrum: SpectrumTable) -> DensitySolution:
    if spectrum.n_max < src.n_max:
        raise ValueError(f"tabella spettrale troppo corta (value={spectrum.n_max})")
    tau = spectrum.tau[: src.n_max + 1].T[:, :, None]          # (4, n, 1)
    defective = spectrum.defective[: src.n_max + 1].T[:, :, None]
    live = src.coeffs != 0
    if np.any(live & defective):
        c, n, _ = (int(v[0]) for v in np.nonzero(live & defective))
        raise DefectiveMode(f"modo difettivo con sorgente non nulla: canale {c + 1}, grado {n}")

    small = live & (np.abs(tau) < Numerics.SINGULAR_TAU)
    if np.any(small):
        c, n, mi = (int(v[0]) for v in np.nonzero(small))
        mode = (c + 1, n, mi - src.n_max)
        raise NearSingularMode("|tau| sotto la soglia di singolarita'", mode=mode, value=abs(spectrum.tau[n, c]))

    coeffs = np.zeros_like(src.coeffs)
    with np.errstate(divide="ignore", invalid="ignore"):
        np.divide(src.coeffs, np.broadcast_to(tau, src.coeffs.shape), out=coeffs, where=live)

    if np.any(live):
        min_tau = float(np.min(np.abs(np.broadcast_to(tau, live.shape)[live])))
        max_coeff = float(np.max(np.abs(coeffs)))
        amplification = max_coeff / float(np.max(np.abs(src.coeffs)))
    else:
        min_tau, max_coeff, amplification = math.inf, 0.0, 0.0
    return DensitySolution(n_max=src.n_max, coeffs=coeffs, spectrum=spectrum,
                           min_tau=min_tau, max_coeff=max_coeff, amplification=amplification)


# -------------------------
# Valutazione dei campi di strato
# -------------------------
class _DensityOnNodes:
    """Densita' psi, phi sintetizzate sulle quadrature richieste (cache per ordine)."""

    def __init__(self, density: DensitySolution):
        self.density = density
        self.n_dens = max(density.effective_degree(), 1)
        N, nd = density.n_max, self.n_dens
        cols = slice(N - nd, N + nd + 1) if N >= nd else slice(None)
        self._parts = [p[: nd + 1, cols] for p in density.tangential()]
        self._cache: dict[int, tuple[SphereQuadrature, np.ndarray, np.ndarray]] = {}

    def at_order(self, n_theta: int):
        if n_theta not in self._cache:
            quad = SphereQuadrature.build(n_theta, self.density.config.R)
            psi_g, psi_c, phi_g, phi_c = self._parts
            psi = synthesize_tangential(psi_g, psi_c, quad)
            phi = synthesize_tangential(phi_g, phi_c, quad)
            self._cache[n_theta] = (quad, psi, phi)
        return self._cache[n_theta]


def _region_params(cfg: MediumConfig, region: str) -> tuple[complex, complex]:
    return (cfg.k_m, cfg.mu_m) if region == "exterior" else (cfg.k_c, cfg.mu_c)


def _band_orders(rel_dist: np.ndarray, n_dens: int, kR: float, delta_min: float = DELTA_MIN) -> np.ndarray:
    # fasce geometriche di distanza dalla superficie, ciascuna con il proprio ordine
    band = np.floor(np.log2(np.maximum(rel_dist, delta_min) / delta_min)).astype(int)
    band = np.minimum(band, 8)
    orders = np.empty(rel_dist.shape, dtype=int)
    for b in np.unique(band):
        orders[band == b] = near_surface_order(n_dens, delta_min * 2.0**b, kR)
    return orders


def layer_fields_at(
    density: DensitySolution,
    X,
    region: str,
    threads: int = THREADS,
    nodes: _DensityOnNodes | None = None,
    delta_min: float = DELTA_MIN,
) -> tuple[np.ndarray, np.ndarray]:
    """Parte di potenziale di strato (E, H) in punti tutti nella stessa regione."""
    cfg = density.config
    X = np.atleast_2d(np.asarray(X, dtype=float))
    E = np.zeros((X.shape[0], 3), dtype=complex)
    H = np.zeros((X.shape[0], 3), dtype=complex)
    if X.shape[0] == 0 or not np.any(density.coeffs):
        return E, H
    rel = np.abs(np.linalg.norm(X, axis=1) - cfg.R) / cfg.R
    if np.any(rel < delta_min - 1e-15):
        raise TooCloseToSurface("punto nella fascia esclusa attorno alla superficie", float(rel.min()))

    nodes = nodes or _DensityOnNodes(density)
    k, mu = _region_params(cfg, region)
    orders = _band_orders(rel, nodes.n_dens, abs(k) * cfg.R, delta_min)
    for order in np.unique(orders):
        sel = orders == order
        quad, psi, phi = nodes.at_order(int(order))
        E[sel], H[sel] = layer_fields(X[sel], quad.points, quad.weights, psi, phi, k, mu, cfg.omega, threads)
    return E, H


def _region_of(X: np.ndarray, R: float, delta_min: float = DELTA_MIN) -> np.ndarray:
    r = np.linalg.norm(X, axis=1)
    out = np.where(r > R, "exterior", "interior").astype(object)
    out[np.abs(r - R) < delta_min * R] = "excluded"
    return out


def layer_field(density: DensitySolution, x, cfg: MediumConfig | None = None, delta_min: float = DELTA_MIN) -> tuple[np.ndarray, np.ndarray]:
    cfg = cfg or density.config
    X = np.asarray(x, dtype=float).reshape(1, 3)
    region = _region_of(X, cfg.R, delta_min)[0]
    if region == "excluded":
        raise TooCloseToSurface("punto nella fascia esclusa attorno alla superficie",
                                float(abs(np.linalg.norm(X) - cfg.R) / cfg.R))
    E, H = layer_fields_at(density, X, region, delta_min=delta_min)
    return E[0], H[0]


# -------------------------
# Forma chiusa (teorema di addizione)
# -------------------------
def _closed_form_coeffs(density: DensitySolution, region: str) -> tuple[np.ndarray, np.ndarray, complex, complex, np.ndarray]:
    cfg = density.config
    k, mu = _region_params(cfg, region)
    N, R = density.n_max, cfg.R
    tab = radial_table(N, k * R)
    # fuori: fattori j(kR), radiale h(kr); dentro il contrario
    f_R = tab.j if region == "exterior" else tab.h1
    fp_R = tab.j_prime if region == "exterior" else tab.h1_prime
    d_R = f_R + k * R * fp_R  # (z f)' in z = kR
    psi_g, psi_c, phi_g, phi_c = density.tangential()
    a_M = -1j * k * (mu * d_R[:, None] * psi_g + k * k * R * f_R[:, None] * phi_c)
    a_N = -1j * k * (mu * k * R * f_R[:, None] * psi_c + k * d_R[:, None] * phi_g)
    return a_M, a_N, k, mu, np.arange(N + 1)


def layer_field_closed_form(
    density: DensitySolution,
    X,
    region: str | None = None,
    chunk: int = 512,
    delta_min: float = DELTA_MIN,
) -> tuple[np.ndarray, np.ndarray]:
    """Campi di strato come serie di multipoli di Hansen M_n, N_n (nessuna quadratura).

    Vale per r != R; dentro serve r > 0.
    """
    cfg = density.config
    X = np.atleast_2d(np.asarray(X, dtype=float))
    regions = _region_of(X, cfg.R, delta_min) if region is None else np.full(X.shape[0], region, dtype=object)
    E = np.zeros((X.shape[0], 3), dtype=complex)
    H = np.zeros((X.shape[0], 3), dtype=complex)
    N = density.n_max
    m = np.arange(-N, N + 1)
    for reg in ("exterior", "interior"):
        idx = np.nonzero(regions == reg)[0]
        if idx.size == 0:
            continue
        a_M, a_N, k, mu, n = _closed_form_coeffs(density, reg)
        b_M = k * a_N / (1j * cfg.omega * mu)
        b_N = k * a_M / (1j * cfg.omega * mu)
        nn1 = (n * (n + 1))[:, None]
        for start in range(0, idx.size, chunk):
            sel = idx[start : start + chunk]
            fr = spherical_frame(X[sel])
            z = k * fr["r"]
            rt = radial_table(N, z)
            f = rt.h1 if reg == "exterior" else rt.j
            fp = rt.h1_prime if reg == "exterior" else rt.j_prime
            g = (f + z * fp) / z
            leg = legendre_tables(N, fr["theta"])
            e = np.exp(1j * np.outer(m, fr["phi"]))   # (2N+1, P)
            Pe, dPe, Qe = leg.P * e, leg.dP * e, leg.Q * e
            for a, b, out in ((a_M, a_N, E), (b_M, b_N, H)):
                comp_r = np.einsum("nm,np,nmp->p", b * nn1, f / z, Pe)
                comp_t = np.einsum("nm,np,nmp->p", 1j * a, f, Qe) + np.einsum("nm,np,nmp->p", b, g, dPe)
                comp_p = np.einsum("nm,np,nmp->p", -a, f, dPe) + np.einsum("nm,np,nmp->p", 1j * b, g, Qe)
                out[sel] = comp_r[:, None] * fr["rhat"] + comp_t[:, None] * fr["that"] + comp_p[:, None] * fr["phat"]
    return E, H


# -------------------------
# Griglia di campo completa
# -------------------------
@dataclass(frozen=True)
class FieldGrid:
    points: np.ndarray
    region: np.ndarray
    E: np.ndarray
    H: np.ndarray | None
    metadata: dict
    excluded: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    def to_frame(self, with_h: bool = True) -> pl.DataFrame:
        cols = {
            "x": self.points[:, 0], "y": self.points[:, 1], "z": self.points[:, 2],
            "region": [str(r) for r in self.region],
        }
        comps = [("E", self.E)] + ([("H", self.H)] if with_h and self.H is not None else [])
        for name, arr in comps:
            for i, ax in enumerate("xyz"):
                cols[f"re_{name}{ax}"] = arr[:, i].real
                cols[f"im_{name}{ax}"] = arr[:, i].imag
        return pl.DataFrame(cols)


def full_solution_grid(
    f: IncidentField,
    cfg: MediumConfig,
    grid,
    n_max: int,
    spectrum: SpectrumTable | None = None,
    threads: int = THREADS,
    density: DensitySolution | None = None,
    delta_min: float = DELTA_MIN,
) -> FieldGrid:
    """E totale fuori (incidente + strato), E di strato dentro; la fascia |r-R| < delta_min R viene riportata."""
    X = np.atleast_2d(np.asarray(grid, dtype=float))
    spectrum = spectrum if spectrum is not None else spectrum_table(cfg, n_max)
    if density is None:
        density = solve_densities(incident_trace_coeffs(f, cfg, n_max, spectrum), spectrum)

    region = _region_of(X, cfg.R, delta_min)
    keep = region != "excluded"
    pts, reg = X[keep], region[keep]
    E = np.zeros((pts.shape[0], 3), dtype=complex)
    H = np.zeros((pts.shape[0], 3), dtype=complex)
    nodes = _DensityOnNodes(density)
    for name in ("exterior", "interior"):
        sel = reg == name
        if np.any(sel):
            E[sel], H[sel] = layer_fields_at(density, pts[sel], name, threads, nodes, delta_min)
    ext = reg == "exterior"
    if f.evaluable and np.any(ext):
        Ei, Hi = incident_fields(f, pts[ext], cfg)
        E[ext] += Ei
        H[ext] += Hi

    excluded = X[~keep]
    if excluded.shape[0]:
        logger.warning(f"{excluded.shape[0]} punti nella fascia esclusa |r-R| < {delta_min}R scartati")
    metadata = {
        "config": cfg.as_dict(),
        "config_hash": cfg.fingerprint(),
        "n_max": n_max,
        "incident": f.describe(),
        "density_degree": nodes.n_dens,
        "quadrature_orders": sorted(nodes._cache),
        "excluded_points": int(excluded.shape[0]),
        "delta_min": delta_min,
        "amplification": density.amplification,
        "min_tau": density.min_tau,
    }
    return FieldGrid(points=pts, region=reg, E=E, H=H, metadata=metadata, excluded=excluded)


def scattering_ratio(f: IncidentField, cfg: MediumConfig, fg: FieldGrid, r_min: float = 0.0, r_max: float = math.inf) -> float | None:
    """max |E^s| / max |E^i| sui punti esterni con r_min <= r <= r_max; None se l'incidente non e' valutabile."""
    r = np.linalg.norm(fg.points, axis=1)
    sel = (fg.region == "exterior") & (r >= r_min) & (r <= r_max)
    if not f.evaluable or not np.any(sel):
        return None
    Ei, _ = incident_fields(f, fg.points[sel], cfg)
    top = float(np.max(np.linalg.norm(Ei, axis=1)))
    if top == 0:
        return None
    Es = fg.E[sel] - Ei
    return float(np.max(np.linalg.norm(Es, axis=1))) / top


_AXIS = re.compile(r"^([xyz])\[\s*([^,\]]+)\s*,\s*([^,\]]+)\s*,\s*(\d+)\s*\]$")
_FIXED = re.compile(r"^([xyz])\s*=\s*(.+)$")


def parse_grid_spec(spec: str) -> np.ndarray:
    """Griglia cartesiana da una stringa tipo "z=0:x[-3,3,121]:y[-3,3,121]"."""
    axes: dict[str, np.ndarray] = {}
    for part in spec.split(":"):
        part = part.strip()
        m_axis, m_fixed = _AXIS.match(part), _FIXED.match(part)
        if m_axis:
            ax, lo, hi, num = m_axis.groups()
            axes[ax] = np.linspace(float(lo), float(hi), int(num))
        elif m_fixed:
            axes[m_fixed.group(1)] = np.array([float(m_fixed.group(2))])
        else:
            raise ValueError(f"componente di griglia non valida (value={part!r})")
    missing = [ax for ax in "xyz" if ax not in axes]
    if missing:
        raise ValueError(f"assi mancanti nella griglia (value={missing})")
    gx, gy, gz = np.meshgrid(axes["x"], axes["y"], axes["z"], indexing="ij")
    return np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=-1)


# -------------------------
# Residui di controllo
# -------------------------
def check_directions() -> np.ndarray:
    theta = np.array([0.35, 0.9, 1.45, 2.1, 2.75])
    phi = np.array([0.2, 2.3, 4.4])
    t, p = np.meshgrid(theta, phi, indexing="ij")
    t, p = t.ravel(), p.ravel()
    return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)


def _lagrange_at_zero(ts: np.ndarray, values: np.ndarray) -> np.ndarray:
    out = np.zeros(values.shape[1:], dtype=complex)
    for i, ti in enumerate(ts):
        w = 1.0
        for j, tj in enumerate(ts):
            if j != i:
                w *= tj / (tj - ti)
        out = out + w * values[i]
    return out


def surface_limit(ts, values) -> tuple[np.ndarray, float]:
    """Estrapolazione polinomiale a t = 0 (ordine pieno) e scarto rispetto all'ordine inferiore."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values)
    full = _lagrange_at_zero(ts, values)
    order = np.argsort(ts)[: len(ts) - 1]
    lower = _lagrange_at_zero(ts[order], values[order])
    scale = max(float(np.max(np.abs(full))), 1e-300)
    return full, float(np.max(np.abs(full - lower)) / scale)


def _tangential(nu: np.ndarray, F: np.ndarray) -> np.ndarray:
    return np.cross(nu, F)


def transmission_residual(
    f: IncidentField,
    cfg: MediumConfig,
    n_max: int,
    delta: float = DELTA_MIN,
    density: DensitySolution | None = None,
    threads: int = THREADS,
) -> tuple[float, float]:
    """Salto relativo di nu x E e nu x H attraverso r = R, estrapolato dai due lati."""
    if delta < DELTA_MIN - 1e-15:
        raise TooCloseToSurface("delta sotto la fascia esclusa", delta)
    if not f.evaluable:
        raise TraceOnlySource("residuo di trasmissione richiede un campo incidente valutabile", f.describe())
    if density is None:
        spectrum = spectrum_table(cfg, n_max)
        density = solve_densities(incident_trace_coeffs(f, cfg, n_max, spectrum), spectrum)

    nu = check_directions()
    nodes = _DensityOnNodes(density)
    ts = np.array([c * delta for c in TRANSMISSION_OFFSETS])
    sides = {"exterior": [], "interior": []}
    for t in ts:
        for name, sign in (("exterior", 1.0), ("interior", -1.0)):
            X = cfg.R * (1.0 + sign * t) * nu
            E, H = layer_fields_at(density, X, name, threads, nodes, delta)
            if name == "exterior":
                Ei, Hi = incident_fields(f, X, cfg)
                E, H = E + Ei, H + Hi
            sides[name].append(np.concatenate([_tangential(nu, E), _tangential(nu, H)], axis=1))

    limits = {}
    for name, vals in sides.items():
        limits[name], spread = surface_limit(ts, np.stack(vals))
        if spread > EXTRAPOLATION_TOL:
            raise ExtrapolationUnstable(f"estrapolazione instabile lato {name}", spread)

    jump = limits["exterior"] - limits["interior"]
    ref = limits["exterior"]
    res_E = float(np.linalg.norm(jump[:, :3]) / max(np.linalg.norm(ref[:, :3]), 1e-300))
    res_H = float(np.linalg.norm(jump[:, 3:]) / max(np.linalg.norm(ref[:, 3:]), 1e-300))
    logger.info(f"residuo di trasmissione: E={res_E:.3e}, H={res_H:.3e}")
    return res_E, res_H


def radiation_residual(density: DensitySolution, cfg: MediumConfig | None = None, radii=(10.0, 20.0, 40.0), threads: int = THREADS) -> list[float]:
    """max |x| |sqrt(mu_m) H^s x x/|x| - sqrt(eps_m) E^s| su sfere di raggio crescente."""
    cfg = cfg or density.config
    nu = check_directions()
    out = []
    nodes = _DensityOnNodes(density)
    for r in radii:
        X = r * nu
        E, H = layer_fields_at(density, X, "exterior", threads, nodes)
        sm = np.sqrt(cfg.mu_m) * np.cross(H, nu) - np.sqrt(cfg.eps_m) * E
        out.append(float(r * np.max(np.linalg.norm(sm, axis=1))) if len(sm) else 0.0)
    return out

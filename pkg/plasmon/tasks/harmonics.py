"""Armoniche sferiche scalari e vettoriali, quadratura sulla sfera, proiezioni tangenziali.

Convenzione: Y_n^m ortonormali sulla sfera unitaria, fase di Condon-Shortley,
Y_n^{-m} = (-1)^m conj(Y_n^m). Il gradiente superficiale su una sfera di raggio R
porta il fattore 1/R, cosi' che ||grad_S Y_n^m||^2 = n(n+1) per ogni R.

Le tabelle di Legendre sono indicizzate [n, m + n_max, theta] con m con segno.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from plasmon.errors import DegenerateIndex, NotTangential, TruncationWarning
from plasmon.utils import QUAD_PAD, QUAD_TOL, Numerics


@dataclass(frozen=True)
class HarmonicIndex:
    degree: int
    order: int

    def __post_init__(self):
        if self.degree < 0 or abs(self.order) > self.degree:
            raise DegenerateIndex(f"indice non valido (n={self.degree}, m={self.order})")


@dataclass(frozen=True)
class TangentialBasisSample:
    index: HarmonicIndex
    point: np.ndarray
    grad: np.ndarray
    grad_cross_nu: np.ndarray


# -------------------------
# Legendre normalizzate
# -------------------------
def _legendre_nonneg(n_max: int, theta: np.ndarray) -> np.ndarray:
    """P[n, m, ...] per 0 <= m <= n <= n_max, nulla per m > n."""
    x = np.cos(theta)
    s = np.sin(theta)
    P = np.zeros((n_max + 1, n_max + 1) + theta.shape)
    P[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, n_max + 1):
        P[m, m] = -math.sqrt((2 * m + 1) / (2 * m)) * s * P[m - 1, m - 1]
    for m in range(0, n_max):
        P[m + 1, m] = math.sqrt(2 * m + 3) * x * P[m, m]
        for n in range(m + 2, n_max + 1):
            a = math.sqrt((4 * n * n - 1) / (n * n - m * m))
            b = math.sqrt(((n - 1) ** 2 - m * m) / (4 * (n - 1) ** 2 - 1))
            P[n, m] = a * (x * P[n - 1, m] - b * P[n - 2, m])
    return P


@dataclass(frozen=True)
class LegendreTables:
    """P, dP/dtheta e Q = m P / sin(theta), con ordine m con segno."""
    n_max: int
    P: np.ndarray
    dP: np.ndarray
    Q: np.ndarray

    def at(self, n: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = m + self.n_max
        return self.P[n, c], self.dP[n, c], self.Q[n, c]


def legendre_tables(n_max: int, theta) -> LegendreTables:
    theta = np.asarray(theta, dtype=float)
    # un grado in piu' per la formula di Q che usa P_{n-1}^{m+1}
    Pp = _legendre_nonneg(n_max + 1, theta)

    def pget(n: int, m: int) -> np.ndarray:
        if n < 0 or abs(m) > n:
            return np.zeros(theta.shape)
        if m >= 0:
            return Pp[n, m]
        return (-1) ** (-m) * Pp[n, -m]

    width = 2 * n_max + 1
    shape = (n_max + 1, width) + theta.shape
    P = np.zeros(shape)
    dP = np.zeros(shape)
    Q = np.zeros(shape)
    for n in range(0, n_max + 1):
        for m in range(0, n + 1):
            p = Pp[n, m]
            d = 0.5 * (
                math.sqrt((n - m) * (n + m + 1)) * pget(n, m + 1)
                - math.sqrt((n + m) * (n - m + 1)) * pget(n, m - 1)
            )
            if m == 0 or n == 0:
                q = np.zeros(theta.shape)
            else:
                q = -0.5 * math.sqrt((2 * n + 1) / (2 * n - 1)) * (
                    math.sqrt((n - m) * (n - m - 1)) * pget(n - 1, m + 1)
                    + math.sqrt((n + m) * (n + m - 1)) * pget(n - 1, m - 1)
                )
            sign = (-1) ** m
            P[n, n_max + m], dP[n, n_max + m], Q[n, n_max + m] = p, d, q
            if m > 0:
                P[n, n_max - m] = sign * p
                dP[n, n_max - m] = sign * d
                Q[n, n_max - m] = -sign * q
    return LegendreTables(n_max=n_max, P=P, dP=dP, Q=Q)


# -------------------------
# Geometria
# -------------------------
def spherical_frame(points) -> dict[str, np.ndarray]:
    """Angoli e versori (r, theta, phi) per punti non nulli."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(p, axis=-1)
    rhat = p / r[..., None]
    theta = np.arccos(np.clip(rhat[..., 2], -1.0, 1.0))
    phi = np.arctan2(p[..., 1], p[..., 0])
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    that = np.stack([ct * cp, ct * sp, -st], axis=-1)
    phat = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    return {"r": r, "rhat": rhat, "theta": theta, "phi": phi, "that": that, "phat": phat}


def eval_Y(idx: HarmonicIndex, point) -> complex:
    fr = spherical_frame(point)
    tab = legendre_tables(idx.degree, fr["theta"])
    p, _, _ = tab.at(idx.degree, idx.order)
    return complex(p[0] * np.exp(1j * idx.order * fr["phi"][0]))


def _grad_parts(idx: HarmonicIndex, fr: dict, R: float) -> tuple[np.ndarray, np.ndarray]:
    tab = legendre_tables(idx.degree, fr["theta"])
    _, d, q = tab.at(idx.degree, idx.order)
    e = np.exp(1j * idx.order * fr["phi"])
    a = (d * e)[..., None]
    b = (1j * q * e)[..., None]
    grad = (a * fr["that"] + b * fr["phat"]) / R
    cross = (b * fr["that"] - a * fr["phat"]) / R
    return grad, cross


def eval_tangential_basis(idx: HarmonicIndex, point, R: float = 1.0) -> TangentialBasisSample:
    if idx.degree == 0:
        raise DegenerateIndex("la base tangenziale di grado 0 e' vuota")
    fr = spherical_frame(point)
    grad, cross = _grad_parts(idx, fr, R)
    return TangentialBasisSample(index=idx, point=fr["rhat"][0], grad=grad[0], grad_cross_nu=cross[0])


def eval_vector_harmonics(idx: HarmonicIndex, point) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(I_n, T_n, N_n) sulla sfera unitaria; componenti con |m| oltre il grado valgono zero."""
    n, m = idx.degree, idx.order
    if n == 0:
        raise DegenerateIndex("T_n e N_n richiedono n >= 1")
    fr = spherical_frame(point)
    nu = fr["rhat"][0]

    def scalar_and_grad(deg: int):
        if abs(m) > deg:
            return 0j, np.zeros(3, dtype=complex)
        sub = HarmonicIndex(deg, m)
        y = eval_Y(sub, point)
        if deg == 0:
            return y, np.zeros(3, dtype=complex)
        g, _ = _grad_parts(sub, fr, 1.0)
        return y, g[0]

    y_up, g_up = scalar_and_grad(n + 1)
    y_dn, g_dn = scalar_and_grad(n - 1)
    _, t = _grad_parts(idx, fr, 1.0)
    I = g_up + (n + 1) * y_up * nu
    N = -g_dn + n * y_dn * nu
    return I, t[0], N


# -------------------------
# Quadratura prodotto Gauss-Legendre x trapezi
# -------------------------
@dataclass(frozen=True)
class SphereQuadrature:
    radius: float
    theta: np.ndarray
    theta_weights: np.ndarray  # pesi GL in cos(theta), somma 2
    phi: np.ndarray
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n_theta(self) -> int:
        return self.theta.size

    @property
    def n_phi(self) -> int:
        return self.phi.size

    @property
    def points(self) -> np.ndarray:
        return self.radius * self.nodes

    @classmethod
    def build(cls, n_theta: int, radius: float = 1.0, n_phi: int | None = None) -> "SphereQuadrature":
        n_phi = 2 * n_theta if n_phi is None else n_phi
        x, w = np.polynomial.legendre.leggauss(n_theta)
        # theta crescente
        theta = np.arccos(x[::-1])
        w = w[::-1]
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        st = np.sin(theta)[:, None]
        nodes = np.stack(
            [
                (st * np.cos(phi)[None, :]).ravel(),
                (st * np.sin(phi)[None, :]).ravel(),
                np.repeat(np.cos(theta), n_phi),
            ],
            axis=-1,
        )
        weights = np.repeat(w, n_phi) * (2.0 * np.pi / n_phi) * radius**2
        return cls(radius=float(radius), theta=theta, theta_weights=w, phi=phi, nodes=nodes, weights=weights)

    @classmethod
    def for_degree(cls, n_max: int, radius: float = 1.0, pad: int = QUAD_PAD) -> "SphereQuadrature":
        return cls.build(n_max + pad, radius)


_ORDER_BUCKETS = (16, 24, 32, 48, 64, 96, 128, 160, 192, 256, 320, 384, 512, 640, 768, 1024, 1280)


def near_surface_order(n_dens: int, delta: float, k_R: float = 0.0, tol: float = QUAD_TOL) -> int:
    """N_theta per valutare un potenziale a distanza relativa delta dalla superficie.

    Per integrandi quasi singolari la convergenza di GL e dei trapezi va come
    exp(-2 N delta): si prende N ~ (log(1/tol) + log(1/delta)) / (2 log(1+delta)).
    """
    base = n_dens + QUAD_PAD + int(math.ceil(abs(k_R)))
    delta = abs(delta)
    if delta > 0:
        near = math.ceil((math.log(1.0 / tol) + max(0.0, math.log(1.0 / delta))) / (2.0 * math.log1p(delta)))
        base = max(base, near + n_dens // 2 + QUAD_PAD)
    for b in _ORDER_BUCKETS:
        if b >= base:
            return b
    return int(8 * math.ceil(base / 8))


# -------------------------
# Sintesi e proiezione su griglia prodotto
# -------------------------
def _azimuth_matrix(quad: SphereQuadrature, n_max: int) -> np.ndarray:
    m = np.arange(-n_max, n_max + 1)
    return np.exp(1j * np.outer(quad.phi, m))  # (n_phi, 2N+1)


def _frame_on_grid(quad: SphereQuadrature) -> tuple[np.ndarray, np.ndarray]:
    fr = spherical_frame(quad.nodes)
    return fr["that"], fr["phat"]


def synthesize_scalar(coeffs: np.ndarray, quad: SphereQuadrature) -> np.ndarray:
    """coeffs[n, m + N] -> valori sui nodi (theta-major)."""
    n_max = coeffs.shape[0] - 1
    tab = legendre_tables(n_max, quad.theta)
    g = np.einsum("nmt,nm->tm", tab.P, coeffs)
    return (g @ _azimuth_matrix(quad, n_max).T).ravel()


def project_scalar(values: np.ndarray, quad: SphereQuadrature, n_max: int) -> np.ndarray:
    tab = legendre_tables(n_max, quad.theta)
    v = np.asarray(values, dtype=complex).reshape(quad.n_theta, quad.n_phi)
    fm = (v @ _azimuth_matrix(quad, n_max).conj()) * (2.0 * np.pi / quad.n_phi)
    return np.einsum("nmt,tm->nm", tab.P, fm * quad.theta_weights[:, None]) * quad.radius**2


def synthesize_tangential(c_grad: np.ndarray, c_cross: np.ndarray, quad: SphereQuadrature) -> np.ndarray:
    """Campo cartesiano (N_nodi, 3) da coefficienti su (grad_S Y, grad_S Y x nu)."""
    n_max = c_grad.shape[0] - 1
    tab = legendre_tables(n_max, quad.theta)
    E = _azimuth_matrix(quad, n_max).T  # (2N+1, n_phi)
    g_theta = np.einsum("nmt,nm->tm", tab.dP, c_grad) + 1j * np.einsum("nmt,nm->tm", tab.Q, c_cross)
    g_phi = 1j * np.einsum("nmt,nm->tm", tab.Q, c_grad) - np.einsum("nmt,nm->tm", tab.dP, c_cross)
    f_theta = (g_theta @ E).ravel() / quad.radius
    f_phi = (g_phi @ E).ravel() / quad.radius
    that, phat = _frame_on_grid(quad)
    return f_theta[:, None] * that + f_phi[:, None] * phat


@dataclass(frozen=True)
class TangentialProjection:
    n_max: int
    c_grad: np.ndarray   # [n, m + n_max]
    c_cross: np.ndarray
    residual: float

    def __getitem__(self, idx: HarmonicIndex) -> tuple[complex, complex]:
        c = idx.order + self.n_max
        return complex(self.c_grad[idx.degree, c]), complex(self.c_cross[idx.degree, c])


def project_tangential(field_values: np.ndarray, quad: SphereQuadrature, n_max: int, check: bool = True) -> TangentialProjection:
    F = np.asarray(field_values, dtype=complex).reshape(-1, 3)
    scale = max(1.0, float(np.max(np.abs(F)))) if F.size else 1.0
    radial = np.abs(np.einsum("pc,pc->p", F, quad.nodes))
    if radial.size and radial.max() > Numerics.TANGENTIAL_TOL * scale:
        raise NotTangential("componente radiale oltre tolleranza", float(radial.max()))

    that, phat = _frame_on_grid(quad)
    f_theta = np.einsum("pc,pc->p", F, that).reshape(quad.n_theta, quad.n_phi)
    f_phi = np.einsum("pc,pc->p", F, phat).reshape(quad.n_theta, quad.n_phi)
    Ec = _azimuth_matrix(quad, n_max).conj() * (2.0 * np.pi / quad.n_phi)
    w = quad.theta_weights[:, None]
    fm_theta = (f_theta @ Ec) * w
    fm_phi = (f_phi @ Ec) * w

    tab = legendre_tables(n_max, quad.theta)
    R = quad.radius
    raw_grad = R * (np.einsum("nmt,tm->nm", tab.dP, fm_theta) - 1j * np.einsum("nmt,tm->nm", tab.Q, fm_phi))
    raw_cross = R * (-1j * np.einsum("nmt,tm->nm", tab.Q, fm_theta) - np.einsum("nmt,tm->nm", tab.dP, fm_phi))
    nn = np.arange(n_max + 1, dtype=float)
    norm = (nn * (nn + 1.0))[:, None]
    norm[0] = 1.0
    c_grad = raw_grad / norm
    c_cross = raw_cross / norm
    c_grad[0] = 0.0
    c_cross[0] = 0.0

    residual = 0.0
    if check and F.size:
        rebuilt = synthesize_tangential(c_grad, c_cross, quad)
        num = np.sqrt(np.sum(quad.weights * np.sum(np.abs(F - rebuilt) ** 2, axis=1)))
        den = np.sqrt(np.sum(quad.weights * np.sum(np.abs(F) ** 2, axis=1)))
        residual = float(num / den) if den > 0 else 0.0
        if residual > Numerics.TRUNCATION_TOL:
            warnings.warn(f"residuo di troncamento {residual:.3e} oltre {Numerics.TRUNCATION_TOL}", TruncationWarning)
    return TangentialProjection(n_max=n_max, c_grad=c_grad, c_cross=c_cross, residual=residual)

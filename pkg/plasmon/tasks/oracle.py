"""Verifica indipendente delle quantita' spettrali per quadratura dei potenziali di strato.

Niente quadratura singolare: si valuta il potenziale nei punti R(1 +- t) sull'asse z,
con pannelli Gauss-Legendre graduati in theta' attorno al polo e trapezi in phi'
(esatti: l'integrando e' un polinomio trigonometrico di grado basso in phi'),
poi si estrapola a t -> 0 dai due lati.

Densita':
- scalari: Y_n^0 con asse z (valore al polo sqrt((2n+1)/4pi));
- vettoriali: armonica di grado n attorno a un asse inclinato, cosi' al polo
  grad_S Y e grad_S Y x nu sono reali e ortogonali (con m = 1 sarebbero paralleli).
Gli operatori commutano con le rotazioni: gli autovalori non dipendono dall'asse.

Usato solo dai test e dal comando verify.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from plasmon.errors import ExtrapolationUnstable, LeakageExcessive, TooCloseToSurface
from plasmon.tasks.harmonics import (
    HarmonicIndex,
    SphereQuadrature,
    near_surface_order,
    project_tangential,
    synthesize_scalar,
    synthesize_tangential,
)
from plasmon.tasks.potentials import single_layer, vector_potential
from plasmon.tasks.scattering import surface_limit
from plasmon.utils import DELTA_MIN, QUAD_PAD

ORACLE_DELTA = 2e-3
ORACLE_OFFSETS = tuple(c * ORACLE_DELTA for c in (2.5, 2.0, 1.5, 1.25, 1.0))
ORACLE_MAX_DEGREE = 6
RICHARDSON_TOL = 1e-5
LEAKAGE_TOL = 1e-4

_PANEL_NODES = 20
_N_PHI = 16
_AXIS_Z = 0.15
VECTOR_AXIS = np.array([math.sqrt(1.0 - _AXIS_Z**2), 0.0, _AXIS_Z])


@dataclass(frozen=True)
class JumpExtrapolation:
    offsets: tuple[float, ...]
    samples_out: np.ndarray
    samples_in: np.ndarray
    extrapolated_out: np.ndarray | complex
    extrapolated_in: np.ndarray | complex
    spread: float

    def __post_init__(self):
        off = np.asarray(self.offsets)
        if np.any(np.diff(off) >= 0):
            raise ValueError(f"offset non strettamente decrescenti (value={self.offsets})")
        if off.min() < ORACLE_DELTA - 1e-15:
            raise TooCloseToSurface("offset sotto il minimo dell'oracolo", float(off.min()))

    @property
    def jump(self):
        return self.extrapolated_out - self.extrapolated_in

    @property
    def average(self):
        return 0.5 * (self.extrapolated_out + self.extrapolated_in)


@dataclass(frozen=True)
class OperatorResponse:
    """Autovalori di M e L su una densita' tangenziale e perdite fuori diagonale.

    Gli autovalori non dipendono dall'ordine m: order_spread misura lo scarto relativo
    della risposta di grado n tra gli ordini controllati.
    """
    degree: int
    density: str
    m_diagonal: complex
    m_leakage: float
    l_coefficient: complex
    l_leakage: float
    cross_degree_leakage: float
    order_spread: float = 0.0
    orders: tuple[int, ...] = ()


# -------------------------
# Quadratura graduata attorno al polo
# -------------------------
def pole_quadrature(R: float, t: float, n_phi: int = _N_PHI) -> tuple[np.ndarray, np.ndarray]:
    """Nodi unitari (theta-major) e pesi R^2 sin(theta) dtheta dphi."""
    breaks = [0.0]
    b = t
    while b < math.pi:
        breaks.append(b)
        b *= 2.0
    breaks.append(math.pi)
    x, w = np.polynomial.legendre.leggauss(_PANEL_NODES)
    theta, wt = [], []
    for a, c in zip(breaks[:-1], breaks[1:]):
        theta.append(a + (c - a) * (x + 1.0) / 2.0)
        wt.append(w * (c - a) / 2.0)
    theta, wt = np.concatenate(theta), np.concatenate(wt)
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
    weights = np.repeat(R**2 * np.sin(theta) * wt, n_phi) * (2.0 * np.pi / n_phi)
    return nodes, weights


def _norm(n: int) -> float:
    return math.sqrt((2 * n + 1) / (4.0 * math.pi))


def _scalar_density(n: int, nodes: np.ndarray, axis: np.ndarray) -> np.ndarray:
    u = nodes @ axis
    return _norm(n) * npleg.legval(u, [0.0] * n + [1.0]) + 0j


def _vector_density(n: int, which: str, nodes: np.ndarray, R: float) -> np.ndarray:
    u = nodes @ VECTOR_AXIS
    dP = npleg.legval(u, npleg.legder([0.0] * n + [1.0]))
    grad = (_norm(n) * dP / R)[:, None] * (VECTOR_AXIS[None, :] - u[:, None] * nodes)
    if which == "grad":
        return grad + 0j
    if which == "grad_cross_nu":
        return np.cross(grad, nodes) + 0j
    raise ValueError(f"densita' sconosciuta (value={which})")


def _check_degree(n: int, minimum: int = 0) -> None:
    if not minimum <= n <= ORACLE_MAX_DEGREE:
        raise ValueError(f"grado fuori dall'intervallo dell'oracolo [{minimum}, {ORACLE_MAX_DEGREE}] (value={n})")


def _extrapolate(sample) -> JumpExtrapolation:
    ts = np.array(ORACLE_OFFSETS)
    out = np.stack([np.asarray(sample(t, +1.0)) for t in ts])
    inn = np.stack([np.asarray(sample(t, -1.0)) for t in ts])
    lim_out, s_out = surface_limit(ts, out)
    lim_in, s_in = surface_limit(ts, inn)
    spread = max(s_out, s_in)
    if spread > RICHARDSON_TOL:
        raise ExtrapolationUnstable("livelli di estrapolazione discordi", spread)
    return JumpExtrapolation(
        offsets=ORACLE_OFFSETS, samples_out=out, samples_in=inn,
        extrapolated_out=lim_out, extrapolated_in=lim_in, spread=spread,
    )


# -------------------------
# Single layer e K*
# -------------------------
def oracle_single_layer(idx: HarmonicIndex, k: complex, R: float, x) -> complex:
    """Quadratura diretta di int G(x,y,k) Y(y) ds(y) in un punto fuori superficie."""
    x = np.asarray(x, dtype=float).reshape(1, 3)
    rel = abs(float(np.linalg.norm(x)) - R) / R
    if rel < DELTA_MIN - 1e-15:
        raise TooCloseToSurface("punto nella fascia esclusa attorno alla superficie", rel)
    quad = SphereQuadrature.build(near_surface_order(idx.degree, rel, abs(k) * R), R)
    coeffs = np.zeros((idx.degree + 1, 2 * idx.degree + 1), dtype=complex)
    coeffs[idx.degree, idx.order + idx.degree] = 1.0
    sigma = synthesize_scalar(coeffs, quad)
    S, _ = single_layer(x, quad.points, quad.weights, sigma, k)
    return complex(S[0])


def single_layer_jumps(n: int, k: complex, R: float) -> tuple[JumpExtrapolation, JumpExtrapolation]:
    """(S, d_nu S) ai due lati del polo, normalizzati per Y(polo)."""
    _check_degree(n)
    y_pole = _norm(n)
    axis = np.array([0.0, 0.0, 1.0])
    cache: dict[tuple[float, float], tuple[complex, complex]] = {}

    def evaluate(t: float, side: float) -> tuple[complex, complex]:
        key = (t, side)
        if key not in cache:
            nodes, w = pole_quadrature(R, t)
            sigma = _scalar_density(n, nodes, axis)
            X = np.array([[0.0, 0.0, R * (1.0 + side * t)]])
            S, grad = single_layer(X, R * nodes, w, sigma, k)
            cache[key] = (complex(S[0]) / y_pole, complex(grad[0, 2]) / y_pole)
        return cache[key]

    value = _extrapolate(lambda t, s: evaluate(t, s)[0])
    normal = _extrapolate(lambda t, s: evaluate(t, s)[1])
    return value, normal


def oracle_chi(idx: HarmonicIndex, k: complex, R: float) -> complex:
    value, _ = single_layer_jumps(idx.degree, k, R)
    return complex(value.average)


def oracle_lambda(idx: HarmonicIndex, k: complex, R: float) -> complex:
    """Media dei due limiti di d_nu S: il salto +-1/2 si cancella."""
    _, normal = single_layer_jumps(idx.degree, k, R)
    return complex(normal.average)


# -------------------------
# M e L su densita' tangenziali
# -------------------------
def _pole_frame(n: int, R: float) -> tuple[np.ndarray, np.ndarray]:
    pole = np.array([[0.0, 0.0, 1.0]])
    return _vector_density(n, "grad", pole, R)[0], _vector_density(n, "grad_cross_nu", pole, R)[0]


def _component(out: np.ndarray, basis: np.ndarray) -> complex:
    return complex(np.vdot(basis, out) / np.vdot(basis, basis))


def _outer_projection(idx: HarmonicIndex, which: str, k: complex, R: float, radius_factor: float):
    """Proiezione di nu x curl A[densita' (n, m)] su una sfera esterna, fino al grado n + 3."""
    n = idx.degree
    top = n + 3
    src = SphereQuadrature.build(near_surface_order(n, radius_factor - 1.0, abs(k) * R), R)
    cg = np.zeros((n + 1, 2 * n + 1), dtype=complex)
    cc = np.zeros_like(cg)
    (cg if which == "grad" else cc)[n, idx.order + n] = 1.0
    density = synthesize_tangential(cg, cc, src)
    outer = SphereQuadrature.build(top + QUAD_PAD, radius_factor * R)
    _, curl, _ = vector_potential(outer.points, src.points, src.weights, density, k)
    F = np.cross(outer.nodes, curl)
    return project_tangential(F, outer, top, check=False)


def cross_degree_leakage(idx: HarmonicIndex, which: str, k: complex, R: float, radius_factor: float = 1.3) -> float:
    """Energia di nu x curl A[densita'] fuori dal grado n, proiettando su una sfera esterna."""
    return _leakage_of(_outer_projection(idx, which, k, R, radius_factor), idx.degree)


def _leakage_of(proj, n: int) -> float:
    energy = np.abs(proj.c_grad) ** 2 + np.abs(proj.c_cross) ** 2
    inside = float(np.sum(energy[n]))
    outside = float(np.sum(energy) - inside)
    return math.sqrt(outside / inside) if inside > 0 else math.inf


def oracle_M_L(idx: HarmonicIndex, which_density: str, k: complex, R: float, strict: bool = True) -> OperatorResponse:
    """Autovalori di M e L al grado idx.degree, valutati al polo.

    L'ordine di idx entra nei controlli di perdita: la risposta di grado n viene proiettata
    per gli ordini idx.order, 0 e n e deve coincidere a meno di LEAKAGE_TOL.
    """
    n = idx.degree
    _check_degree(n, minimum=1)
    grad_p, cross_p = _pole_frame(n, R)
    nu = np.array([0.0, 0.0, 1.0])
    div_factor = -n * (n + 1) / R**2 if which_density == "grad" else 0.0
    cache: dict[tuple[float, float], tuple[np.ndarray, np.ndarray]] = {}

    def evaluate(t: float, side: float):
        key = (t, side)
        if key not in cache:
            nodes, w = pole_quadrature(R, t)
            Y = R * nodes
            v = _vector_density(n, which_density, nodes, R)
            X = np.array([[0.0, 0.0, R * (1.0 + side * t)]])
            A, curl, _ = vector_potential(X, Y, w, v, k)
            if div_factor:
                _, gradS = single_layer(X, Y, w, div_factor * _scalar_density(n, nodes, VECTOR_AXIS), k)
            else:
                gradS = np.zeros((1, 3), dtype=complex)
            m_out = np.cross(nu, curl[0])
            l_out = np.cross(nu, k * k * A[0] + gradS[0])
            cache[key] = (m_out, l_out)
        return cache[key]

    m_ext = _extrapolate(lambda t, s: evaluate(t, s)[0])
    l_ext = _extrapolate(lambda t, s: evaluate(t, s)[1])
    m_avg, l_avg = m_ext.average, l_ext.average

    same, other = (grad_p, cross_p) if which_density == "grad" else (cross_p, grad_p)
    m_diag = _component(m_avg, same)
    m_leak = abs(_component(m_avg, other)) + float(abs(m_avg[2]))
    l_coef = _component(l_avg, other)
    l_leak = abs(_component(l_avg, same)) + float(abs(l_avg[2]))
    orders = tuple(sorted({idx.order, 0, n}))
    projections = {m: _outer_projection(HarmonicIndex(n, m), which_density, k, R, 1.3) for m in orders}
    leak_deg = max(_leakage_of(p, n) for p in projections.values())
    spread = order_spread(projections, n)

    out = OperatorResponse(
        degree=n, density=which_density, m_diagonal=m_diag, m_leakage=m_leak,
        l_coefficient=l_coef, l_leakage=l_leak, cross_degree_leakage=leak_deg,
        order_spread=spread, orders=orders,
    )
    worst = max(m_leak, l_leak, leak_deg, spread)
    if strict and worst > LEAKAGE_TOL:
        raise LeakageExcessive(f"perdita fuori diagonale al grado {n} ({which_density})", worst)
    return out


def order_spread(projections: dict, n: int) -> float:
    """Scarto relativo massimo tra le risposte (c_grad, c_cross) di grado n proiettate per ordini diversi."""
    resp = {m: np.array(p[HarmonicIndex(n, m)]) for m, p in projections.items()}
    ref = resp[min(resp, key=abs)]
    scale = float(np.linalg.norm(ref))
    if scale == 0:
        return math.inf
    return max(float(np.linalg.norm(v - ref)) for v in resp.values()) / scale

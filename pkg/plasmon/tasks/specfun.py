"""Funzioni sferiche di Bessel e Hankel (primo tipo) ad argomento complesso.

Le tabelle sono calcolate per tutti gli ordini 0..n in un colpo solo:
- j_n con ricorrenza all'indietro (Miller) sui rapporti j_k/j_{k-1},
  normalizzata su j_0 oppure j_1 (quello di modulo maggiore);
- h_n con ricorrenza in avanti, stabile per la soluzione dominante.

L'argomento puo' essere uno scalare o un array: le ricorrenze sono vettoriali.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from plasmon.errors import DegenerateArgument, OrderOverflow
from plasmon.utils import ORDER_LIMIT, Numerics

# fattore moltiplicativo su h_n, diverso da 1 solo in fault injection (verify)
_HANKEL_FAULT: ContextVar[float] = ContextVar("hankel_fault", default=1.0)


@dataclass(frozen=True)
class RadialPair:
    order: int
    argument: complex
    j: complex
    j_prime: complex
    h1: complex
    h1_prime: complex

    @property
    def wronskian(self) -> complex:
        return self.j * self.h1_prime - self.j_prime * self.h1


@dataclass(frozen=True)
class RadialTable:
    """j, j', h, h' per ordini 0..n_max; asse 0 = ordine, assi successivi = forma di z."""
    z: np.ndarray
    j: np.ndarray
    j_prime: np.ndarray
    h1: np.ndarray
    h1_prime: np.ndarray

    @property
    def n_max(self) -> int:
        return self.j.shape[0] - 1

    def pair(self, n: int) -> RadialPair:
        if self.z.ndim:
            raise ValueError("pair() richiede un argomento scalare")
        return RadialPair(
            order=n,
            argument=complex(self.z),
            j=complex(self.j[n]),
            j_prime=complex(self.j_prime[n]),
            h1=complex(self.h1[n]),
            h1_prime=complex(self.h1_prime[n]),
        )


@contextmanager
def fault_injection(scale: float = 1.0 + 1e-3):
    """Corrompe le tabelle di Hankel nel contesto corrente (solo per il comando verify)."""
    token = _HANKEL_FAULT.set(scale)
    try:
        yield
    finally:
        _HANKEL_FAULT.reset(token)


def _check(n: int, z: np.ndarray) -> None:
    if n < 0:
        raise OrderOverflow("ordine negativo", n)
    if n > ORDER_LIMIT:
        raise OrderOverflow(f"ordine oltre il limite delle tabelle radiali PLASMON_ORDER_LIMIT={ORDER_LIMIT}", n)
    if np.any(np.abs(z) < Numerics.Z_MIN):
        raise DegenerateArgument("|z| sotto z_min", float(np.min(np.abs(z))))


def _bessel_j(n_max: int, z: np.ndarray) -> np.ndarray:
    start = n_max + Numerics.RECURRENCE_PAD + int(math.ceil(float(np.max(np.abs(z)))))
    ratios = np.zeros((n_max + 2,) + z.shape, dtype=complex)
    r = np.zeros(z.shape, dtype=complex)
    for k in range(start, 0, -1):
        den = (2 * k + 1) - z * r
        den = np.where(den == 0, 1e-300, den)
        r = z / den
        if k <= n_max + 1:
            ratios[k] = r

    with np.errstate(over="ignore", invalid="ignore"):
        j0 = np.sin(z) / z
        j1 = np.sin(z) / z**2 - np.cos(z) / z

    out = np.zeros((n_max + 1,) + z.shape, dtype=complex)
    # ancora su j0 o j1: quella di modulo maggiore evita la divisione per uno zero
    anchor_j0 = np.abs(j0) >= np.abs(j1)
    out[0] = np.where(anchor_j0, j0, j1 / np.where(ratios[1] == 0, 1.0, ratios[1]))
    if n_max >= 1:
        out[1] = np.where(anchor_j0, j0 * ratios[1], j1)
    for k in range(2, n_max + 1):
        out[k] = out[k - 1] * ratios[k]
    return out


def _hankel_h1(n_max: int, z: np.ndarray) -> np.ndarray:
    out = np.zeros((n_max + 1,) + z.shape, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        e = np.exp(1j * z)
        out[0] = -1j * e / z
        if n_max >= 1:
            out[1] = -e * (z + 1j) / z**2
        for k in range(1, n_max):
            out[k + 1] = (2 * k + 1) / z * out[k] - out[k - 1]
    return out * _HANKEL_FAULT.get()


def _derivatives(f: np.ndarray, z: np.ndarray, f_next: np.ndarray) -> np.ndarray:
    # f'_0 = -f_1 ; f'_k = f_{k-1} - (k+1) f_k / z
    d = np.empty_like(f)
    d[0] = -f_next
    if f.shape[0] > 1:
        k = np.arange(1, f.shape[0]).reshape((-1,) + (1,) * z.ndim)
        with np.errstate(over="ignore", invalid="ignore"):
            d[1:] = f[:-1] - (k + 1) * f[1:] / z
    return d


def radial_table(n_max: int, z) -> RadialTable:
    """Tabella completa per ordini 0..n_max (z scalare o array)."""
    z = np.asarray(z, dtype=complex)
    _check(n_max, z)
    # un ordine in piu' serve solo per j'_0, h'_0 quando n_max = 0
    top = max(n_max, 1)
    j = _bessel_j(top, z)
    h = _hankel_h1(top, z)
    jp = _derivatives(j, z, j[1])
    hp = _derivatives(h, z, h[1])
    sl = slice(0, n_max + 1)
    return RadialTable(z=z, j=j[sl], j_prime=jp[sl], h1=h[sl], h1_prime=hp[sl])


def radial_pair(n: int, z: complex) -> RadialPair:
    return radial_table(n, complex(z)).pair(n)


# -------------------------
# Forme asintotiche di ordine elevato
# -------------------------
def log_double_factorial_odd(n: int) -> float:
    """log((2n+1)!!) = log((2n+1)!) - n log 2 - log(n!)."""
    if n < 0:
        return 0.0
    return float(gammaln(2 * n + 2) - n * math.log(2.0) - gammaln(n + 1))


def radial_pair_asymptotic(n: int, z: complex) -> RadialPair:
    """Termine principale: j_n ~ z^n/(2n+1)!!, h_n ~ (2n-1)!!/(i z^{n+1})."""
    z = complex(z)
    if n < 1:
        raise OrderOverflow("la forma asintotica richiede n >= 1", n)
    _check(n, np.asarray(z))
    log_z = np.log(z)
    j = np.exp(n * log_z - log_double_factorial_odd(n))
    h = -1j * np.exp(log_double_factorial_odd(n - 1) - (n + 1) * log_z)
    return RadialPair(
        order=n,
        argument=z,
        j=complex(j),
        j_prime=complex(n * j / z),
        h1=complex(h),
        h1_prime=complex(-(n + 1) * h / z),
    )

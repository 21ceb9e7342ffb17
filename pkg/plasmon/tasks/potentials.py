"""Potenziali di strato fuori superficie, per quadratura sui nodi di una SphereQuadrature.

Convenzione del nucleo: G(x, y, k) = -exp(ik|x-y|) / (4 pi |x-y|).
Con d = |x - y|:
    grad_x G = (x - y) a,              a = G (ik - 1/d) / d
    Hess_x G = b (x-y)(x-y)^T + a I,   b = (G'' - a) / d^2

Nessun array (punti, nodi, 3): si lavora con matrici (punti, nodi) e prodotti matriciali,
a blocchi di punti per contenere la memoria.
"""
from __future__ import annotations

import numpy as np
from joblib import Parallel, delayed

from plasmon.utils import Numerics


def _kernels(X: np.ndarray, Y: np.ndarray, k: complex):
    d2 = np.sum(X * X, axis=1)[:, None] + np.sum(Y * Y, axis=1)[None, :] - 2.0 * X @ Y.T
    d = np.sqrt(np.maximum(d2, 0.0))
    inv = 1.0 / d
    ikd = 1j * k - inv
    G = -np.exp(1j * k * d) * inv / (4.0 * np.pi)
    a = G * ikd * inv
    G2 = G * (ikd * ikd + inv * inv)
    b = (G2 - a) * inv * inv
    return G, a, b


def _chunks(n_points: int, n_nodes: int) -> list[slice]:
    step = max(1, Numerics.KERNEL_CHUNK // max(n_nodes, 1))
    return [slice(i, min(i + step, n_points)) for i in range(0, n_points, step)]


def _single_layer_block(X, Y, w, sigma, k):
    G, a, _ = _kernels(X, Y, k)
    wa = a * w
    S = (G * w) @ sigma
    grad = X * (wa @ sigma)[:, None] - wa @ (sigma[:, None] * Y)
    return S, grad


def single_layer(X, Y, w, sigma, k: complex) -> tuple[np.ndarray, np.ndarray]:
    """S[sigma](x) e grad S[sigma](x) nei punti X (P, 3)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    sigma = np.asarray(sigma, dtype=complex)
    S = np.empty(X.shape[0], dtype=complex)
    grad = np.empty((X.shape[0], 3), dtype=complex)
    for sl in _chunks(X.shape[0], Y.shape[0]):
        S[sl], grad[sl] = _single_layer_block(X[sl], Y, w, sigma, k)
    return S, grad


def _vector_block(X, Y, w, V, k):
    """A[V], curl A[V], curl curl A[V] nei punti X."""
    G, a, b = _kernels(X, Y, k)
    wG = G * w
    wa = a * w
    A = wG @ V
    curl = np.cross(X, wa @ V) - wa @ np.cross(Y, V)
    s = np.einsum("nc,nc->n", Y, V)
    c = (b * w) * (X @ V.T - s[None, :])
    curlcurl = X * np.sum(c, axis=1)[:, None] - c @ Y + (wa + k * k * wG) @ V
    return A, curl, curlcurl


def vector_potential(X, Y, w, V, k: complex) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    V = np.asarray(V, dtype=complex)
    out = [np.empty((X.shape[0], 3), dtype=complex) for _ in range(3)]
    for sl in _chunks(X.shape[0], Y.shape[0]):
        for arr, val in zip(out, _vector_block(X[sl], Y, w, V, k)):
            arr[sl] = val
    return tuple(out)


def _fields_block(X, Y, w, psi, phi, k, mu, omega):
    _, curl_psi, cc_psi = _vector_block(X, Y, w, psi, k)
    _, curl_phi, cc_phi = _vector_block(X, Y, w, phi, k)
    E = mu * curl_psi + cc_phi
    # curl curl curl A = k^2 curl A fuori superficie
    curl_E = mu * cc_psi + k * k * curl_phi
    return E, curl_E / (1j * omega * mu)


def layer_fields(X, Y, w, psi, phi, k: complex, mu: complex, omega: float, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """E = mu curl A[psi] + curl curl A[phi] e H = curl E / (i omega mu), blocchi in parallelo."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    blocks = _chunks(X.shape[0], Y.shape[0])
    if threads > 1 and len(blocks) > 1:
        parts = Parallel(n_jobs=threads, prefer="threads")(
            delayed(_fields_block)(X[sl], Y, w, psi, phi, k, mu, omega) for sl in blocks
        )
    else:
        parts = [_fields_block(X[sl], Y, w, psi, phi, k, mu, omega) for sl in blocks]
    if not parts:
        return np.zeros((0, 3), dtype=complex), np.zeros((0, 3), dtype=complex)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

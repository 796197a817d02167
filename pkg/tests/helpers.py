"""Shared deterministic random generators for the test suite.

Each helper takes a seed (drawn by hypothesis) and derives everything from a
local numpy Generator, which keeps examples reproducible and cheap to shrink.
"""

from __future__ import annotations

import hashlib

import numpy as np

from qregsim import BathSpec
from qregsim.register import normalize


def rng_for(seed: int | str) -> np.random.Generator:
    if isinstance(seed, str):
        seed = int.from_bytes(hashlib.sha256(seed.encode()).digest()[:8], "big")
    return np.random.default_rng(seed)


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return normalize(v)


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random full-rank density matrix (Wishart normalized to unit trace)."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_psd(rng: np.random.Generator, n: int, scale: float = 0.2) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = a @ a.conj().T
    return scale * m / max(1.0, np.linalg.norm(m, 2))


def random_bath(
    rng: np.random.Generator, n: int, with_plus: bool = True
) -> BathSpec:
    """Random valid bath coefficients: both matrices PSD and G- - G+ PSD."""
    gap = random_psd(rng, n)
    if with_plus:
        gp = random_psd(rng, n, scale=0.05)
    else:
        gp = np.zeros((n, n), dtype=complex)
    return BathSpec(gamma_minus=gap + gp, gamma_plus=gp)


def random_phases(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(0.0, 2.0 * np.pi, size=n)


def permutation_matrix(n: int, i: int, j: int) -> np.ndarray:
    """Matrix representation of swapping qubit cells i and j."""
    dim = 2**n
    p = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        bits = [(b >> (n - 1 - k)) & 1 for k in range(n)]
        bits[i], bits[j] = bits[j], bits[i]
        b2 = sum(bit << (n - 1 - k) for k, bit in enumerate(bits))
        p[b2, b] = 1.0
    return p

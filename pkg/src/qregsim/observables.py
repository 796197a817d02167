"""Decoherence observables: fidelity, linear entropy, the short-time
decoherence hierarchy 1/tau_n^n, first-order rates for pure states, and
register energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import DimensionMismatch, NotHermitian, TooLarge
from .linalg import is_hermitian
from .liouvillian import LindbladSet, Liouvillian

# Highest supported order of the decoherence-time hierarchy.
N_MAX = 6


@dataclass(frozen=True)
class DecoherenceReport:
    """Bundle of decoherence diagnostics along one trajectory."""

    tau_inverse: np.ndarray
    fidelity_series: np.ndarray
    entropy_series: np.ndarray
    energy_series: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("tau_inverse", "fidelity_series", "entropy_series", "energy_series"):
            object.__setattr__(
                self, name, np.asarray(getattr(self, name), dtype=float)
            )
        f = self.fidelity_series
        if f.size and (f.min() < -1e-10 or f.max() > 1 + 1e-10):
            raise ValueError("fidelity series leaves [0, 1] beyond tolerance")
        e = self.entropy_series
        if e.size and e.min() < -1e-10:
            raise ValueError("entropy series goes negative beyond tolerance")
        dim = self.metadata.get("dim")
        if dim and e.size and e.max() > 1 - 1.0 / dim + 1e-10:
            raise ValueError("entropy series exceeds the 1 - 1/D bound")


def fidelity(rho: np.ndarray, psi0: np.ndarray) -> float:
    """Overlap <psi0| rho |psi0> of a state with a reference pure state."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi0, dtype=complex).reshape(-1)
    if rho.shape != (psi.shape[0], psi.shape[0]):
        raise DimensionMismatch(
            f"state {rho.shape} does not match vector of length {psi.shape[0]}"
        )
    val = complex(psi.conj() @ rho @ psi)
    assert abs(val.imag) <= 1e-10, f"fidelity has imaginary part {val.imag:.3e}"
    return float(val.real)


def linear_entropy(rho: np.ndarray) -> float:
    """tr(rho) - tr(rho^2); vanishes exactly on pure states."""
    rho = np.asarray(rho, dtype=complex)
    tr = np.trace(rho).real
    tr2 = np.einsum("ij,ji->", rho, rho).real
    return float(tr - tr2)


def register_energy(rho: np.ndarray, h: np.ndarray) -> float:
    """Energy tr(rho H) for a Hermitian register Hamiltonian."""
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, rtol=1e-10):
        raise NotHermitian("energy requires a Hermitian operator")
    if rho.shape != h.shape:
        raise DimensionMismatch("state and Hamiltonian sizes differ")
    return float(np.einsum("ij,ji->", rho, h).real)


def tau_inverse_n(liouv: Liouvillian, rho: np.ndarray, n_max: int) -> np.ndarray:
    """Coefficients 1/tau_n^n of the short-time entropy expansion

        delta(t) = sum_n t^n / (n! tau_n^n),
        1/tau_n^n = -tr sum_{k=0}^n C(n,k) L^{n-k}(rho) L^k(rho),

    for n = 1..n_max, computed by repeated application of the generator.
    """
    if n_max < 1:
        raise TooLarge(f"n_max must be >= 1, got {n_max}")
    if n_max > N_MAX:
        raise TooLarge(f"n_max must be <= {N_MAX}, got {n_max}")
    rho = np.asarray(rho, dtype=complex)
    powers = [rho]
    for _ in range(n_max):
        powers.append(liouv.apply(powers[-1]))
    out = np.empty(n_max, dtype=float)
    for n in range(1, n_max + 1):
        acc = 0.0
        for k in range(n + 1):
            acc += comb(n, k) * np.einsum(
                "ij,ji->", powers[n - k], powers[k]
            ).real
        out[n - 1] = -acc
    return out


def pure_decoherence_rate(lindblad: LindbladSet, psi: np.ndarray) -> float:
    """First-order decoherence rate of a pure state,

        1/tau_1 = 2 sum_k lambda_k (<L_k^+ L_k> - |<L_k>|^2),

    a sum of nonnegative variance terms; zero exactly when psi is a
    simultaneous eigenvector of every Lindblad operator.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    total = 0.0
    for term in lindblad:
        if term.op.shape[0] != psi.shape[0]:
            raise DimensionMismatch("Lindblad operator does not match state")
        lpsi = term.op @ psi
        mean = complex(psi.conj() @ lpsi)
        second = float((lpsi.conj() @ lpsi).real)
        total += term.rate * (second - abs(mean) ** 2)
    return 2.0 * total


def decoherence_report(
    liouv: Liouvillian,
    trajectory,
    psi0: np.ndarray,
    n_max: int = 2,
) -> DecoherenceReport:
    """Evaluate all standard diagnostics along a trajectory.

    The hierarchy coefficients are computed at the initial state; the
    three series run over the trajectory's snapshots.
    """
    taus = tau_inverse_n(liouv, trajectory.states[0], n_max)
    fids = np.array([fidelity(s, psi0) for s in trajectory.states])
    ents = np.array([linear_entropy(s) for s in trajectory.states])
    h = liouv.hamiltonian
    engs = np.array([register_energy(s, h) for s in trajectory.states])
    return DecoherenceReport(
        tau_inverse=taus,
        fidelity_series=fids,
        entropy_series=ents,
        energy_series=engs,
        metadata={"n_max": n_max, "dim": liouv.dim},
    )

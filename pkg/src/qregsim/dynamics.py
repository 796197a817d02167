"""Time evolution: fixed-step integration, exact propagation, and the
closed-form solver for registers whose cell operators are normal and
mutually commuting (pure dephasing).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .bath import BathSpec
from .errors import (
    DimensionMismatch,
    NotSimultaneouslyDiagonalizable,
    TooSmall,
    UnstableStep,
)
from .linalg import (
    dag,
    expm_action,
    frob,
    hermiticity_defect,
    is_hermitian,
    unvec,
    vec,
)
from .liouvillian import Liouvillian, superoperator_matrix
from .register import RegisterModel, register_hamiltonian

# A step is flagged as unstable once the trace drifts beyond this bound.
TRACE_TOL = 1e-6
# Warn when dt * (spectral scale) exceeds this, signalling a too-coarse grid.
STABILITY_BUDGET = 0.1
# Default snapshot stride: keep every tenth accepted step.
DEFAULT_STRIDE = 10


@dataclass(frozen=True)
class Trajectory:
    """Snapshots of a density-matrix evolution on a uniform time grid.

    Every stored state must satisfy the density-matrix invariants
    (|tr - 1| <= 1e-8, min eigenvalue >= -1e-7, Hermiticity defect
    <= 1e-9); construction fails otherwise.
    """

    times: np.ndarray
    states: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states, dtype=complex)
        if s.ndim != 3 or s.shape[1] != s.shape[2]:
            raise DimensionMismatch(f"states must be (k, d, d), got {s.shape}")
        if t.ndim != 1 or t.shape[0] != s.shape[0]:
            raise DimensionMismatch("times and states lengths differ")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)
        for k in range(s.shape[0]):
            check_state(s[k])

    def __len__(self):
        return self.times.shape[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _as_density(rho0: np.ndarray, dim: int) -> np.ndarray:
    rho = np.asarray(rho0, dtype=complex)
    if rho.ndim == 1:
        if rho.shape[0] != dim:
            raise DimensionMismatch(
                f"state vector has length {rho.shape[0]}, expected {dim}"
            )
        rho = np.outer(rho, rho.conj())
    if rho.shape != (dim, dim):
        raise DimensionMismatch(
            f"state must be {dim}x{dim}, got {rho.shape}"
        )
    return rho


def _spectral_scale(liouv: Liouvillian) -> float:
    """Cheap stiffness estimate: max rate plus Hamiltonian spectral radius."""
    h_norm = float(np.linalg.norm(liouv.hamiltonian, 2))
    return liouv.lindblad.max_rate() + h_norm


def integrate(
    liouv: Liouvillian,
    rho0: np.ndarray,
    t_end: float,
    dt: float,
    stride: int = DEFAULT_STRIDE,
) -> Trajectory:
    """Evolve rho0 with classical fixed-step RK4 and record snapshots.

    Snapshots always include t = 0 and t = t_end.  After each step the
    state is re-Hermitized and trace-renormalized; a trace drift beyond
    TRACE_TOL before renormalization raises UnstableStep.
    """
    if dt <= 0:
        raise TooSmall(f"dt must be positive, got {dt}")
    if t_end < 0:
        raise TooSmall(f"t_end must be nonnegative, got {t_end}")
    if stride < 1:
        raise TooSmall(f"stride must be >= 1, got {stride}")
    rho = _as_density(rho0, liouv.dim)
    n_steps = max(int(round(t_end / dt)), 0) if t_end > 0 else 0
    if t_end > 0 and n_steps == 0:
        n_steps = 1
    h = t_end / n_steps if n_steps else 0.0
    scale = _spectral_scale(liouv)
    if n_steps and h * scale > STABILITY_BUDGET:
        warnings.warn(
            f"dt * spectral scale = {h * scale:.3g} exceeds "
            f"{STABILITY_BUDGET}; results may be inaccurate",
            RuntimeWarning,
            stacklevel=2,
        )
    times = [0.0]
    states = [rho.copy()]
    f = liouv.apply
    max_drift = 0.0
    for k in range(1, n_steps + 1):
        k1 = f(rho)
        k2 = f(rho + 0.5 * h * k1)
        k3 = f(rho + 0.5 * h * k2)
        k4 = f(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        tr = complex(np.trace(rho))
        drift = abs(tr - 1.0)
        if drift > TRACE_TOL:
            raise UnstableStep(
                f"trace drifted to {tr:.8f} at step {k} (t = {k * h:.6g}); "
                f"reduce dt"
            )
        max_drift = max(max_drift, drift)
        rho = 0.5 * (rho + dag(rho))
        rho = rho / tr.real
        if k % stride == 0 or k == n_steps:
            times.append(k * h)
            states.append(rho.copy())
    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        metadata={
            "method": "rk4",
            "dt": h,
            "n_steps": n_steps,
            "stride": stride,
            "error_estimate": max_drift,
        },
    )


def propagate_exact(liouv: Liouvillian, rho0: np.ndarray, t: float) -> np.ndarray:
    """Evolve rho0 to time t through the dense superoperator exponential.

    Reference-quality propagation for small registers; the superoperator
    guard (D <= 64) applies.
    """
    rho = _as_density(rho0, liouv.dim)
    m = superoperator_matrix(liouv)
    return unvec(expm_action(m, float(t), vec(rho)), liouv.dim)


def _dephasing_frame(model: RegisterModel) -> tuple[np.ndarray, np.ndarray]:
    """Return (w, v) with w the cell-op eigenvalues and v a unitary frame
    in which the cell operator is diagonal.

    Requires the cell operator to be normal; otherwise the register is not
    simultaneously diagonalizable and the closed form does not apply.
    """
    a = np.asarray(model.cell_op, dtype=complex)
    scale = max(1.0, float(np.abs(a).max()))
    if not np.allclose(a @ dag(a), dag(a) @ a, atol=1e-12 * scale * scale):
        raise NotSimultaneouslyDiagonalizable(
            "cell operator must be normal for the dephasing solver"
        )
    if is_hermitian(a, rtol=1e-12):
        w_r, v = np.linalg.eigh(a)
        return w_r.astype(complex), v
    # Normal but not Hermitian: the complex Schur form is diagonal with a
    # unitary frame.
    import scipy.linalg

    t, z = scipy.linalg.schur(a, output="complex")
    off = t - np.diag(np.diag(t))
    if frob(off) > 1e-10 * max(1.0, frob(t)):
        raise NotSimultaneouslyDiagonalizable(
            "cell operator is not unitarily diagonalizable"
        )
    return np.diag(t).copy(), z


def dephasing_solve(
    model: RegisterModel,
    spec: BathSpec,
    rho0: np.ndarray,
    times: np.ndarray,
) -> Trajectory:
    """Closed-form evolution when every Lindblad operator commutes with
    every other and with the Hamiltonian (mutually commuting cell ops).

    In the joint eigenbasis the matrix element between configurations
    b and b' evolves as exp{C t} with

        C = i (E_b' - E_b)                      Hamiltonian + Lamb phases
          + <x, y>_Gm + <y, x>_Gp^T             cross terms
          - (<x, x> + <y, y>) / 2 per kernel    decay

    where x = alpha(b), y = alpha(b') are the cell-op eigenvalue vectors
    and <u, w>_M = sum_ij M_ij u_i conj(w_j).  Re C <= 0 is the decay rate
    -G/2; Im C carries the bath-induced coherent phases.
    """
    rho = _as_density(rho0, model.dim)
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.shape[0] == 0:
        raise DimensionMismatch("times must be a nonempty 1-d array")
    if spec.n != model.n_cells:
        raise DimensionMismatch("bath size does not match the register")
    w_cell, v_cell = _dephasing_frame(model)
    d_cell = model.cell_dim
    n = model.n_cells
    dim = model.dim
    # Per-configuration eigenvalue table: alpha[b, i] for joint index b,
    # digit 0 the leftmost (most significant) cell.
    digits = np.empty((dim, n), dtype=int)
    idx = np.arange(dim)
    for i in range(n):
        shift = d_cell ** (n - 1 - i)
        digits[:, i] = (idx // shift) % d_cell
    alpha = w_cell[digits]  # (dim, n) complex
    # Frame change to the joint eigenbasis (skipped when already there).
    if np.allclose(v_cell, np.eye(d_cell)):
        frame = None
    else:
        frame = v_cell
        for _ in range(n - 1):
            frame = np.kron(frame, v_cell)
        rho = dag(frame) @ rho @ frame
    # Hamiltonian energies: the full register Hamiltonian must be diagonal
    # in the joint frame for the closed form to hold.
    h_full = register_hamiltonian(model)
    h_frame = dag(frame) @ h_full @ frame if frame is not None else h_full
    h_off = h_frame - np.diag(np.diag(h_frame))
    if frob(h_off) > 1e-10 * max(1.0, frob(h_frame)):
        raise NotSimultaneouslyDiagonalizable(
            "register Hamiltonian is not diagonal in the cell-op eigenbasis"
        )
    e = np.real(np.diag(h_frame))
    if spec.has_lamb_shift:
        dm = spec.delta_minus if spec.delta_minus is not None else 0.0
        dp = spec.delta_plus if spec.delta_plus is not None else 0.0
        d_tot = np.asarray(dm) + np.asarray(dp)
        # <b| dH |b> = sum_ij D_ij conj(alpha_i) alpha_j (diagonal because
        # products of commuting diagonal operators stay diagonal).
        e = e + np.einsum("bi,ij,bj->b", alpha.conj(), d_tot, alpha).real
    w_im = e[None, :] - e[:, None]  # element (b, b') rotates as e^{i(E'-E)t}
    # Dissipative kernel contractions <u, w>_M = sum_ij M_ij u_i conj(w_j):
    # the minus sector pairs <x, y>_Gm, the plus sector <y, x>_{Gp^T}.
    gm = spec.gamma_minus
    gpt = spec.gamma_plus.T
    s_minus = np.einsum("bi,ij,cj->bc", alpha, gm, alpha.conj())
    s_plus = np.einsum("ci,ij,bj->bc", alpha, gpt, alpha.conj())
    diag_sum = np.real(np.diagonal(s_minus) + np.diagonal(s_plus))
    c = (
        1j * w_im
        + s_minus
        + s_plus
        - 0.5 * (diag_sum[:, None] + diag_sum[None, :])
    )
    states = np.empty((t.shape[0], dim, dim), dtype=complex)
    for k, tk in enumerate(t):
        s = rho * np.exp(c * float(tk))
        if frame is not None:
            s = frame @ s @ dag(frame)
        states[k] = s
    return Trajectory(times=t, states=states, metadata={"method": "dephasing"})


def state_defect_report(rho: np.ndarray) -> dict[str, float]:
    """Trace, positivity, and Hermiticity defects of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    herm = hermiticity_defect(rho)
    sym = 0.5 * (rho + dag(rho))
    eigs = np.linalg.eigvalsh(sym)
    return {
        "trace_defect": abs(complex(np.trace(rho)) - 1.0),
        "min_eigenvalue": float(eigs.min()),
        "hermiticity_defect": float(herm),
    }


def check_state(rho: np.ndarray) -> None:
    """Raise UnstableStep unless rho satisfies the state invariants:
    |tr - 1| <= 1e-8, min eigenvalue >= -1e-7, Hermiticity defect <= 1e-9.
    """
    rep = state_defect_report(rho)
    if rep["trace_defect"] > 1e-8:
        raise UnstableStep(f"trace defect {rep['trace_defect']:.3e} > 1e-8")
    if rep["min_eigenvalue"] < -1e-7:
        raise UnstableStep(
            f"negative eigenvalue {rep['min_eigenvalue']:.3e} < -1e-7"
        )
    if rep["hermiticity_defect"] > 1e-9:
        raise UnstableStep(
            f"hermiticity defect {rep['hermiticity_defect']:.3e} > 1e-9"
        )

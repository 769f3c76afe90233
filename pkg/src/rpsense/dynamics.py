"""Master-equation propagation and reaction-weighted yield integrals.

The normalized state rho~_t obeys the trace-preserving equation

    d rho~/dt = -i [H_B, rho~] - kappa_ST (Q_S rho~ + rho~ Q_S - 2 Q_S rho~ Q_S)

integrated with fixed-step classical RK4 on the reproduction grid
(t in [0, 10/k] split into 10000 intervals by default).  The physical state
rho_t = e^{-kt} rho~_t is never materialized; all reaction-weighted integrals
carry the weight k e^{-kt} explicitly.

Internally the propagation runs in the singlet-triplet product basis, where
Q_S is diagonal and the dephasing term reduces to block operations.  Stored
states are transformed back to the declared tensor basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spinmodel import RadicalPairModel, build_hamiltonian, st_basis


@dataclass(frozen=True)
class TimeGrid:
    """Fixed propagation grid: t from 0 to t_max_over_k/k in `steps` intervals.

    `coherence_stride` controls how often states are retained for the
    coherence integral (1 = every step); it must divide `steps`.
    """

    t_max_over_k: float = 10.0
    steps: int = 10000
    coherence_stride: int = 1

    def __post_init__(self):
        if self.t_max_over_k <= 0:
            raise ValueError("t_max_over_k must be > 0")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.coherence_stride < 1 or self.steps % self.coherence_stride != 0:
            raise ValueError("coherence_stride must be >= 1 and divide steps")

    def times(self, rate_k: float = 1.0) -> np.ndarray:
        """All grid times (steps + 1 points) in absolute units."""
        return np.linspace(0.0, self.t_max_over_k / rate_k, self.steps + 1)

    def stride_times(self, rate_k: float = 1.0) -> np.ndarray:
        return self.times(rate_k)[:: self.coherence_stride]


@dataclass
class Trajectory:
    """Result of one propagation: per-step singlet probability plus state
    snapshots at coherence-stride points (in the tensor basis)."""

    grid: TimeGrid
    p_singlet: np.ndarray
    states: np.ndarray | None
    model: RadicalPairModel
    field_b: float
    trace_drift: float


@dataclass(frozen=True)
class YieldStats:
    """Per-model scalar summary of the reaction yield integrals."""

    Y: float
    dY: float
    dY_dB: float


class PropagationError(RuntimeError):
    """Raised when the integration produces non-finite values."""

    def __init__(self, step: int, max_entry: float):
        super().__init__(
            f"non-finite state at step {step} (max finite entry {max_entry:g})"
        )
        self.step = step
        self.max_entry = max_entry


def _rhs_batch(g, rho, two_kappa, d_nuc, out=None):
    """Batched right-hand side for Hermitian rho.

    rhs = G rho + (G rho)^dag + 2 kappa Q_S rho Q_S with G = -iH - kappa Q_S;
    in the S-T basis Q_S rho Q_S is the upper-left d_nuc block."""
    a = np.matmul(g, rho)
    r = a + np.conj(np.swapaxes(a, -1, -2))
    r[..., :d_nuc, :d_nuc] += two_kappa * rho[..., :d_nuc, :d_nuc]
    return r


def propagate_batch(
    h_st: np.ndarray,
    kappas: np.ndarray,
    d_nuc: int,
    grid: TimeGrid,
    rate_k: float = 1.0,
    stride_observer=None,
    store_states: bool = False,
):
    """RK4-propagate a batch of models given Hamiltonians in the S-T basis.

    h_st: (m, d, d) Hermitian Hamiltonians; kappas: (m,) dephasing rates.
    The initial state is Q_S / d_nuc for every batch element.

    Returns (p_singlet (m, steps+1), trace_drift (m,), bad_step (m,),
    states (n_stride, m, d, d) in the S-T basis if store_states).
    `stride_observer(j, rho_batch)` is called at every stride point j with the
    renormalized batch of S-T-basis states (read-only).

    Non-finite blow-up of one batch element is recorded in bad_step (first
    offending step, -1 if none) and does not abort the other elements.
    """
    m, d, _ = h_st.shape
    dt = grid.t_max_over_k / rate_k / grid.steps
    stride = grid.coherence_stride

    kap = np.asarray(kappas, dtype=float).reshape(m, 1, 1)
    g = -1j * h_st.astype(complex, copy=True)
    idx = np.arange(d_nuc)
    g[:, idx, idx] -= kap[:, 0, 0, None]
    two_kappa = 2.0 * kap

    rho = np.zeros((m, d, d), dtype=complex)
    rho[:, idx, idx] = 1.0 / d_nuc

    p = np.empty((m, grid.steps + 1))
    p[:, 0] = 1.0
    drift = np.zeros(m)
    bad_step = np.full(m, -1, dtype=int)

    n_stride = grid.steps // stride + 1
    states = np.empty((n_stride, m, d, d), dtype=complex) if store_states else None
    if store_states:
        states[0] = rho
    if stride_observer is not None:
        stride_observer(0, rho)

    sixth = dt / 6.0
    half = dt / 2.0
    # blown-up elements are flagged via bad_step and keep iterating as NaN;
    # suppress the resulting overflow/invalid warnings
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        _propagate_steps(
            g, rho, two_kappa, d_nuc, grid, stride, sixth, half, dt,
            p, drift, bad_step, states, store_states, stride_observer,
        )
    return p, drift, bad_step, states


def _propagate_steps(
    g, rho, two_kappa, d_nuc, grid, stride, sixth, half, dt,
    p, drift, bad_step, states, store_states, stride_observer,
):
    for step in range(1, grid.steps + 1):
        k1 = _rhs_batch(g, rho, two_kappa, d_nuc)
        k2 = _rhs_batch(g, rho + half * k1, two_kappa, d_nuc)
        k3 = _rhs_batch(g, rho + half * k2, two_kappa, d_nuc)
        k4 = _rhs_batch(g, rho + dt * k3, two_kappa, d_nuc)
        rho = rho + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        rho = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
        trace = np.einsum("mii->m", rho).real
        finite = np.isfinite(trace)
        newly_bad = (~finite) & (bad_step < 0)
        if newly_bad.any():
            bad_step[newly_bad] = step
        np.maximum(drift, np.where(finite, np.abs(trace - 1.0), drift), out=drift)
        rho /= np.where(finite, trace, 1.0)[:, None, None]
        p[:, step] = np.einsum("mii->m", rho[:, :d_nuc, :d_nuc]).real
        if step % stride == 0:
            j = step // stride
            if store_states:
                states[j] = rho
            if stride_observer is not None:
                stride_observer(j, rho)


def propagate(
    model: RadicalPairModel,
    B: float,
    grid: TimeGrid,
    keep_states: bool = True,
) -> Trajectory:
    """Propagate rho~_t for one model at field B over the given grid.

    States are retained at coherence-stride points (in the tensor basis) when
    keep_states is True.  Raises PropagationError on non-finite blow-up."""
    u = st_basis(model)
    h = build_hamiltonian(model, B)
    h_st = (u.conj().T @ h @ u)[None, :, :]
    p, drift, bad_step, states = propagate_batch(
        h_st,
        np.array([model.kappa_st]),
        model.d_nuc,
        grid,
        rate_k=model.rate_k,
        store_states=keep_states,
    )
    if bad_step[0] >= 0:
        step = int(bad_step[0])
        finite = p[0][np.isfinite(p[0])]
        raise PropagationError(step, float(np.max(np.abs(finite), initial=0.0)))
    out_states = None
    if keep_states:
        out_states = np.einsum("ij,sjk,lk->sil", u, states[:, 0], u.conj())
    return Trajectory(
        grid=grid,
        p_singlet=p[0],
        states=out_states,
        model=model,
        field_b=B,
        trace_drift=float(drift[0]),
    )


def reaction_weights(grid: TimeGrid, rate_k: float) -> np.ndarray:
    """Reaction weight k e^{-kt} on the full grid."""
    return rate_k * np.exp(-rate_k * grid.times(rate_k))


def yield_from_p(p: np.ndarray, grid: TimeGrid, rate_k: float) -> float:
    w = reaction_weights(grid, rate_k)
    dt = grid.t_max_over_k / rate_k / grid.steps
    return float(np.trapezoid(w * p, dx=dt))


def uncertainty_from_p(p: np.ndarray, grid: TimeGrid, rate_k: float) -> float:
    w = reaction_weights(grid, rate_k)
    dt = grid.t_max_over_k / rate_k / grid.steps
    var = np.trapezoid(w * p * (1.0 - p), dx=dt)
    return float(np.sqrt(max(var, 0.0)))


def singlet_yield(traj: Trajectory) -> float:
    """Singlet yield Y: trapezoidal integral of k e^{-kt} Tr{rho~_t Q_S}."""
    return yield_from_p(traj.p_singlet, traj.grid, traj.model.rate_k)


def yield_uncertainty(traj: Trajectory) -> float:
    """Quantum yield uncertainty dY = sqrt(int k e^{-kt} p(1-p) dt)."""
    return uncertainty_from_p(traj.p_singlet, traj.grid, traj.model.rate_k)


def yield_derivative(model: RadicalPairModel, grid: TimeGrid) -> float:
    """Low-field sensitivity |dY/dB| = |Y(B=k) - Y(B=0)| / k."""
    k = model.rate_k
    y0 = singlet_yield(propagate(model, 0.0, grid, keep_states=False))
    y1 = singlet_yield(propagate(model, k, grid, keep_states=False))
    return abs(y1 - y0) / k

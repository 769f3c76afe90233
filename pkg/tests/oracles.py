"""Independent reference implementations used to freeze expected values.

The propagation oracle vectorizes the master-equation generator into a
d^2 x d^2 Liouvillian and applies its exact matrix exponential per time step,
so its only error w.r.t. the continuous equation is scipy's expm accuracy.
It shares no code with the RK4 path under test.
"""

import numpy as np
from scipy.linalg import expm

from rpsense.dynamics import TimeGrid
from rpsense.spinmodel import (
    RadicalPairModel,
    build_hamiltonian,
    build_singlet_projector,
)


def liouvillian(model: RadicalPairModel, B: float) -> np.ndarray:
    """Column-major vectorized generator of the trace-preserving equation."""
    d = model.dim
    h = build_hamiltonian(model, B)
    q_s, _ = build_singlet_projector(model)
    eye = np.eye(d)
    lv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    lv -= model.kappa_st * (
        np.kron(eye, q_s) + np.kron(q_s.T, eye) - 2.0 * np.kron(q_s.T, q_s)
    )
    return lv


def expm_p_singlet(model: RadicalPairModel, B: float, grid: TimeGrid) -> np.ndarray:
    """Tr{rho~_t Q_S} on the grid via exact per-step matrix exponentials."""
    q_s, _ = build_singlet_projector(model)
    dt = grid.t_max_over_k / model.rate_k / grid.steps
    step = expm(liouvillian(model, B) * dt)
    rho = (q_s / model.d_nuc).reshape(-1, order="F")
    q_row = q_s.T.reshape(-1, order="F")  # tr(Q_S rho) = q_row . vec(rho)
    p = np.empty(grid.steps + 1)
    p[0] = np.real(q_row @ rho)
    for i in range(1, grid.steps + 1):
        rho = step @ rho
        p[i] = np.real(q_row @ rho)
    return p


def weighted_trapezoid(values: np.ndarray, grid: TimeGrid, rate_k: float) -> float:
    """Reaction-weighted trapezoid used to turn oracle p(t) into yields."""
    t = grid.times(rate_k)
    return float(np.trapezoid(rate_k * np.exp(-rate_k * t) * values, t))


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def variance(rho: np.ndarray, a: np.ndarray) -> float:
    mean = np.trace(rho @ a).real
    return float(np.trace(rho @ a @ a).real - mean**2)

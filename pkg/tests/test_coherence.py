import numpy as np
import pytest

from oracles import (
    random_density_matrix,
    random_hermitian,
    random_pure_state,
    variance,
)
from rpsense.coherence import (
    basis_wy_coherence,
    matrix_sqrt_psd,
    qubit_l1_example,
    reaction_averaged_coherence,
    st_coherence,
    st_coherence_stbasis_batch,
    wy_skew_information,
)
from rpsense.dynamics import TimeGrid, propagate, yield_uncertainty
from rpsense.spinmodel import (
    NuclearSpec,
    RadicalPairModel,
    build_hamiltonian,
    build_singlet_projector,
    initial_state,
)


def test_sqrt_identity_and_projector():
    eye = np.eye(6, dtype=complex) / 6
    assert np.abs(matrix_sqrt_psd(eye) - np.eye(6) / np.sqrt(6)).max() < 1e-14
    rng = np.random.default_rng(0)
    pure = random_pure_state(rng, 5)
    # sqrt amplifies near-zero eigenvalue roundoff as sqrt(eps)
    assert np.abs(matrix_sqrt_psd(pure) - pure).max() < 1e-7


def test_sqrt_reconstructs_random_psd():
    rng = np.random.default_rng(1)
    for _ in range(20):
        rho = random_density_matrix(rng, 8)
        s = matrix_sqrt_psd(rho)
        assert np.linalg.norm(s @ s - rho) < 1e-10


def test_sqrt_rejects_indefinite():
    bad = np.diag([1.5, -0.5]).astype(complex)
    with pytest.raises(ValueError, match="not PSD"):
        matrix_sqrt_psd(bad)


def test_skew_information_basic_cases():
    rng = np.random.default_rng(2)
    a = random_hermitian(rng, 4)
    w, v = np.linalg.eigh(a)
    diag_rho = v @ np.diag(rng.dirichlet(np.ones(4))) @ v.conj().T
    assert wy_skew_information(diag_rho, a) < 1e-12
    rho = random_density_matrix(rng, 4)
    assert wy_skew_information(rho, np.eye(4, dtype=complex)) < 1e-14
    with pytest.raises(ValueError, match="dimension mismatch"):
        wy_skew_information(rho, np.eye(3, dtype=complex))


def test_skew_information_variance_bound_and_pure_saturation():
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = int(rng.integers(2, 9))
        a = random_hermitian(rng, d)
        rho = random_density_matrix(rng, d)
        assert wy_skew_information(rho, a) <= variance(rho, a) + 1e-9
        pure = random_pure_state(rng, d)
        assert wy_skew_information(pure, a) == pytest.approx(
            variance(pure, a), rel=1e-7, abs=1e-8
        )


def test_st_coherence_block_diagonal_states():
    m = RadicalPairModel(nuclei=(NuclearSpec(1.0),))
    q_s, q_t = build_singlet_projector(m)
    assert st_coherence(initial_state(m), q_s, q_t) < 1e-12
    mixed = np.eye(m.dim, dtype=complex) / m.dim
    assert st_coherence(mixed, q_s, q_t) < 1e-12
    # large uncertainty without coherence: 2 (Delta Q_S)^2 = 3/8 for 1/d
    assert 2 * variance(mixed, q_s) == pytest.approx(3 / 8, abs=1e-12)


def test_st_coherence_maximal_superposition():
    m = RadicalPairModel()
    q_s, q_t = build_singlet_projector(m)
    s2 = 1 / np.sqrt(2)
    singlet = np.array([0, s2, -s2, 0])
    t0 = np.array([0, s2, s2, 0])
    psi = (singlet + t0) / np.sqrt(2)
    rho = np.outer(psi, psi.conj()).astype(complex)
    assert st_coherence(rho, q_s, q_t) == pytest.approx(0.5, abs=1e-10)


def test_projector_complement_symmetry():
    rng = np.random.default_rng(4)
    m = RadicalPairModel(nuclei=(NuclearSpec(1.0),))
    q_s, q_t = build_singlet_projector(m)
    for _ in range(20):
        rho = random_density_matrix(rng, m.dim)
        i_s = wy_skew_information(rho, q_s)
        i_t = wy_skew_information(rho, q_t)
        assert abs(i_s - i_t) < 1e-10


def test_st_coherence_variance_bound_and_saturation():
    rng = np.random.default_rng(5)
    m = RadicalPairModel(nuclei=(NuclearSpec(1.0),))
    q_s, q_t = build_singlet_projector(m)
    for _ in range(50):
        rho = random_density_matrix(rng, m.dim)
        assert st_coherence(rho, q_s, q_t) <= 2 * variance(rho, q_s) + 1e-9
        pure = random_pure_state(rng, m.dim)
        assert st_coherence(pure, q_s, q_t) == pytest.approx(
            2 * variance(pure, q_s), abs=1e-8
        )


def test_block_unitary_invariance():
    rng = np.random.default_rng(6)
    m = RadicalPairModel(nuclei=(NuclearSpec(1.0),))
    q_s, q_t = build_singlet_projector(m)
    w, v = np.linalg.eigh(q_s)
    for _ in range(10):
        rho = random_density_matrix(rng, m.dim)
        # random unitary block-diagonal in the S/T eigenspaces of Q_S
        blocks = []
        for size in (6, 2):  # triplet eigenvalue 0 block first (eigh ascending)
            g = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
            q, _ = np.linalg.qr(g)
            blocks.append(q)
        u = v @ (np.block([
            [blocks[0], np.zeros((6, 2))],
            [np.zeros((2, 6)), blocks[1]],
        ])) @ v.conj().T
        rotated = u @ rho @ u.conj().T
        assert st_coherence(rotated, q_s, q_t) == pytest.approx(
            st_coherence(rho, q_s, q_t), abs=1e-10
        )


def test_st_basis_batch_agrees_with_generic():
    from rpsense.spinmodel import st_basis

    rng = np.random.default_rng(7)
    m = RadicalPairModel(nuclei=(NuclearSpec(1.0),))
    q_s, q_t = build_singlet_projector(m)
    u = st_basis(m)
    rhos = np.stack([random_density_matrix(rng, m.dim) for _ in range(8)])
    rhos_st = np.einsum("ji,sjk,kl->sil", u.conj(), rhos, u)
    batch = st_coherence_stbasis_batch(rhos_st, m.d_nuc)
    for rho, val in zip(rhos, batch):
        assert val == pytest.approx(st_coherence(rho, q_s, q_t), abs=1e-10)


def test_reaction_average_zero_hamiltonian():
    m = RadicalPairModel(nuclei=(NuclearSpec(0.0),), kappa_st=1.0)
    q_s, q_t = build_singlet_projector(m)
    traj = propagate(m, 0.0, TimeGrid(steps=500))
    rec = reaction_averaged_coherence(traj, q_s, q_t)
    assert np.abs(rec.c_st_instant).max() < 1e-12
    assert rec.c_st_avg < 1e-12


def test_pure_state_trajectory_saturates_bound():
    # kappa = 0 unitary evolution of a pure initial state saturates the
    # instantaneous bound, hence the reaction average equals 2 (dY)^2.
    m = RadicalPairModel(nuclei=(NuclearSpec(1.3),), exchange=0.4)
    q_s, q_t = build_singlet_projector(m)
    h = build_hamiltonian(m, 0.6)
    w, v = np.linalg.eigh(h)
    s2 = 1 / np.sqrt(2)
    psi0 = np.kron(np.array([0, s2, -s2, 0]), np.array([1.0, 0.0]))
    grid = TimeGrid(steps=2000)
    t = grid.times()
    phases = np.exp(-1j * np.outer(t, w))
    psi_t = (v @ (phases * (v.conj().T @ psi0)).T).T
    rhos = np.einsum("ti,tj->tij", psi_t, psi_t.conj())
    c = np.array([st_coherence(r, q_s, q_t) for r in rhos[::100]])
    var = np.array([2 * variance(r, q_s) for r in rhos[::100]])
    assert np.abs(c - var).max() < 1e-7

    p = np.einsum("tij,ji->t", rhos, q_s).real
    weights = np.exp(-t)
    c_all = np.array([st_coherence(r, q_s, q_t) for r in rhos])
    c_avg = np.trapezoid(c_all * weights, t)
    two_dy2 = 2 * np.trapezoid(weights * p * (1 - p), t)
    assert c_avg == pytest.approx(two_dy2, abs=1e-7)


def test_randomized_trajectory_respects_bound():
    from rpsense.montecarlo import SampleSpec, sample_model

    grid = TimeGrid(steps=2000)
    for seed in range(5):
        m = sample_model(seed, 0, SampleSpec(n_nuc=1, runs=1, seed=seed, grid=grid))
        q_s, q_t = build_singlet_projector(m)
        traj = propagate(m, 0.0, grid)
        rec = reaction_averaged_coherence(traj, q_s, q_t)
        dy = yield_uncertainty(traj)
        assert rec.c_st_avg <= 2 * dy * dy + 1e-3


def test_stride_convergence():
    m = RadicalPairModel(nuclei=(NuclearSpec(2.0),), exchange=1.0, kappa_st=0.2)
    q_s, q_t = build_singlet_projector(m)
    values = {}
    for stride in (1, 2, 4):
        traj = propagate(m, 0.0, TimeGrid(coherence_stride=stride))
        values[stride] = reaction_averaged_coherence(traj, q_s, q_t).c_st_avg
    assert abs(values[2] - values[1]) < 1e-4
    assert abs(values[4] - values[2]) < 1e-4


def test_requires_states():
    m = RadicalPairModel(nuclei=(NuclearSpec(1.0),))
    q_s, q_t = build_singlet_projector(m)
    traj = propagate(m, 0.0, TimeGrid(steps=100), keep_states=False)
    with pytest.raises(ValueError, match="without state retention"):
        reaction_averaged_coherence(traj, q_s, q_t)


def test_basis_coherence_cases():
    rng = np.random.default_rng(8)
    diag = np.diag(rng.dirichlet(np.ones(5))).astype(complex)
    assert basis_wy_coherence(diag) < 1e-12
    qubit = np.full((2, 2), 0.5, dtype=complex)
    assert basis_wy_coherence(qubit) == pytest.approx(0.5, abs=1e-12)


def test_eigengap_coherence_inequality():
    # g^2 C[rho] <= 2 (Delta A)^2 with g the minimal eigenvalue gap of A,
    # rho expressed in A's eigenbasis
    rng = np.random.default_rng(9)
    for _ in range(500):
        d = int(rng.integers(2, 6))
        a_vals = np.sort(rng.normal(size=d) * 3)
        gap = np.diff(a_vals).min()
        rho = random_density_matrix(rng, d)
        a_diag = np.diag(a_vals).astype(complex)
        lhs = gap**2 * basis_wy_coherence(rho)
        assert lhs <= 2 * variance(rho, a_diag) + 1e-9


def test_qubit_l1_example():
    assert qubit_l1_example(1.0, 0.0, 3.0, -1.0) == (0.0, 0.0)
    s2 = 1 / np.sqrt(2)
    unc, l1 = qubit_l1_example(s2, s2, 0.0, 1.0)
    assert unc == pytest.approx(0.5, abs=1e-12)
    assert l1 == pytest.approx(1.0, abs=1e-12)
    unc, l1 = qubit_l1_example(np.sqrt(3) / 2, 0.5, -1.0, 1.0)
    assert unc == pytest.approx(np.sqrt(3) / 2, abs=1e-12)
    assert l1 == pytest.approx(np.sqrt(3) / 2, abs=1e-12)
    with pytest.raises(ValueError, match="not normalized"):
        qubit_l1_example(1.0, 0.5, 0.0, 1.0)

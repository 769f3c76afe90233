"""Spin operators, projectors, Hamiltonians and initial states for a radical pair.

A radical pair consists of two electron spins (donor and acceptor) plus up to
``MAX_NUCLEI`` spin-1/2 nuclei.  All operators act on the full Hilbert space of
dimension d = 4 * 2**N_nuc, built by Kronecker lifting with the fixed ordering

    electron1 (x) electron2 (x) nucleus1 (x) ... (x) nucleusN

Units: hbar = 1, and all couplings and rates are expressed in units of the
recombination rate k.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import yaml

MAX_NUCLEI = 4

# spin-1/2 operators (sz = diag(+1/2, -1/2), "up" first)
_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_SZ = np.array([[0.5, 0], [0, -0.5]], dtype=complex)


class Site(enum.Enum):
    """Which electron a nucleus is hyperfine-coupled to."""

    DONOR = "donor"
    ACCEPTOR = "acceptor"


@dataclass(frozen=True)
class NuclearSpec:
    """One spin-1/2 nucleus: isotropic hyperfine constant and placement."""

    coupling: float
    site: Site = Site.DONOR

    def __post_init__(self):
        if not np.isfinite(self.coupling) or self.coupling < 0:
            raise ValueError(f"hyperfine coupling must be >= 0, got {self.coupling}")
        if not isinstance(self.site, Site):
            raise ValueError(f"site must be a Site, got {self.site!r}")


@dataclass(frozen=True)
class RadicalPairModel:
    """Full spin-system specification: nuclei, exchange, dephasing, rate.

    All parameters are in units of the recombination rate ``rate_k``
    (default 1).  Only spin-1/2 nuclei are supported.
    """

    nuclei: tuple[NuclearSpec, ...] = ()
    exchange: float = 0.0
    kappa_st: float = 0.0
    rate_k: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        if len(self.nuclei) > MAX_NUCLEI:
            raise ValueError(
                f"at most {MAX_NUCLEI} nuclei supported, got {len(self.nuclei)}"
            )
        if not np.isfinite(self.exchange):
            raise ValueError("exchange coupling must be finite")
        if not np.isfinite(self.kappa_st) or self.kappa_st < 0:
            raise ValueError(f"kappa_st must be >= 0, got {self.kappa_st}")
        if not np.isfinite(self.rate_k) or self.rate_k <= 0:
            raise ValueError(f"rate_k must be > 0, got {self.rate_k}")

    @property
    def n_nuc(self) -> int:
        return len(self.nuclei)

    @property
    def d_nuc(self) -> int:
        return 2 ** self.n_nuc

    @property
    def dim(self) -> int:
        return 4 * self.d_nuc


@dataclass(frozen=True)
class SpinOperators:
    """x, y, z components of both electron spins and each nuclear spin,
    lifted to the full d x d space."""

    dim: int
    s1: tuple[np.ndarray, np.ndarray, np.ndarray]
    s2: tuple[np.ndarray, np.ndarray, np.ndarray]
    nuclear: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...] = field(
        default=()
    )


def _kron_all(ops):
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _lift(op: np.ndarray, slot: int, n_slots: int) -> np.ndarray:
    factors = [op if i == slot else np.eye(2, dtype=complex) for i in range(n_slots)]
    return _kron_all(factors)


def build_spin_operators(model: RadicalPairModel) -> SpinOperators:
    """Build all lifted spin-component operators for the model."""
    n_slots = 2 + model.n_nuc
    comps = (_SX, _SY, _SZ)
    s1 = tuple(_lift(c, 0, n_slots) for c in comps)
    s2 = tuple(_lift(c, 1, n_slots) for c in comps)
    nuclear = tuple(
        tuple(_lift(c, 2 + j, n_slots) for c in comps) for j in range(model.n_nuc)
    )
    return SpinOperators(dim=model.dim, s1=s1, s2=s2, nuclear=nuclear)


def _dot(a, b):
    return sum(a[k] @ b[k] for k in range(3))


def build_singlet_projector(
    model: RadicalPairModel,
) -> tuple[np.ndarray, np.ndarray]:
    """Return (Q_S, Q_T): projectors onto the electronic singlet and triplet
    subspaces, lifted over the nuclei.  Q_S = 1/4 - s1.s2, Q_T = 1 - Q_S."""
    ops = build_spin_operators(model)
    eye = np.eye(model.dim, dtype=complex)
    q_s = 0.25 * eye - _dot(ops.s1, ops.s2)
    q_t = eye - q_s
    return q_s, q_t


def build_hamiltonian(model: RadicalPairModel, B: float) -> np.ndarray:
    """Spin Hamiltonian H = sum_j a_j s_site(j).I_j + B(s1z + s2z) + J s1.s2.

    B is the magnetic field along z, in frequency units (k = 1)."""
    ops = build_spin_operators(model)
    h = np.zeros((model.dim, model.dim), dtype=complex)
    for j, nuc in enumerate(model.nuclei):
        electron = ops.s1 if nuc.site is Site.DONOR else ops.s2
        h += nuc.coupling * _dot(electron, ops.nuclear[j])
    h += B * (ops.s1[2] + ops.s2[2])
    h += model.exchange * _dot(ops.s1, ops.s2)
    return h


def initial_state(model: RadicalPairModel) -> np.ndarray:
    """rho_0 = Q_S / Tr{Q_S}: electrons in the singlet, nuclei fully mixed."""
    q_s, _ = build_singlet_projector(model)
    return q_s / model.d_nuc


def st_basis(model: RadicalPairModel) -> np.ndarray:
    """Unitary whose columns are the singlet-triplet product basis.

    Columns 0..d_nuc-1 span the electronic singlet subspace and the rest the
    triplet subspace (T+, T0, T-), each tensored with the nuclear basis, so
    that U^dag Q_S U = diag(1, ..., 1, 0, ..., 0)."""
    s2i = 1 / np.sqrt(2)
    # columns: S, T+, T0, T- in the up-up, up-down, down-up, down-down basis
    u_e = np.array(
        [
            [0, 1, 0, 0],
            [s2i, 0, s2i, 0],
            [-s2i, 0, s2i, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )
    return np.kron(u_e, np.eye(model.d_nuc, dtype=complex))


# --- model files ------------------------------------------------------------

_MODEL_KEYS = {"nuclei", "J", "kappa_st", "k"}
_NUCLEUS_KEYS = {"a", "site"}


def model_from_dict(data: dict) -> RadicalPairModel:
    """Build a model from a parsed key-value tree, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ValueError("model file must contain a key-value mapping")
    unknown = set(data) - _MODEL_KEYS
    if unknown:
        raise ValueError(f"unknown model keys: {sorted(unknown)}")
    nuclei = []
    for i, entry in enumerate(data.get("nuclei") or []):
        if not isinstance(entry, dict):
            raise ValueError(f"nuclei[{i}] must be a mapping with keys a, site")
        extra = set(entry) - _NUCLEUS_KEYS
        if extra:
            raise ValueError(f"unknown keys in nuclei[{i}]: {sorted(extra)}")
        if "a" not in entry:
            raise ValueError(f"nuclei[{i}] is missing the coupling 'a'")
        site_name = entry.get("site", "donor")
        try:
            site = Site(str(site_name).lower())
        except ValueError:
            raise ValueError(
                f"nuclei[{i}].site must be 'donor' or 'acceptor', got {site_name!r}"
            ) from None
        nuclei.append(NuclearSpec(coupling=float(entry["a"]), site=site))
    return RadicalPairModel(
        nuclei=tuple(nuclei),
        exchange=float(data.get("J", 0.0)),
        kappa_st=float(data.get("kappa_st", 0.0)),
        rate_k=float(data.get("k", 1.0)),
    )


def load_model(path) -> RadicalPairModel:
    """Read a YAML model file (fields: nuclei = [{a, site}], J, kappa_st, k)."""
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    return model_from_dict(data if data is not None else {})

"""Randomized parameter study: sample radical-pair models, run the full
per-model pipeline, verify the coherence-uncertainty bound population-wide,
and extract empirical envelope constants.

Sampling (per run): hyperfine couplings a_j ~ U[0, 10], exchange J ~ U[-10, 10],
dephasing kappa_ST ~ U[0, 5]; each nucleus sits at the donor or acceptor with
probability 1/2, except the single-nucleus model where the nucleus is fixed at
the donor.  Per-run RNG streams are derived from (seed, run_index) with a
splitmix64 finalizer (documented in `mix_seed`), so a sweep is bitwise
deterministic for a fixed seed regardless of worker count or scheduling.

All scalar outputs (Y, dY, C_ST) are evaluated at the operating point B = 0;
the derivative compares B = k against B = 0.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coherence import st_coherence_stbasis_batch
from .dynamics import TimeGrid, propagate_batch, uncertainty_from_p, yield_from_p
from .spinmodel import (
    NuclearSpec,
    RadicalPairModel,
    Site,
    build_hamiltonian,
    st_basis,
)

WORKER_ENV_VAR = "RPSENSE_WORKERS"

# fixed work-unit size; independent of worker count so that batched linear
# algebra sees identical operand stacks for any degree of parallelism
BATCH_SIZE = 64

MAX_NUCLEI_A = 4  # CSV schema always carries a1..a4 / site1..site4 columns


@dataclass(frozen=True)
class SampleSpec:
    """Sweep configuration; ranges default to the randomized-study values."""

    n_nuc: int
    runs: int = 5000
    seed: int = 0
    grid: TimeGrid = field(default_factory=TimeGrid)
    a_range: tuple[float, float] = (0.0, 10.0)
    j_range: tuple[float, float] = (-10.0, 10.0)
    kappa_range: tuple[float, float] = (0.0, 5.0)

    def __post_init__(self):
        if not 1 <= self.n_nuc <= 4:
            raise ValueError(f"n_nuc must be in 1..4, got {self.n_nuc}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass(frozen=True)
class RunResult:
    """Per-run scalar summary plus the sampled model parameters."""

    run_index: int
    model: RadicalPairModel
    Y: float
    dY: float
    dY_dB: float
    c_st: float
    ratio: float
    flag: str = "ok"


@dataclass
class SweepResult:
    spec: SampleSpec
    results: list[RunResult]


@dataclass
class BoundReport:
    """Runs exceeding c_st <= 2 dY^2 + slack."""

    slack: float
    violations: list[tuple[int, float]]

    @property
    def count(self) -> int:
        return len(self.violations)

    @property
    def max_excess(self) -> float:
        return max((e for _, e in self.violations), default=0.0)


_MASK64 = (1 << 64) - 1


def mix_seed(seed: int, run_index: int) -> int:
    """64-bit per-run seed: splitmix64 finalizer of seed + index * golden.

    z = (seed + run_index * 0x9E3779B97F4A7C15) mod 2^64, then
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
    z *= 0x94D049BB133111EB; z ^= z >> 31."""
    z = (seed + run_index * 0x9E3779B97F4A7C15) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def sample_model(seed: int, run_index: int, spec: SampleSpec) -> RadicalPairModel:
    """Sample one model; draw order is a_1..a_n, J, kappa_ST, then one site
    coin per nucleus (skipped for n_nuc = 1, which is donor-coupled)."""
    rng = np.random.Generator(np.random.PCG64(mix_seed(seed, run_index)))
    couplings = [rng.uniform(*spec.a_range) for _ in range(spec.n_nuc)]
    exchange = rng.uniform(*spec.j_range)
    kappa = rng.uniform(*spec.kappa_range)
    if spec.n_nuc == 1:
        sites = [Site.DONOR]
    else:
        sites = [
            Site.DONOR if rng.integers(0, 2) == 0 else Site.ACCEPTOR
            for _ in range(spec.n_nuc)
        ]
    return RadicalPairModel(
        nuclei=tuple(
            NuclearSpec(coupling=a, site=s) for a, s in zip(couplings, sites)
        ),
        exchange=exchange,
        kappa_st=kappa,
    )


def _run_models(models, grid: TimeGrid, first_index: int = 0) -> list[RunResult]:
    """Run the full per-model pipeline on a batch of same-dimension models.

    Propagates at B = 0 (with on-the-fly coherence accumulation at stride
    points) and at B = k; numerical blow-up of one model flags that result
    without aborting the batch."""
    m = len(models)
    ref = models[0]
    if any(mod.n_nuc != ref.n_nuc or mod.rate_k != ref.rate_k for mod in models):
        raise ValueError("batched models must share n_nuc and rate_k")
    k = ref.rate_k
    d_nuc = ref.d_nuc
    u = st_basis(ref)
    ud = u.conj().T

    h0 = np.stack([ud @ build_hamiltonian(mod, 0.0) @ u for mod in models])
    h1 = np.stack([ud @ build_hamiltonian(mod, k) @ u for mod in models])
    kappas = np.array([mod.kappa_st for mod in models])

    n_stride = grid.steps // grid.coherence_stride + 1
    c_inst = np.empty((n_stride, m))

    def observe(j, rho_batch):
        c_inst[j] = st_coherence_stbasis_batch(rho_batch, d_nuc)

    p0, _, bad0, _ = propagate_batch(
        h0, kappas, d_nuc, grid, rate_k=k, stride_observer=observe
    )
    p1, _, bad1, _ = propagate_batch(h1, kappas, d_nuc, grid, rate_k=k)

    t_st = grid.stride_times(k)
    w_st = k * np.exp(-k * t_st)

    results = []
    for i, mod in enumerate(models):
        if bad0[i] >= 0 or bad1[i] >= 0:
            step = int(bad0[i]) if bad0[i] >= 0 else int(bad1[i])
            results.append(
                RunResult(
                    run_index=first_index + i,
                    model=mod,
                    Y=np.nan,
                    dY=np.nan,
                    dY_dB=np.nan,
                    c_st=np.nan,
                    ratio=np.nan,
                    flag=f"nonfinite:step={step}",
                )
            )
            continue
        y0 = yield_from_p(p0[i], grid, k)
        dy = uncertainty_from_p(p0[i], grid, k)
        y1 = yield_from_p(p1[i], grid, k)
        dy_db = abs(y1 - y0) / k
        c_st = float(np.trapezoid(c_inst[:, i] * w_st, t_st))
        ratio = y0 * dy / dy_db if dy_db > 0 else np.inf
        results.append(
            RunResult(
                run_index=first_index + i,
                model=mod,
                Y=y0,
                dY=dy,
                dY_dB=dy_db,
                c_st=c_st,
                ratio=ratio,
            )
        )
    return results


def run_one(model: RadicalPairModel, grid: TimeGrid) -> RunResult:
    """Full pipeline for a single model: Y, dY at B = 0, |dY/dB|, C_ST, ratio."""
    return _run_models([model], grid)[0]


def _sweep_chunk(spec: SampleSpec, start: int, stop: int) -> list[RunResult]:
    models = [sample_model(spec.seed, i, spec) for i in range(start, stop)]
    return _run_models(models, spec.grid, first_index=start)


def default_workers() -> int:
    value = os.environ.get(WORKER_ENV_VAR, "")
    if value.strip():
        return max(1, int(value))
    return 1


def sweep(spec: SampleSpec, workers: int | None = None) -> SweepResult:
    """Run the whole randomized study.

    Work is cut into fixed blocks of BATCH_SIZE runs; the block layout and the
    per-run RNG streams do not depend on the worker count, so the output is
    identical for any degree of parallelism."""
    if workers is None:
        workers = default_workers()
    bounds = [
        (lo, min(lo + BATCH_SIZE, spec.runs)) for lo in range(0, spec.runs, BATCH_SIZE)
    ]
    if workers <= 1 or len(bounds) == 1:
        chunks = [_sweep_chunk(spec, lo, hi) for lo, hi in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_chunk, spec, lo, hi) for lo, hi in bounds]
            chunks = [f.result() for f in futures]
    results = [r for chunk in chunks for r in chunk]
    return SweepResult(spec=spec, results=results)


def verify_bound(results: list[RunResult], slack: float) -> BoundReport:
    """List runs with c_st > 2 dY^2 + slack (flagged runs are skipped)."""
    violations = []
    for r in results:
        if r.flag != "ok":
            continue
        excess = r.c_st - 2.0 * r.dY * r.dY - slack
        if excess > 0:
            violations.append((r.run_index, excess))
    return BoundReport(slack=slack, violations=violations)


def envelope_coefficient(results: list[RunResult], exponent_m: float) -> float:
    """Empirical envelope constant: min over runs of ratio * c_st**m,
    excluding flagged runs and +inf-ratio sentinels."""
    values = [
        r.ratio * r.c_st ** exponent_m
        for r in results
        if r.flag == "ok" and np.isfinite(r.ratio)
    ]
    if not values:
        raise ValueError("no runs with finite sensitivity ratio")
    return float(min(values))


# --- CSV interchange ---------------------------------------------------------

CSV_HEADER = (
    ["run_index", "n_nuc"]
    + [f"a{i}" for i in range(1, MAX_NUCLEI_A + 1)]
    + [f"site{i}" for i in range(1, MAX_NUCLEI_A + 1)]
    + ["J", "kappa_st", "Y", "dY", "dY_dB", "c_st", "ratio", "flag"]
)


def _fmt(x: float) -> str:
    return repr(float(x))


def result_to_row(r: RunResult) -> list[str]:
    mod = r.model
    a_cols = [_fmt(n.coupling) for n in mod.nuclei]
    a_cols += [""] * (MAX_NUCLEI_A - len(a_cols))
    site_cols = [n.site.value for n in mod.nuclei]
    site_cols += [""] * (MAX_NUCLEI_A - len(site_cols))
    return (
        [str(r.run_index), str(mod.n_nuc)]
        + a_cols
        + site_cols
        + [
            _fmt(mod.exchange),
            _fmt(mod.kappa_st),
            _fmt(r.Y),
            _fmt(r.dY),
            _fmt(r.dY_dB),
            _fmt(r.c_st),
            _fmt(r.ratio),
            r.flag,
        ]
    )


def row_to_result(row: dict) -> RunResult:
    n_nuc = int(row["n_nuc"])
    nuclei = tuple(
        NuclearSpec(coupling=float(row[f"a{i}"]), site=Site(row[f"site{i}"]))
        for i in range(1, n_nuc + 1)
    )
    model = RadicalPairModel(
        nuclei=nuclei,
        exchange=float(row["J"]),
        kappa_st=float(row["kappa_st"]),
    )
    return RunResult(
        run_index=int(row["run_index"]),
        model=model,
        Y=float(row["Y"]),
        dY=float(row["dY"]),
        dY_dB=float(row["dY_dB"]),
        c_st=float(row["c_st"]),
        ratio=float(row["ratio"]),
        flag=row["flag"],
    )

"""Receptor-ligand signaling algebra: steady state, noise terms, and
quantum-limited design bounds.

A fraction Y of the reaction flux enters a sensing volume V containing R
membrane receptors with equilibrium constant K = k_b/k_f.  Requiring that the
ligand shift produced by a field change exceeds the quantum ligand noise gives
the standard quantum limit; additionally requiring the classical receptor
noise to stay below the quantum noise ("quantum-limited design") yields the
minimum receptor number and, at the optimum L = K, the design bounds R_min,
dB_min and the uncertainty product.

Dimensional contract: B is in frequency units (k = 1); K and L share one
concentration unit; V is in inverse-concentration units so that L*V is a
ligand count.  Degenerate inputs (dY = 0, dY/dB = 0, C_ST = 0) produce +inf
sentinels rather than errors so that sweep outputs stay filterable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ReceptorSystem:
    """Receptor-ligand system: equilibrium constant, receptor count, sensing
    volume, and ligand concentration."""

    K: float
    R: float
    V: float
    L: float

    def __post_init__(self):
        if self.K <= 0 or self.R <= 0 or self.V <= 0:
            raise ValueError("K, R, V must be > 0")
        if self.L < 0:
            raise ValueError("L must be >= 0")


@dataclass(frozen=True)
class SensingPoint:
    """Radical-pair operating point consumed by the design bounds."""

    Y: float
    dY_dB: float
    dY: float
    c_st: float

    def __post_init__(self):
        if not 0.0 <= self.Y <= 1.0:
            raise ValueError(f"Y must be in [0,1], got {self.Y}")
        if self.dY < 0 or self.dY_dB < 0 or self.c_st < 0:
            raise ValueError("dY, dY_dB and c_st must be >= 0")


@dataclass(frozen=True)
class TransductionReport:
    """All signal/noise terms and design bounds at the optimum L = K."""

    C: float
    deltaC_signal: float
    deltaC_classical: float
    deltaL_quantum: float
    deltaC_quantum: float
    dB_sql: float
    R_lower: float
    dB_min: float
    R_min: float
    R_min_weaver: float
    R_min_coherence_bound: float
    dB_min_coherence_bound: float
    uncertainty_product_exact: float
    uncertainty_product_paper: float


def steady_state_complexes(sys: ReceptorSystem) -> float:
    """Bound complexes C = R L / (L + K), the fixed point of
    dC/dt = k_f (R - C) L - k_b C."""
    return sys.R * sys.L / (sys.L + sys.K)


def ligand_shift(L: float, Y: float, dY_dB: float, deltaB: float) -> float:
    """Ligand concentration change Delta L = (L/Y) |dY/dB| deltaB."""
    if Y == 0:
        raise ValueError("Y must be nonzero")
    return (L / Y) * dY_dB * deltaB


def complex_shift(sys: ReceptorSystem, deltaL: float) -> float:
    """Complex-count change Delta C = K R / (L + K)^2 * Delta L."""
    return sys.K * sys.R / (sys.L + sys.K) ** 2 * deltaL


def classical_noise(sys: ReceptorSystem) -> float:
    """Poisson binding noise deltaC = sqrt(L K R) / (L + K)."""
    return math.sqrt(sys.L * sys.K * sys.R) / (sys.L + sys.K)


def quantum_ligand_noise(L: float, V: float, dY: float) -> float:
    """Quantum ligand noise sqrt(L/V) * dY inherited from the yield."""
    if V <= 0:
        raise ValueError("V must be > 0")
    return math.sqrt(L / V) * dY


def sql_sensitivity(point: SensingPoint, L: float, V: float) -> float:
    """Standard-quantum-limit bound dB >= Y dY / (|dY/dB| sqrt(L V))."""
    if point.dY_dB == 0:
        return math.inf
    return point.Y * point.dY / (point.dY_dB * math.sqrt(L * V))


def receptor_lower_bound(sys: ReceptorSystem, dY: float) -> float:
    """Quantum-limited design requirement R >= (L+K)^2 V / (K dY^2)."""
    if dY == 0:
        return math.inf
    return (sys.L + sys.K) ** 2 * sys.V / (sys.K * dY * dY)


def coherence_bounds(
    point: SensingPoint, K: float, V: float
) -> tuple[float, float, float, float]:
    """Coherence-based bounds: (R bound 8KV/C_ST, dB bound
    0.015/sqrt(KV C_ST), exact product R_min dB_min^2, and the quoted
    0.1/C_ST^{3/2}).

    The exact product and the quoted expression are reported side by side;
    they are not asserted equal (saturating both bounds gives a different
    constant and exponent than the quoted form)."""
    report = optimal_design(point, K, V)
    if point.c_st == 0:
        return math.inf, math.inf, report.uncertainty_product_exact, math.inf
    r_bound = 8.0 * K * V / point.c_st
    db_bound = 0.015 / math.sqrt(K * V * point.c_st)
    product_paper = 0.1 / point.c_st ** 1.5
    return r_bound, db_bound, report.uncertainty_product_exact, product_paper


def optimal_design(point: SensingPoint, K: float, V: float) -> TransductionReport:
    """Design bounds at the optimum L = K: dB_min, R_min, and both forms of
    the uncertainty product, plus the coherence bounds.

    Verifies the exact identity R_min dB_min^2 = (2Y/|dY/dB|)^2."""
    if K <= 0 or V <= 0:
        raise ValueError("K and V must be > 0")
    if point.dY == 0 or point.dY_dB == 0:
        db_min = 0.0 if point.dY == 0 and point.dY_dB > 0 else math.inf
        r_min = math.inf
        product = math.inf
    else:
        db_min = math.sqrt(1.0 / (K * V)) * point.Y * point.dY / point.dY_dB
        r_min = 4.0 * K * V / (point.dY * point.dY)
        product = r_min * db_min * db_min
        exact = (2.0 * point.Y / point.dY_dB) ** 2
        if abs(product - exact) > 1e-12 * max(abs(exact), 1.0):
            raise ArithmeticError(
                f"product identity violated: {product!r} vs {exact!r}"
            )
    if math.isfinite(db_min) and db_min > 0 and math.isfinite(r_min):
        r_min_weaver = (2.0 * point.Y / (point.dY_dB * db_min)) ** 2
    else:
        r_min_weaver = math.inf

    L = K
    if math.isfinite(r_min):
        sys = ReceptorSystem(K=K, R=r_min, V=V, L=L)
        c = steady_state_complexes(sys)
        delta_l = ligand_shift(L, point.Y, point.dY_dB, db_min) if point.Y else 0.0
        dc_signal = complex_shift(sys, delta_l)
        dc_classical = classical_noise(sys)
        dl_quantum = quantum_ligand_noise(L, V, point.dY)
        dc_quantum = complex_shift(sys, dl_quantum)
        r_lower = receptor_lower_bound(sys, point.dY)
    else:
        c = dc_signal = dc_classical = dc_quantum = math.inf
        dl_quantum = quantum_ligand_noise(L, V, point.dY)
        r_lower = math.inf
    db_sql = sql_sensitivity(point, L, V)

    if point.c_st > 0:
        r_coh = 8.0 * K * V / point.c_st
        db_coh = 0.015 / math.sqrt(K * V * point.c_st)
        product_paper = 0.1 / point.c_st ** 1.5
    else:
        r_coh = db_coh = product_paper = math.inf

    return TransductionReport(
        C=c,
        deltaC_signal=dc_signal,
        deltaC_classical=dc_classical,
        deltaL_quantum=dl_quantum,
        deltaC_quantum=dc_quantum,
        dB_sql=db_sql,
        R_lower=r_lower,
        dB_min=db_min,
        R_min=r_min,
        R_min_weaver=r_min_weaver,
        R_min_coherence_bound=r_coh,
        dB_min_coherence_bound=db_coh,
        uncertainty_product_exact=product,
        uncertainty_product_paper=product_paper,
    )

"""Grid-resolution selection: the RUGNIK rule, the EUGkM baseline, and bounds.

RUGNIK picks the per-axis resolution m that minimizes an upper bound on the
expected deviation of the averaged K-means objective between the privatized
grid synopsis and the raw data.  The bound profile is

    h(m) = sqrt(2) m^(d/2) / (eps K^(2/d)) + (2 / (m K^(1/d))) sqrt(N/3) + N / (3 m^2),

convex in m for d >= 2, and its stationarity condition reduces to the root of

    xi(m) = m^(d/2+2) - rho K^(1/d) m - rho sqrt(N/3) K^(2/d),  rho = (eps/d) sqrt(8N/3),

which has a unique positive root.  EUGkM sizes the grid as (N eps / 10)^(2d/(2+d))
cells, independent of K.  Neither rule depends on the domain half-width r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal

from .errors import BracketFailureError, DpGridKmError, InvalidDimensionError

RUGNIK = "rugnik"
EUGKM = "eugkm"


@dataclass(frozen=True)
class SizingParams:
    """Derived scalars for one (N, d, K, epsilon) configuration.

    `eps_low` is the smallest budget at which the lower bound on the optimal
    cell count holds, `eps_high` the largest at which the upper bound holds.
    `eta = rho / gamma` by construction.
    """

    n: int
    d: int
    k: int
    epsilon: float
    rho: float
    eta: float
    gamma: float
    eps_low: float
    eps_high: float


def make_params(n: int, d: int, k: int, epsilon: float) -> SizingParams:
    """Compute the sizing scalars; rejects d < 2 where the convexity argument fails."""
    if n < 1:
        raise DpGridKmError(f"need n >= 1, got {n}")
    if d < 2:
        raise InvalidDimensionError(
            f"grid sizing needs d >= 2 (bound profile convexity fails at d={d})"
        )
    if k < 1:
        raise DpGridKmError(f"need k >= 1, got {k}")
    if epsilon <= 0:
        raise DpGridKmError(f"epsilon must be positive, got {epsilon}")
    root_n3 = math.sqrt(n / 3.0)
    rho = (epsilon / d) * math.sqrt(8.0 * n / 3.0)
    gamma = 1.0 / (1.0 + root_n3)
    eta = rho * (1.0 + root_n3)
    eps_low = d * math.sqrt(3.0 * k / (8.0 * n)) * gamma
    eps_high = (d * math.sqrt(2.0 * k) / 3.0) * (4.0 * n / 3.0) ** (d / 4.0)
    return SizingParams(
        n=n, d=d, k=k, epsilon=epsilon,
        rho=rho, eta=eta, gamma=gamma, eps_low=eps_low, eps_high=eps_high,
    )


@dataclass(frozen=True)
class GridChoice:
    """A selected grid resolution: continuous optimum and its integer rounding."""

    m_continuous: float
    m: int
    total_cells: int
    method: str

    def degenerate_for(self, k: int) -> bool:
        """True when the grid is too coarse to hold k distinct centers."""
        return self.total_cells < k


@dataclass(frozen=True)
class DeviationBound:
    """Components of the objective-deviation bound at resolution m.

    t1_bound covers the injected noise, t2_bound the cross term between
    quantization offsets and center displacements, t3_exact the pure
    quantization term.  (d r^2 / K) * h_value == (t1 + 2 t2 + t3) / K.
    """

    m: float
    t1_bound: float
    t2_bound: float
    t3_exact: float
    h_value: float


def xi(m: float, p: SizingParams) -> float:
    """Stationarity polynomial whose unique positive root is the optimal m."""
    if m <= 0:
        raise DpGridKmError(f"m must be positive, got {m}")
    return (
        m ** (p.d / 2.0 + 2.0)
        - p.rho * p.k ** (1.0 / p.d) * m
        - p.rho * math.sqrt(p.n / 3.0) * p.k ** (2.0 / p.d)
    )


def bound_profile(m: float, p: SizingParams) -> float:
    """h(m): the r-independent profile of the deviation bound."""
    if m <= 0:
        raise DpGridKmError(f"m must be positive, got {m}")
    return (
        math.sqrt(2.0) * m ** (p.d / 2.0) / (p.epsilon * p.k ** (2.0 / p.d))
        + (2.0 / (m * p.k ** (1.0 / p.d))) * math.sqrt(p.n / 3.0)
        + p.n / (3.0 * m * m)
    )


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


_BRACKET_LIMIT = 1e15


def solve_rugnik(p: SizingParams, tol: float = 1e-10) -> GridChoice:
    """Solve xi(m) = 0 by bracketed bisection and round to an integer resolution.

    xi(0+) < 0 always, so doubling the upper end from 1 until xi turns
    positive brackets the unique root; bisection then converges
    unconditionally.  The integer resolution is whichever neighbor of the
    continuous root, floor or ceil, gives the smaller deviation-bound profile
    h: since h is convex this is the integer minimizer of the bound.
    """
    if tol <= 0:
        raise DpGridKmError(f"tol must be positive, got {tol}")
    lo = 1e-6
    hi = 1.0
    while xi(hi, p) <= 0.0:
        hi *= 2.0
        if hi > _BRACKET_LIMIT:
            raise BracketFailureError(
                f"no sign change below {_BRACKET_LIMIT:g}; parameters are pathological"
            )
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        value = xi(mid, p)
        if abs(value) <= tol or (hi - lo) <= 1e-12:
            break
        if value < 0.0:
            lo = mid
        else:
            hi = mid
        mid = 0.5 * (lo + hi)
    m_floor = max(1, math.floor(mid))
    m_ceil = max(1, math.ceil(mid))
    m = m_floor if bound_profile(m_floor, p) <= bound_profile(m_ceil, p) else m_ceil
    return GridChoice(m_continuous=mid, m=m, total_cells=m**p.d, method=RUGNIK)


def eugkm(n: int, d: int, epsilon: float) -> GridChoice:
    """Baseline rule (N eps / 10)^(2d/(2+d)) total cells, rounded per axis.

    The continuous per-axis value is rounded half-up and re-powered, which is
    what makes every published cell count a perfect d-th power.  The rule
    ignores K, so it can go degenerate (fewer cells than clusters) under
    tight budgets.
    """
    if n < 1 or d < 1:
        raise DpGridKmError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if epsilon <= 0:
        raise DpGridKmError(f"epsilon must be positive, got {epsilon}")
    m_cont = (n * epsilon / 10.0) ** (2.0 / (2.0 + d))
    m = max(1, round_half_up(m_cont))
    return GridChoice(m_continuous=m_cont, m=m, total_cells=m**d, method=EUGKM)


def theorem_bounds(p: SizingParams) -> tuple[float | None, float | None]:
    """Continuous bounds (m_lower, m_upper) on the optimal per-axis resolution.

    The lower bound applies when epsilon >= eps_low, the upper when
    epsilon <= eps_high; outside those ranges the corresponding entry is None.
    """
    exponent = 2.0 / (4.0 + p.d)
    k_term = p.k ** (2.0 / p.d)
    m_lower = (p.eta * k_term) ** exponent if p.epsilon >= p.eps_low else None
    m_upper = (
        (p.gamma * math.sqrt(3.0 * p.n) * p.eta * k_term) ** exponent
        if p.epsilon <= p.eps_high
        else None
    )
    return m_lower, m_upper


def deviation_bound(m: float, p: SizingParams, r: float) -> DeviationBound:
    """Evaluate the three deviation-bound components at resolution m.

    The displayed bounds are used as-is, with no hidden safety factors.
    """
    if m <= 0 or r <= 0:
        raise DpGridKmError("m and r must be positive")
    d, k, n, eps = p.d, p.k, p.n, p.epsilon
    dr2 = d * r * r
    t1 = (dr2 / k ** (2.0 / d)) * math.sqrt(2.0 * m**d) / eps
    t2 = math.sqrt(n / 3.0) * dr2 / (m * k ** (1.0 / d))
    t3 = n * dr2 / (3.0 * m * m)
    return DeviationBound(
        m=m, t1_bound=t1, t2_bound=t2, t3_exact=t3, h_value=bound_profile(m, p)
    )


def theta_scaling(n: int, d: int, k: int, epsilon: float) -> float:
    """Asymptotic cell-count scale (N eps)^(2d/(4+d)) K^(4/(4+d))."""
    return (n * epsilon) ** (2.0 * d / (4.0 + d)) * k ** (4.0 / (4.0 + d))


def threshold_strings(p: SizingParams) -> tuple[str, str]:
    """3-decimal display of (eps_low, eps_high).

    The lower threshold is rounded up and the upper rounded down, so the
    displayed range is contained in the true range where the bounds hold.
    """
    low = Decimal(p.eps_low).quantize(Decimal("0.001"), rounding=ROUND_CEILING)
    high = Decimal(p.eps_high).quantize(Decimal("0.001"), rounding=ROUND_FLOOR)
    return format(low, "f"), format(high, "f")

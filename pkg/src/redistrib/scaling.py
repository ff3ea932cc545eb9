"""Linear redistribution when valuations share a scaling relationship.

Each agent's value for object j is gamma_j * v_i for a public non-increasing
gamma and a private scalar v_i.  The optimal rebate coefficients come from a
small LP whose constraint chain couples consecutive unknowns only, so it is
solved by exact rational bisection with interval propagation; when the
analytic upper bound min(A/B, B/A) is itself feasible (which held on every
instance we checked), the solution snaps to it exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from .core import BidProfile

BISECTION_GAP = Fraction(1, 10**12)


@dataclass(frozen=True)
class ScalingModel:
    """Gamma/beta data and the solved rebate rule for one (n, p, gamma)."""

    n: int
    p: int
    gamma: tuple          # Fractions, length p, non-increasing positive
    beta: tuple           # Fractions, beta_1 .. beta_{n-1}
    e_star: Fraction
    x: tuple              # x_2 .. x_{n-1}
    c: tuple              # c_2 .. c_{n-1}, c_2 = x_2, c_j = x_j - x_{j-1}
    bound: Fraction       # min(A/B, B/A)
    exact: bool           # True when e_star is exactly optimal (snap succeeded)


def _validate_gamma(gamma: Sequence, p: int) -> tuple:
    g = tuple(Fraction(x) for x in gamma)
    if len(g) != p:
        raise ValueError(f"gamma must have length p={p}, got {len(g)}")
    if any(x <= 0 for x in g):
        raise ValueError("gamma components must be positive")
    if any(g[i] < g[i + 1] for i in range(p - 1)):
        raise ValueError("gamma must be non-increasing")
    return g


def _gamma_extended(gamma: tuple, n: int) -> list:
    # virtual objects p+1..n carry gamma = 0
    return list(gamma) + [Fraction(0)] * (n - len(gamma))


def beta_vector(n: int, p: int, gamma: Sequence) -> tuple:
    """beta_1 = gamma_1 - gamma_2, beta_i = i(gamma_i - gamma_{i+1}) + beta_{i-1}."""
    g = _gamma_extended(_validate_gamma(gamma, p), n)
    beta = [g[0] - g[1]]
    for i in range(2, n):
        beta.append(i * (g[i - 1] - g[i]) + beta[-1])
    return tuple(beta)


def claim1_bound(n: int, p: int, gamma: Sequence) -> Fraction:
    """The analytic cap min(A/B, B/A) on the LP's optimal index.

    A sums beta_{i-1} C(n, i) over odd i, B over even i, with beta_0 = 0 so
    the i = 1 term vanishes.
    """
    if n <= p + 1:
        raise ValueError(f"need n > p+1, got n={n}, p={p}")
    beta = (Fraction(0),) + beta_vector(n, p, gamma)  # beta[0] = beta_0 = 0
    a = sum(beta[i - 1] * comb(n, i) for i in range(1, n + 1, 2))
    b = sum(beta[i - 1] * comb(n, i) for i in range(2, n + 1, 2))
    if a == 0 or b == 0:
        raise ValueError("bound undefined: one parity sum is zero")
    return min(Fraction(a, b), Fraction(b, a))


def _rows(n: int, p: int, beta: tuple):
    """LP (row) data: row r couples x_{r+1}, x_{r+2} except the unary ends.

    Row r (1-based, r = 1..n-1) constrains i*x_{i-1} + (n-i)*x_i with
    i = r + 1 to [e*beta_hat_r, beta_hat_r], where beta_hat repeats beta_p
    past index p.  Row 1 is (n-2)x_2 and row n-1 is n*x_{n-1}.
    """
    return [beta[min(r, p) - 1] for r in range(1, n)]


def _propagate(n: int, p: int, beta_hat: list, e: Fraction):
    """Forward interval propagation of the feasible x_2..x_{n-1} chain.

    Returns the per-variable intervals consistent with all constraints up to
    and including each variable's last row, or None when infeasible.  Exact
    because every row couples only consecutive variables.
    """
    lo = max(Fraction(0), e * beta_hat[0] / (n - 2))
    hi = beta_hat[0] / (n - 2)
    if lo > hi:
        return None
    intervals = [(lo, hi)]
    for i in range(3, n):  # row for i couples x_{i-1}, x_i
        r = beta_hat[i - 2]
        plo, phi = intervals[-1]
        lo = max(Fraction(0), (e * r - i * phi) / (n - i))
        hi = (r - i * plo) / (n - i)
        if lo > hi:
            return None
        intervals.append((lo, hi))
    # final unary row: n * x_{n-1} in [e*beta_p, beta_p]
    r = beta_hat[n - 2]
    plo, phi = intervals[-1]
    lo = max(plo, e * r / n)
    hi = min(phi, Fraction(r, n))
    if lo > hi:
        return None
    intervals[-1] = (lo, hi)
    return intervals


def _feasible(n: int, p: int, beta_hat: list, e: Fraction) -> bool:
    return _propagate(n, p, beta_hat, e) is not None


def _recover_x(n: int, p: int, beta_hat: list, e: Fraction) -> list:
    """Deterministic solution: lower end of each tightened feasible interval."""
    forward = _propagate(n, p, beta_hat, e)
    if forward is None:
        raise ValueError("infeasible e")
    # backward tightening makes every interval globally extendable
    for i in range(n - 1, 2, -1):
        r = beta_hat[i - 2]
        lo_b, hi_b = forward[i - 2]
        lo = (e * r - (n - i) * hi_b) / i
        hi = (r - (n - i) * lo_b) / i
        plo, phi = forward[i - 3]
        forward[i - 3] = (max(plo, lo), min(phi, hi))
    xs = [forward[0][0]]
    for i in range(3, n):
        r = beta_hat[i - 2]
        lo = max(Fraction(0), (e * r - i * xs[-1]) / (n - i))
        lo_t, hi_t = forward[i - 2]
        x_i = max(lo, lo_t)
        assert x_i <= hi_t
        xs.append(x_i)
    return xs


def solve_lp(n: int, p: int, gamma: Sequence,
             gap: Fraction = BISECTION_GAP) -> ScalingModel:
    """Maximize the guaranteed redistribution fraction e for (n, p, gamma).

    Tries the claim1 bound first (exact optimum when feasible, since e* can
    never exceed it); otherwise bisects on e with exact feasibility tests
    until the bracket is below ``gap``.
    """
    if not (isinstance(n, int) and isinstance(p, int) and p >= 1 and n > p + 1):
        raise ValueError(f"need n > p+1 and p >= 1, got n={n}, p={p}")
    g = _validate_gamma(gamma, p)
    beta = beta_vector(n, p, g)
    beta_hat = _rows(n, p, beta)
    bound = claim1_bound(n, p, g)

    if _feasible(n, p, beta_hat, bound):
        e_star, exact = bound, True
    else:
        lo, hi = Fraction(0), bound
        while hi - lo > gap:
            mid = (lo + hi) / 2
            if _feasible(n, p, beta_hat, mid):
                lo = mid
            else:
                hi = mid
        e_star, exact = lo, False

    xs = _recover_x(n, p, beta_hat, e_star)
    c = [xs[0]]
    for j in range(1, len(xs)):
        c.append(xs[j] - xs[j - 1])
    return ScalingModel(n=n, p=p, gamma=g, beta=beta, e_star=e_star,
                        x=tuple(xs), c=tuple(c), bound=bound, exact=exact)


def scaling_payments(gamma: Sequence, values: Sequence) -> tuple:
    """Clarke payments under the assortative optimum, values sorted descending.

    t_i = sum_{j=i}^{p} (gamma_j - gamma_{j+1}) v_{j+1}; zero past position p.
    """
    n = len(values)
    p = len(gamma)
    g = _gamma_extended(_validate_gamma(gamma, p), n + 1)
    if any(values[i] < values[i + 1] for i in range(n - 1)):
        raise ValueError("values must be sorted in decreasing order")
    if any(v < 0 for v in values):
        raise ValueError("values must be nonnegative")
    payments = []
    for i in range(1, n + 1):
        if i <= p:
            payments.append(sum((g[j - 1] - g[j]) * values[j]
                                for j in range(i, min(p, n - 1) + 1)))
        else:
            payments.append(0 * values[0])
    return tuple(payments)


def scaling_rebates(model: ScalingModel, values: Sequence) -> tuple:
    """Per-position rebates r_i = sum_{j<i} c_j v_j + sum_{j>=i} c_j v_{j+1}."""
    n = model.n
    if len(values) != n:
        raise ValueError(f"expected {n} values, got {len(values)}")
    if any(values[i] < values[i + 1] for i in range(n - 1)):
        raise ValueError("values must be sorted in decreasing order")
    c = {j: model.c[j - 2] for j in range(2, n)}
    out = []
    for i in range(1, n + 1):
        r = Fraction(0)
        for j in range(2, n):
            r += c[j] * (values[j - 1] if j < i else values[j])
        out.append(r)
    return tuple(out)


def induced_profile(gamma: Sequence, values: Sequence) -> BidProfile:
    """The heterogeneous bid matrix b_{ij} = gamma_j * v_i."""
    g = _validate_gamma(gamma, len(gamma))
    return BidProfile(tuple(tuple(gj * v for gj in g) for v in values))


def extract_values(profile: BidProfile, gamma: Sequence) -> list:
    """Recover per-agent scalars from a profile of the induced form."""
    g = _validate_gamma(gamma, profile.p)
    values = []
    for row in profile.bids:
        v = Fraction(row[0]) / g[0] if isinstance(row[0], (int, Fraction)) \
            else row[0] / float(g[0])
        for gj, b in zip(g, row):
            if gj * v != b:
                raise ValueError("profile is not of the scaled form gamma_j * v_i")
        values.append(v)
    return values

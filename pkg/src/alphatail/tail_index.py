"""Tail-index evaluation with certified truncation.

The central objects are the coverage deficit ``zeta_n = sum_k p_k (1-p_k)^n``
(the chance that one more draw lands on an unseen letter) and the tail index
``t_n = n * zeta_n``.  Series are summed in index order with compensated
accumulation; each evaluation returns a lower-bound ``value`` together with a
certified ``trunc_error`` so that the true quantity lies in
``[value, value + trunc_error]``.

Truncation bounds are family-aware.  Since ``p(1-p)^n <= p e^{-np}``, a
certified bound on the exponential surrogate's tail bounds both series: power
tails use the closed incomplete-gamma form of the surrogate's integral, other
infinite tails use a dyadic-block bound built from the family's tail-mass
certificate.  ``eps`` is a target on the t_n scale; when a slowly decaying
tail cannot certify it within ``max_terms`` summands, the evaluation stops at
the cap and reports the honest, larger ``trunc_error`` instead of guessing.

Very large n (beyond 2**53, needed for the diffusion family's probe
subsequences) is supported for level-represented distributions: terms are
assembled from ``ln n`` and exact log2 probabilities, so neither n nor p is
ever materialized as a float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import special

from .errors import AlphatailError, FiniteSupport, InvalidParams
from .zoo import LN2, Distribution, FamilyKind

DEFAULT_EPS = 1e-9          # t_n-scale truncation target for CLI-level calls
DEFAULT_MAX_TERMS = 1 << 24

_FLOAT_N_LIMIT = 1 << 53
_EXP_OVERFLOW = 709.0
_EXP_UNDERFLOW = -745.0


@dataclass(frozen=True)
class IndexValue:
    """One certified evaluation: true quantity in [value, value+trunc_error]."""

    n: int
    value: float
    trunc_error: float
    terms_used: int

    def __post_init__(self):
        if self.value < 0.0 or self.trunc_error < 0.0:
            raise AlphatailError("index values and truncation errors are nonnegative")

    @property
    def upper(self) -> float:
        return self.value + self.trunc_error


@dataclass(frozen=True)
class IndexSeries:
    schedule: list
    points: list

    def __post_init__(self):
        if len(self.schedule) != len(self.points):
            raise InvalidParams("schedule and points must align 1:1")
        if any(b <= a for a, b in zip(self.schedule, self.schedule[1:])):
            raise InvalidParams("schedule must be strictly increasing")


@dataclass(frozen=True)
class OscillationState:
    """k* straddling 1/(n+1), and c(n) = n * p_{k*}."""

    n: int
    k_star: int
    c_of_n: float


class EmGap(NamedTuple):
    lattice_sum: float
    integral: float
    bound: float
    f_at_mode: float


# ---------------------------------------------------------------------------
# Certified tail bounds for the series sum_{k>K} p_k e^{-n p_k}
# ---------------------------------------------------------------------------

def _power_series_tail(dist: Distribution, K: int, n: float) -> float:
    """Incomplete-gamma bound; valid once K passes the summand's mode."""
    lam = dist.spec.params["lambda"]
    c = dist.norm_constant
    if K < (n * c) ** (1.0 / lam):
        return math.inf
    a = 1.0 - 1.0 / lam
    s = n * c * K ** (-lam)
    return (c ** (1.0 / lam) / lam) * n ** (1.0 / lam - 1.0) * special.gammainc(a, s) * math.gamma(a)


def _dyadic_series_tail(dist: Distribution, K: int, n: float, blocks: int = 60) -> float:
    """Generic bound from mass certificates: on (K 2^j, K 2^{j+1}] every term
    is at most (block mass) * exp(-n p(K 2^{j+1})).
    """
    total = 0.0
    for j in range(blocks):
        lo = K << j
        hi = K << (j + 1)
        lp = dist.log_prob(hi + 1)
        damp = math.exp(-n * math.exp(lp)) if lp > -700.0 else 1.0
        total += dist.tail_mass_bound(lo) * damp
        if damp >= 1.0 - 1e-12:
            # deeper blocks gain nothing; close with the raw mass bound
            return total + dist.tail_mass_bound(hi)
    return total + dist.tail_mass_bound(K << blocks)


def _series_tail_bound(dist: Distribution, K: int, n: float) -> float:
    """Certified zeta-scale bound on everything omitted beyond index K."""
    mass = dist.tail_mass_bound(K)
    if dist.kind is FamilyKind.POWER:
        return min(mass, _power_series_tail(dist, K, n))
    return min(mass, _dyadic_series_tail(dist, K, n))


# ---------------------------------------------------------------------------
# Core evaluators
# ---------------------------------------------------------------------------

def _pow_one_minus(p: np.ndarray, n: float) -> np.ndarray:
    """(1-p)^n, by exp(n log1p(-p)) with a direct-power fallback for p > 0.99."""
    with np.errstate(divide="ignore", over="ignore"):
        out = np.exp(n * np.log1p(-p))
    big = p > 0.99
    if np.any(big):
        out[big] = np.power(1.0 - p[big], n)
    return out


def _eval_finite(dist: Distribution, n: float) -> tuple[float, float, int]:
    lp = dist.log_prob_block(1, len(dist._finite_probs) + 1)
    p = np.exp(lp)
    terms = p * _pow_one_minus(p, n)
    # fsum makes the result independent of the vector's ordering
    return math.fsum(terms.tolist()), 0.0, len(p)


def _eval_levels(dist: Distribution, n: float) -> tuple[float, float, int]:
    l2 = dist._level_log2
    counts = np.asarray([c for _, c in dist.levels()], dtype=np.float64)
    ln_p = LN2 * l2
    with np.errstate(under="ignore"):
        p = np.exp(ln_p)
        zeta_terms = counts * p * _pow_one_minus(p, n)
    value = math.fsum(zeta_terms.tolist())
    beyond = 2.0 ** dist.beyond_prefix_log2_mass
    trunc = max(beyond, 5e-324)
    return value, trunc, int(counts.sum())


def _eval_closed_form(
    dist: Distribution,
    n: float,
    eps_t: float,
    max_terms: int,
    want_exp: bool,
) -> tuple[float, Optional[float], float, int]:
    sums: list[float] = []
    exp_sums: list[float] = []
    k = 1
    chunk = 1 << 10
    trunc = math.inf
    while True:
        hi = min(k + chunk, max_terms + 1)
        lp = dist.log_prob_block(k, hi)
        with np.errstate(under="ignore"):
            p = np.exp(lp)
            sums.append(float((p * _pow_one_minus(p, n)).sum()))
            if want_exp:
                exp_sums.append(float((p * np.exp(-n * p)).sum()))
        k = hi
        if k - 1 >= dist.k0_head:
            trunc = _series_tail_bound(dist, k - 1, n)
            if n * trunc <= eps_t:
                break
        if k > max_terms:
            break
        chunk = min(chunk * 2, 1 << 21)
    value = math.fsum(sums)
    exp_value = math.fsum(exp_sums) if want_exp else None
    return value, exp_value, trunc, k - 1


def _eval_t_large(dist: Distribution, n: int) -> tuple[float, float, int]:
    """t_n for level-represented distributions at arbitrarily large integer n.

    Works from ln n and log2 probabilities only; the asymptotic handling of
    -n*log1p(-p) is exact to double precision once n exceeds 2**53.
    """
    if dist._levels is None:
        raise InvalidParams(
            f"n = {n} exceeds the float-exact range; only level-represented "
            f"families support it (got {dist.kind.value})"
        )
    ln_n = math.log(n)
    l2 = dist._level_log2
    counts = np.asarray([c for _, c in dist.levels()], dtype=np.float64)
    ln_p = LN2 * l2
    with np.errstate(under="ignore", over="ignore"):
        pv = np.exp(np.maximum(ln_p, -690.0))
        ln_neg_l1p = np.where(ln_p > -690.0, np.log(-np.log1p(-pv)), ln_p)
        z = ln_n + ln_neg_l1p
        n_log1p = np.where(z > _EXP_OVERFLOW, -np.inf, -np.exp(np.minimum(z, _EXP_OVERFLOW)))
        g = ln_n + ln_p + n_log1p
        t_terms = counts * np.exp(np.maximum(g, -746.0)) * (g > _EXP_UNDERFLOW)
    value = math.fsum(t_terms.tolist())
    z_tr = ln_n + LN2 * dist.beyond_prefix_log2_mass
    trunc = math.exp(z_tr) if z_tr < _EXP_OVERFLOW else math.inf
    return value, max(trunc, 5e-324), int(counts.sum())


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def zeta1(
    dist: Distribution,
    n: int,
    eps: float = DEFAULT_EPS,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> IndexValue:
    """Coverage deficit zeta_n with a certified truncation remainder.

    ``eps`` targets the t_n scale, so the zeta-scale remainder satisfies
    ``trunc_error <= eps / n`` whenever the family's tail certificate can
    reach it within ``max_terms`` summands.
    """
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if eps <= 0.0:
        raise InvalidParams("eps must be positive")
    if n > _FLOAT_N_LIMIT:
        t, trunc_t, terms = _eval_t_large(dist, n)
        ln_n = math.log(n)
        value = math.exp(math.log(t) - ln_n) if t > 0.0 else 0.0
        return IndexValue(n, value, math.exp(math.log(trunc_t) - ln_n) if trunc_t > 0 else 0.0, terms)
    nf = float(n)
    if dist.support_size() is not None:
        value, trunc, terms = _eval_finite(dist, nf)
    elif dist.prefix_length is not None:
        value, trunc, terms = _eval_levels(dist, nf)
    else:
        value, _, trunc, terms = _eval_closed_form(dist, nf, eps, max_terms, False)
    return IndexValue(n, value, trunc, terms)


def tn(
    dist: Distribution,
    n: int,
    eps: float = DEFAULT_EPS,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> IndexValue:
    """Tail index t_n = n * zeta_n; the identity holds bit-exactly for every
    n in the float-exact range."""
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if n > _FLOAT_N_LIMIT:
        value, trunc, terms = _eval_t_large(dist, n)
        return IndexValue(n, value, trunc, terms)
    z = zeta1(dist, n, eps, max_terms)
    return IndexValue(n, n * z.value, n * z.trunc_error, z.terms_used)


def evaluate_series(
    dist: Distribution,
    schedule: Sequence[int],
    eps: float = DEFAULT_EPS,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> IndexSeries:
    """t_n along a strictly increasing schedule of sample sizes."""
    points = [tn(dist, int(n), eps, max_terms) for n in schedule]
    return IndexSeries(list(int(n) for n in schedule), points)


def scaled_pair(
    dist: Distribution,
    n: int,
    delta: float,
    eps: float = DEFAULT_EPS,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> tuple[float, float]:
    """(n^{1-delta} sum p(1-p)^n, n^{1-delta} sum p e^{-np}) over one shared
    index range, so the two members see identical truncation."""
    if not 0.0 < delta < 1.0:
        raise InvalidParams("delta must lie in (0,1)")
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if n > _FLOAT_N_LIMIT:
        raise InvalidParams("scaled_pair requires n within the float-exact range")
    nf = float(n)
    factor = nf ** (1.0 - delta)
    if dist.support_size() is not None:
        lp = dist.log_prob_block(1, len(dist._finite_probs) + 1)
        p = np.exp(lp)
        s1 = math.fsum((p * _pow_one_minus(p, nf)).tolist())
        s2 = math.fsum((p * np.exp(-nf * p)).tolist())
        return factor * s1, factor * s2
    if dist.prefix_length is not None:
        l2 = dist._level_log2
        counts = np.asarray([c for _, c in dist.levels()], dtype=np.float64)
        with np.errstate(under="ignore"):
            p = np.exp(LN2 * l2)
            s1 = math.fsum((counts * p * _pow_one_minus(p, nf)).tolist())
            s2 = math.fsum((counts * p * np.exp(-nf * p)).tolist())
        return factor * s1, factor * s2
    s1, s2, _, _ = _eval_closed_form(dist, nf, eps, max_terms, True)
    return factor * s1, factor * s2


def power_tail_limit(c: float, lam: float) -> float:
    """Limit of n^{1/lambda} * zeta_n for the tail p_k = c k^{-lambda}."""
    if not (lam > 1.0 and c > 0.0):
        raise InvalidParams("power limit requires lambda > 1 and c > 0")
    return c ** (1.0 / lam) * math.gamma(1.0 - 1.0 / lam) / lam


def oscillation_state(dist: Distribution, n: int) -> OscillationState:
    """Locate k* with p_{k*+1} < 1/(n+1) <= p_{k*} and return c(n) = n p_{k*}."""
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if dist.support_size() is not None:
        raise FiniteSupport("oscillation state needs an infinite tail")
    if dist.k0_head != 1:
        raise InvalidParams("oscillation state needs a globally non-increasing tail")
    thr = 1.0 / (n + 1)
    if dist.prob(1) < thr:
        raise InvalidParams("p_1 already below 1/(n+1); no admissible k*")
    if dist.kind is FamilyKind.GEOMETRIC:
        a = dist.spec.params["a"]
        k = max(1, math.floor(math.log(dist.norm_constant * (n + 1)) / math.log(a)))
    else:
        k = 1
        while dist.prob(2 * k) >= thr:
            k *= 2
        lo, hi = k, 2 * k  # prob(lo) >= thr > prob(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if dist.prob(mid) >= thr:
                lo = mid
            else:
                hi = mid
        k = lo
    while dist.prob(k) < thr:
        k -= 1
    while dist.prob(k + 1) >= thr:
        k += 1
    if k < 1:
        raise InvalidParams("no admissible k*")
    c = n * dist.prob(k)
    lower = n / (n + 1.0)
    if c < lower * (1.0 - 1e-12):
        raise AlphatailError(f"c(n) = {c} violates its lower sandwich {lower}")
    if dist.kind is FamilyKind.GEOMETRIC:
        upper = dist.spec.params["a"] * lower
        if c > upper * (1.0 + 1e-12):
            raise AlphatailError(f"c(n) = {c} violates its upper sandwich {upper}")
    return OscillationState(n, k, c)


def oscillation_t(c: float, rel_cutoff: float = 1e-16, max_terms: int = 200) -> float:
    """Limiting oscillation profile for unit-rate geometric tails:

        t(c) = c sum_{j>=0} e^j exp(-c e^j) + c sum_{j>=1} e^{-j} exp(-c e^{-j})

    The forward sum collapses double-exponentially, the backward sum
    geometrically.  Defined for any c > 0; the profile is swept on [1, e].
    """
    if c <= 0.0:
        raise InvalidParams("c must be positive")
    acc = 0.0
    for j in range(max_terms):
        term = c * math.exp(j - c * math.exp(j))
        acc += term
        if term < rel_cutoff * acc:
            break
    for j in range(1, max_terms):
        term = c * math.exp(-j - c * math.exp(-j))
        acc += term
        if term < rel_cutoff * acc:
            break
    return acc


def geometric_band_ceiling() -> float:
    """Explicit upper bound for t_n under a unit-rate geometric tail,
    e^2 (sum_{j>=0} e^j e^{-e^j} + sum_{j>=1} e^{-j} e^{-e^{-j}})."""
    return math.e ** 2 * oscillation_t(1.0)


def em_gap(dist: Distribution, n: int, max_terms: int = 1 << 25) -> EmGap:
    """Lattice sum vs integral for f_n(x) = n^{1-1/lam} c x^{-lam} e^{-n c x^{-lam}}.

    Returns the sum over k >= 1, the closed-form integral over [1, inf)
    (an incomplete-gamma evaluation), and the certified unimodal gap bound
    f_n(x0) + 2 f_n(x(n)) with x(n) = (nc)^{1/lam} the mode.
    """
    if dist.kind is not FamilyKind.POWER:
        raise InvalidParams("the sum-integral gap is instantiated for power tails only")
    if n < 1:
        raise InvalidParams("n must be >= 1")
    lam = dist.spec.params["lambda"]
    c = dist.norm_constant
    nf = float(n)
    pref = nf ** (1.0 - 1.0 / lam) * c

    def f(x: float) -> float:
        return pref * x ** (-lam) * math.exp(-nf * c * x ** (-lam))

    mode = (nf * c) ** (1.0 / lam)
    f_mode = 1.0 / (math.e * nf ** (1.0 / lam))
    bound = f(1.0) + 2.0 * f_mode

    def tail_integral(a: float) -> float:
        # integral_a^inf f_n(x) dx, via the substitution s = n c x^-lam
        g = 1.0 - 1.0 / lam
        s = nf * c * a ** (-lam)
        return (c ** (1.0 / lam) / lam) * special.gammainc(g, s) * math.gamma(g)

    sums: list[float] = []
    k = 1
    chunk = 1 << 12
    while True:
        hi = min(k + chunk, max_terms + 1)
        ks = np.arange(k, hi, dtype=np.float64)
        with np.errstate(under="ignore"):
            sums.append(float((pref * ks ** -lam * np.exp(-nf * c * ks ** -lam)).sum()))
        k = hi
        if k > 2.0 * mode and f(float(k)) <= 1e-3 * bound:
            break
        if k > max_terms:
            break
        chunk = min(chunk * 2, 1 << 21)
    # close the series with the decreasing-tail bracket [I(K+1), I(K)]
    lattice = math.fsum(sums) + 0.5 * (tail_integral(float(k)) + tail_integral(float(k - 1)))
    integral = tail_integral(1.0)
    if abs(lattice - integral) > bound + f(float(k - 1)):
        raise AlphatailError("sum-integral gap exceeded its certified bound")
    return EmGap(lattice, integral, bound, f_mode)

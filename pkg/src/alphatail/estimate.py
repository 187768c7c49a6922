"""Sampling and unbiased estimation of the tail index from iid data.

``sample`` draws letters by inverse-CDF search over cached prefix sums and is
bit-reproducible for a given seed.  ``z1v`` implements the unbiased estimator
of the coverage deficit: with observed counts y_k in a sample of size n,

    Z_{1,v} = [(n-1-v)! / n!] * sum_k y_k * (n-y_k)! / (n-y_k-v)!

for any order 1 <= v <= n-1 (a term vanishes as soon as n - y_k < v); the
scaled version t_hat_v = v * Z_{1,v} estimates t_v.  This falling-factorial
form is algebraically identical to the product form

    Z_{1,v} = n^{1+v} (n-1-v)!/n! * sum_k p_hat_k * prod_{j<v} (1 - p_hat_k - j/n)

but has no cancellation and makes the zero cutoff explicit.  Factorial ratios
are exact integers up to n = 30 and log-gamma beyond.

``exact_expectation`` is the brute-force oracle: it enumerates every count
vector of a small multinomial in exact rational arithmetic, which pins the
unbiasedness identities E[Z_{1,v}] = zeta_v, E[N_1/n] = zeta_{n-1} and
E[pi_0] = zeta_n without floating-point luck.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import factorial
from typing import Iterable, Optional

import numpy as np

from .errors import DepthExceeded, InvalidParams, InvalidV, TooLarge
from .zoo import Distribution

_EXACT_N_LIMIT = 30         # exact integer factorial path below, log-gamma above
_ORACLE_MAX_N = 12
_ORACLE_MAX_K = 6


@dataclass(frozen=True)
class FrequencyTable:
    """Observed letter counts of one sample; keys are alphabet indices k >= 1."""

    n: int
    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.n:
            raise InvalidParams(f"counts sum to {total}, expected n = {self.n}")
        if any(y <= 0 for y in self.counts.values()):
            raise InvalidParams("counts must be strictly positive")

    @property
    def n1(self) -> int:
        return sum(1 for y in self.counts.values() if y == 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "y"])
        for k in sorted(self.counts):
            w.writerow([k, self.counts[k]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FrequencyTable":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["k", "y"]:
            raise InvalidParams("frequency CSV must start with header 'k,y'")
        counts = {int(k): int(y) for k, y in rows[1:]}
        return cls(sum(counts.values()), counts)


@dataclass(frozen=True)
class EstimatorReport:
    v_values: list
    z1v: list
    t_hat: list


class Statistic(Enum):
    Z1V = "z1v"
    TURING = "turing"
    MISSING_MASS = "missing_mass"


def sample(dist: Distribution, n: int, seed: int) -> FrequencyTable:
    """Draw n iid letters; deterministic for a given 64-bit seed."""
    if n < 1:
        raise InvalidParams("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    u_max = float(u.max())
    cdf, vec_len = _grow_cdf(dist, u_max)
    letters = np.searchsorted(cdf, u, side="right") + 1
    if vec_len is not None:
        # u beyond the last cumulative value is rounding dust on a full vector
        letters = np.minimum(letters, vec_len)
    ks, ys = np.unique(letters, return_counts=True)
    return FrequencyTable(n, {int(k): int(y) for k, y in zip(ks, ys)})


def _grow_cdf(dist: Distribution, u_max: float) -> tuple[np.ndarray, Optional[int]]:
    block = 64
    parts: list[np.ndarray] = []
    start = 1
    vec_len = len(dist._finite_probs) if dist._finite_probs is not None else None
    while True:
        stop = start + block
        if vec_len is not None:
            stop = min(stop, vec_len + 1)
        if dist.prefix_length is not None:
            if start > dist.prefix_length:
                raise DepthExceeded(
                    "a draw landed beyond the constructed family's prefix"
                )
            stop = min(stop, dist.prefix_length + 1)
        with np.errstate(under="ignore"):
            parts.append(np.exp(dist.log_prob_block(start, stop)))
        cdf = np.cumsum(np.concatenate(parts)) if len(parts) > 1 else np.cumsum(parts[0])
        if float(cdf[-1]) > u_max or (vec_len is not None and stop == vec_len + 1):
            return cdf, vec_len
        start = stop
        block *= 2


def turing(freq: FrequencyTable) -> float:
    """Proportion of singletons, the sample-based coverage-deficit estimate."""
    return freq.n1 / freq.n


def true_missing_mass(dist: Distribution, freq: FrequencyTable) -> float:
    """Total probability of the letters not present in the sample."""
    observed = math.fsum(dist.prob(k) for k in freq.counts)
    return max(0.0, 1.0 - observed)


def z1v(freq: FrequencyTable, v: int) -> float:
    n = freq.n
    if not 1 <= v <= n - 1:
        raise InvalidV(f"v must lie in [1, n-1], got v={v} with n={n}")
    if n <= _EXACT_N_LIMIT:
        acc = 0
        for y in freq.counts.values():
            if n - y < v:
                continue
            ff = 1
            for j in range(v):
                ff *= n - y - j
            acc += y * ff
        return float(Fraction(acc * factorial(n - 1 - v), factorial(n)))
    log_front = math.lgamma(n - v) - math.lgamma(n + 1)
    total = 0.0
    for y in freq.counts.values():
        if n - y < v:
            continue
        lt = math.log(y) + math.lgamma(n - y + 1) - math.lgamma(n - y - v + 1)
        total += math.exp(lt + log_front)
    return total


def z1v_product_form(freq: FrequencyTable, v: int) -> float:
    """Literal product form of the estimator; kept as a cross-check of the
    falling-factorial reformulation for small n."""
    n = freq.n
    if not 1 <= v <= n - 1:
        raise InvalidV(f"v must lie in [1, n-1], got v={v} with n={n}")
    front = n ** (1 + v) * factorial(n - 1 - v) / factorial(n)
    acc = 0.0
    for y in freq.counts.values():
        ph = y / n
        prod = ph
        for j in range(v):
            prod *= 1.0 - ph - j / n
        acc += prod
    return front * acc


def t_hat(freq: FrequencyTable, v: int) -> float:
    """Unbiased estimate of t_v, namely v * Z_{1,v}."""
    return v * z1v(freq, v)


def estimator_report(freq: FrequencyTable, v_values: Iterable[int]) -> EstimatorReport:
    vs = [int(v) for v in v_values]
    zs = [z1v(freq, v) for v in vs]
    return EstimatorReport(vs, zs, [v * z for v, z in zip(vs, zs)])


# ---------------------------------------------------------------------------
# Exact expectation oracle
# ---------------------------------------------------------------------------

def _rational_probs(dist: Distribution) -> list[Fraction]:
    probs = [Fraction(float(p)) for p in dist._finite_probs]
    total = sum(probs)
    return [p / total for p in probs]


def _count_vectors(K: int, n: int):
    if K == 1:
        yield (n,)
        return
    for y in range(n + 1):
        for rest in _count_vectors(K - 1, n - y):
            yield (y,) + rest


def _z1v_exact(ys: tuple, n: int, v: int) -> Fraction:
    acc = 0
    for y in ys:
        if y == 0 or n - y < v:
            continue
        ff = 1
        for j in range(v):
            ff *= n - y - j
        acc += y * ff
    return Fraction(acc * factorial(n - 1 - v), factorial(n))


def exact_expectation(
    dist: Distribution,
    n: int,
    statistic: Statistic,
    v: Optional[int] = None,
) -> Fraction:
    """Exact rational E[statistic] over all samples of size n from a small
    finite distribution (probabilities taken as exact binary rationals and
    renormalized, a perturbation below 1e-15)."""
    K = dist.support_size()
    if K is None or K > _ORACLE_MAX_K:
        raise TooLarge(f"oracle supports finite alphabets with K <= {_ORACLE_MAX_K}")
    if n > _ORACLE_MAX_N:
        raise TooLarge(f"oracle supports n <= {_ORACLE_MAX_N}")
    if statistic is Statistic.Z1V:
        if v is None or not 1 <= v <= n - 1:
            raise InvalidV("Z1v oracle needs v in [1, n-1]")
    probs = _rational_probs(dist)
    expectation = Fraction(0)
    for ys in _count_vectors(K, n):
        coef = factorial(n)
        for y in ys:
            coef //= factorial(y)
        weight = Fraction(coef)
        for y, p in zip(ys, probs):
            if y:
                weight *= p ** y
        if weight == 0:
            continue
        if statistic is Statistic.Z1V:
            value = _z1v_exact(ys, n, v)
        elif statistic is Statistic.TURING:
            value = Fraction(sum(1 for y in ys if y == 1), n)
        else:
            value = sum((p for y, p in zip(ys, probs) if y == 0), Fraction(0))
        expectation += weight * value
    return expectation


def exact_zeta(dist: Distribution, v: int) -> Fraction:
    """sum_k p_k (1-p_k)^v in the oracle's exact rational arithmetic."""
    probs = _rational_probs(dist)
    return sum((p * (1 - p) ** v for p in probs), Fraction(0))

"""Interval-count dominance between two distributions.

Q dominates P when every interval (q_{k+1}, q_k] of Q's non-increasingly
ordered probabilities contains a uniformly bounded number of P's
probabilities.  That is a statement about all k, so a finite scan can only
gather evidence; the verdict vocabulary keeps this explicit:

* ``DOMINATED_WITHIN``     every examined interval held at most max_count
                           values and all scans ran to completion,
* ``NOT_DOMINATED_AT_DEPTH`` some count reached the caller's growth
                           threshold within the examined depth,
* ``UNDETERMINED``         the probe limit truncated a scan; never a false
                           verdict.

Ties p_i = q_k land in interval k (half-open on the left, exactly as the
relation is defined); equal consecutive q values make the interval empty.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import FiniteSupport, InvalidParams
from .zoo import Distribution

DEFAULT_DEPTH = 50
DEFAULT_PROBE_LIMIT = 10 ** 6
DEFAULT_GROWTH_THRESHOLD = 8


class DominanceVerdict(Enum):
    DOMINATED_WITHIN = "dominated_within"
    NOT_DOMINATED_AT_DEPTH = "not_dominated_at_depth"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class DominanceReport:
    depth: int
    counts: list
    max_count: int
    verdict: DominanceVerdict
    complete: bool
    growth_threshold: int

    def __post_init__(self):
        if len(self.counts) != self.depth:
            raise InvalidParams("one count per interval")
        if self.counts and self.max_count != max(self.counts):
            raise InvalidParams("max_count must equal max(counts)")


def _ordered_q(dist: Distribution, m: int) -> np.ndarray:
    """First m values of the non-increasingly ordered version of Q."""
    extra = max(dist.k0_head - 1, 0)
    with np.errstate(under="ignore"):
        vals = np.exp(dist.log_prob_block(1, m + extra + 1))
    vals = np.sort(vals)[::-1]
    return vals[:m]


def dominates(
    q_dist: Distribution,
    p_dist: Distribution,
    depth: int = DEFAULT_DEPTH,
    probe_limit: int = DEFAULT_PROBE_LIMIT,
    growth_threshold: int = DEFAULT_GROWTH_THRESHOLD,
) -> DominanceReport:
    """Count P's probabilities inside Q's first ``depth`` ordered intervals.

    P is scanned in index order down to the first index past its head where
    p_i <= q_{depth+1}; if ``probe_limit`` indices are exhausted first the
    verdict is UNDETERMINED.
    """
    if depth < 1:
        raise InvalidParams("depth must be >= 1")
    if q_dist.support_size() is not None:
        raise FiniteSupport("the dominating distribution must have infinite support")
    if p_dist.support_size() is not None:
        raise FiniteSupport("dominance is defined within the all-positive class; "
                            "finite P is rejected")
    q = _ordered_q(q_dist, depth + 1)
    counts = np.zeros(depth, dtype=np.int64)
    q_floor = float(q[-1])      # q_{depth+1}
    q_top = float(q[0])         # q_1
    # ascending view for searchsorted; intervals are (q_{k+1}, q_k]
    q_asc = q[::-1].copy()
    complete = False
    start = 1
    block = 1 << 12
    # blockwise scan through the same vectorized path as the q side, so
    # identical distributions compare tie-for-tie
    while start <= probe_limit:
        stop = min(start + block, probe_limit + 1)
        truncated_by_depth = False
        if p_dist.prefix_length is not None and stop > p_dist.prefix_length + 1:
            stop = p_dist.prefix_length + 1
            truncated_by_depth = True
            if stop <= start:
                break
        with np.errstate(under="ignore"):
            p_vals = np.exp(p_dist.log_prob_block(start, stop))
        below = np.nonzero(p_vals <= q_floor)[0]
        cut = len(p_vals)
        for j in below:
            if start + int(j) > p_dist.k0_head:
                complete = True
                cut = int(j)
                break
        chunk = p_vals[:cut]
        inside = chunk[(chunk > q_floor) & (chunk <= q_top)]
        if inside.size:
            pos = np.searchsorted(q_asc, inside, side="left")
            ks = (depth + 1) - pos
            np.add.at(counts, ks - 1, 1)
        if complete or (truncated_by_depth and cut == len(p_vals)):
            break
        start = stop
    counts = counts.tolist()
    max_count = max(counts) if counts else 0
    if not complete:
        verdict = DominanceVerdict.UNDETERMINED
    elif max_count >= growth_threshold:
        verdict = DominanceVerdict.NOT_DOMINATED_AT_DEPTH
    else:
        verdict = DominanceVerdict.DOMINATED_WITHIN
    return DominanceReport(depth, counts, max_count, verdict, complete, growth_threshold)

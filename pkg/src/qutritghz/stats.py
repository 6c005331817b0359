"""Finite-count confidence: Bernoulli KL divergence, Chernoff p-values, error bars."""

from __future__ import annotations

import math
from dataclasses import dataclass

from qutritghz.bell import bell_value_from_counts
from qutritghz.witness import witness_from_counts


def kl_bernoulli(p: float, q: float) -> float:
    """D(Bern(p) || Bern(q)) in nats.

    Terms with zero mass in ``p`` contribute 0. If ``q`` sits on {0, 1}
    while ``p`` puts mass on the other side, the divergence is ``inf``.
    """
    if not (0 <= p <= 1 and 0 <= q <= 1):
        raise ValueError(f"arguments must be probabilities, got p={p}, q={q}")
    total = 0.0
    for pp, qq in ((p, q), (1 - p, 1 - q)):
        if pp == 0:
            continue
        if qq == 0:
            return math.inf
        total += pp * math.log(pp / qq)
    return max(total, 0.0)


@dataclass(frozen=True)
class PValueQuery:
    """Observed value and bound, both mapped to success rates by ``scale``."""

    observed: float
    bound: float
    scale: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("total counts must be >= 1")
        if self.scale <= 0 or not 0 < self.bound / self.scale < 1:
            raise ValueError("bound / scale must lie strictly inside (0, 1)")
        if self.observed / self.scale > 1:
            raise ValueError("observed / scale exceeds 1")

    @property
    def violated(self) -> bool:
        return self.observed > self.bound

    @property
    def kl(self) -> float:
        if not self.violated:
            return 0.0
        return kl_bernoulli(self.observed / self.scale, self.bound / self.scale)

    def p_value(self) -> float:
        if not self.violated:
            return 1.0
        return math.exp(-self.n * self.kl)

    def report(self, sigma: float | None = None) -> dict:
        out = {
            "observed": self.observed,
            "bound": self.bound,
            "scale": self.scale,
            "N": self.n,
            "kl": self.kl,
            "p_value": self.p_value(),
            "violated": self.violated,
            "z": None,
        }
        if sigma is not None:
            out["sigma"] = sigma
            out["z"] = z_score(self.observed, self.bound, sigma)
        return out


def p_value(observed: float, bound: float, scale: float, n: int) -> float:
    """Chernoff bound exp(-N D(observed/scale || bound/scale)); 1 when there is no violation."""
    return PValueQuery(observed, bound, scale, n).p_value()


def required_counts(delta: float, bound: float, scale: float, target: float) -> int:
    """Smallest N whose Chernoff p-value for a violation ``delta`` is at most ``target``."""
    if delta <= 0:
        raise ValueError("violation delta must be positive")
    if not 0 < target <= 1:
        raise ValueError("target p-value must lie in (0, 1]")
    kl = kl_bernoulli((bound + delta) / scale, bound / scale)
    n = max(1, math.ceil(math.log(1 / target) / kl))
    # guard the ceil against rounding in log/kl
    while n > 1 and p_value(bound + delta, bound, scale, n - 1) <= target:
        n -= 1
    while p_value(bound + delta, bound, scale, n) > target:
        n += 1
    return n


@dataclass(frozen=True)
class FrequencyEstimate:
    value: float
    stderr: float
    n: int


def binomial_stderr(value: float, scale: float, n: int) -> float:
    """scale * sqrt(p (1 - p) / N) with p = value / scale."""
    if n <= 0:
        raise ValueError("total counts must be positive")
    p = value / scale
    return scale * math.sqrt(max(p * (1 - p), 0.0) / n)


def stderr_witness(counts) -> FrequencyEstimate:
    """W with its binomial error, pooling both witness settings into one stream of N shots."""
    res = witness_from_counts(counts)
    n = sum(res.totals.values())
    return FrequencyEstimate(res.W, binomial_stderr(res.W, 2.0, n), n)


def stderr_bell(f, counts) -> FrequencyEstimate:
    """Bell value with its pooled binomial error; the scale is the number of supported settings."""
    value, totals = bell_value_from_counts(f, counts)
    n = sum(totals.values())
    return FrequencyEstimate(value, binomial_stderr(value, float(len(totals)), n), n)


def z_score(observed: float, bound: float, sigma: float) -> float:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return (observed - bound) / sigma

"""Differential-privacy primitives.

Noise samplers, the edge-wise Laplace sanitizer for graphs, log-space
exponential-mechanism sampling, simple budget composition and an empirical
max-divergence audit. Every sampler takes an explicit ``numpy`` Generator.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from ._sampling import gumbel_argmax, laplace_from_uniform, uniform_open
from .graph import Graph


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive and finite, got {self.epsilon!r}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta!r}")


@dataclass(frozen=True)
class LedgerEntry:
    params: PrivacyParams
    purpose: str = ""


@dataclass
class BudgetLedger:
    """Ordered record of privacy spends, e.g. topology vs weight release."""

    entries: list[LedgerEntry] = field(default_factory=list)

    def record(self, epsilon: float, delta: float = 0.0, purpose: str = "") -> PrivacyParams:
        params = PrivacyParams(epsilon, delta)
        self.entries.append(LedgerEntry(params, purpose))
        return params

    def total(self) -> PrivacyParams:
        return compose(self)

    def __len__(self):
        return len(self.entries)

    def to_dict(self) -> dict:
        entries = [
            {"epsilon": e.params.epsilon, "delta": e.params.delta, "purpose": e.purpose}
            for e in self.entries
        ]
        out = {"entries": entries}
        if self.entries:
            tot = self.total()
            out["total"] = {"epsilon": tot.epsilon, "delta": tot.delta}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> BudgetLedger:
        led = cls()
        for e in json.loads(text)["entries"]:
            led.record(e["epsilon"], e.get("delta", 0.0), e.get("purpose", ""))
        return led


def compose(ledger: BudgetLedger | Iterable[PrivacyParams]) -> PrivacyParams:
    """Simple (and adaptive) composition: the sum of the epsilons and deltas.

    ``math.fsum`` makes the result independent of entry order.
    """
    if isinstance(ledger, BudgetLedger):
        params = [e.params for e in ledger.entries]
    else:
        params = list(ledger)
    if not params:
        raise ValueError("cannot compose an empty ledger")
    eps = math.fsum(p.epsilon for p in params)
    delta = math.fsum(p.delta for p in params)
    if delta >= 1.0:
        raise ValueError(f"composed delta {delta} is vacuous (>= 1)")
    return PrivacyParams(eps, delta)


# -- noise -------------------------------------------------------------------

def sample_laplace(scale: float, rng: np.random.Generator) -> float:
    """One Laplace(0, scale) draw by inverse CDF from a single uniform."""
    if not scale > 0:
        raise ValueError("Laplace scale must be positive")
    return float(laplace_from_uniform(np.float64(uniform_open(rng)), scale))


def laplace_noise(scale: float, size: int, rng: np.random.Generator) -> np.ndarray:
    if not scale > 0:
        raise ValueError("Laplace scale must be positive")
    return laplace_from_uniform(uniform_open(rng, size), scale)


def gaussian_scale(delta2_sensitivity: float, eps: float, delta: float) -> float:
    """Standard deviation ``c * Δ2 / eps`` with ``c`` just above sqrt(2 ln(1.25/δ))."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"the Gaussian mechanism needs 0 < eps < 1, got {eps!r}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"the Gaussian mechanism needs 0 < delta < 1, got {delta!r}")
    if not delta2_sensitivity > 0:
        raise ValueError("sensitivity must be positive")
    c = math.sqrt(2.0 * math.log(1.25 / delta)) + 1e-9
    return c * delta2_sensitivity / eps


def sample_gaussian(delta2_sensitivity: float, eps: float, delta: float,
                    rng: np.random.Generator, size: int | None = None):
    sigma = gaussian_scale(delta2_sensitivity, eps, delta)
    z = rng.standard_normal(size)
    return float(z * sigma) if size is None else z * sigma


def graph_laplace(g: Graph, eps: float, rng: np.random.Generator,
                  ledger: BudgetLedger | None = None) -> Graph:
    """Add i.i.d. Laplace(1/eps) noise to every edge weight.

    Sensitivity is 1 under the ℓ∞ neighbouring relation (per-edge change of
    at most 1/2 on each of two weights). Negative outputs are kept.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    noisy = g.weights + laplace_noise(1.0 / eps, g.n_edges, rng)
    if ledger is not None:
        ledger.record(eps, 0.0, "graph-laplace weights")
    return g.with_weights(noisy)


# -- exponential mechanism ---------------------------------------------------

def _check_range(utilities, sensitivity: float, eps: float) -> np.ndarray:
    u = np.asarray(utilities, dtype=np.float64).reshape(-1)
    if u.size == 0:
        raise ValueError("the exponential mechanism needs a non-empty range")
    if not sensitivity > 0:
        raise ValueError("utility sensitivity must be positive")
    if not eps > 0:
        raise ValueError("eps must be positive")
    return u


def exponential_choice(utilities: Sequence[float], sensitivity: float, eps: float,
                       rng: np.random.Generator) -> int:
    """Index ``i`` drawn with probability proportional to ``exp(eps*u_i / (2Δu))``.

    Sampled with the Gumbel-max trick on shifted log-weights, so arbitrarily
    large utility gaps never overflow. Consumes one uniform per outcome.
    """
    u = _check_range(utilities, sensitivity, eps)
    return gumbel_argmax(eps / (2.0 * sensitivity) * (u - u.max()), rng)


def exponential_probabilities(utilities: Sequence[float], sensitivity: float,
                              eps: float) -> np.ndarray:
    """Exact selection probabilities (normalized softmax)."""
    u = _check_range(utilities, sensitivity, eps)
    z = np.exp(eps / (2.0 * sensitivity) * (u - u.max()))
    return z / z.sum()


# -- audit -------------------------------------------------------------------

def empirical_distribution(samples: Iterable[Hashable]) -> dict:
    counts = Counter(samples)
    n = sum(counts.values())
    if n == 0:
        raise ValueError("empty sample")
    return {k: c / n for k, c in counts.items()}


def empirical_max_divergence(samples_x: Iterable[Hashable], samples_y: Iterable[Hashable],
                             delta: float = 0.0, *, min_samples: int = 1000) -> float:
    """δ-approximate max divergence estimated from two samples.

    Returns ``max_o ln((P_x(o) - δ) / P_y(o))`` over outcomes with
    ``P_x(o) > δ``; ``inf`` when such an outcome never appears in ``y``.
    This is a diagnostic only. A small value is evidence, not proof, of privacy.
    """
    xs, ys = list(samples_x), list(samples_y)
    if not xs or not ys:
        raise ValueError("empty samples")
    if min(len(xs), len(ys)) < min_samples:
        raise ValueError(f"at least {min_samples} samples per side are required")
    px, py = empirical_distribution(xs), empirical_distribution(ys)
    best = -math.inf
    for o, p in px.items():
        if p <= delta:
            continue
        q = py.get(o, 0.0)
        if q == 0.0:
            return math.inf
        best = max(best, math.log((p - delta) / q))
    return best


def wilson_interval(k: int, n: int, z: float = 3.0) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion ``k / n``."""
    if n <= 0:
        raise ValueError("n must be positive")
    p = k / n
    den = 1.0 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, mid - half), min(1.0, mid + half)

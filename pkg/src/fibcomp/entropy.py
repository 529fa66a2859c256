"""Compressibility metrics for leaf-labeled tries and the leaf-push barrier.

All logarithms are base 2.  ``ceil_log2`` is used where a whole number of
bits is stored (label fields, pointers); entropies stay real-valued.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

LN2 = math.log(2.0)


def ceil_log2(x: int) -> int:
    """Bits needed to tell ``x`` values apart (0 for x <= 1)."""
    if x <= 1:
        return 0
    return (x - 1).bit_length()


def shannon_entropy(histogram: Mapping[int, int] | Sequence[int]) -> float:
    """Zero-order entropy, bits per symbol, of a count histogram."""
    counts = list(histogram.values()) if isinstance(histogram, Mapping) else list(histogram)
    if any(c < 0 for c in counts):
        raise ValueError("negative count")
    total = sum(counts)
    if total == 0:
        raise ValueError("entropy of an all-zero histogram")
    h = 0.0
    for c in counts:
        if c:
            h += c * math.log2(total / c)
    return h / total


def info_theoretic_bound(n: int, delta: int) -> int:
    """Bits to tell apart proper binary tries on n leaves over delta labels."""
    if n < 1 or delta < 1:
        raise ValueError("need n >= 1 and delta >= 1")
    return 2 * n + n * ceil_log2(delta)


def fib_entropy(n: int, h0: float) -> float:
    if n < 1 or h0 < 0:
        raise ValueError("need n >= 1 and H0 >= 0")
    return 2 * n + n * h0


@dataclass
class EntropyReport:
    N: int
    n: int
    delta: int
    H0: float
    info_bound_bits: int
    entropy_bits: float
    # next-hop entropy over the table entries rather than the trie leaves
    H0_entries: float | None = None
    measured_bits: float | None = None
    nu: float | None = None
    nu_info: float | None = None
    eta: float | None = None

    def with_measurement(self, measured_bits: float) -> EntropyReport:
        nu, eta = efficiency(measured_bits, self)
        out = EntropyReport(**asdict(self))
        out.measured_bits = measured_bits
        out.nu, out.eta = nu, eta
        out.nu_info = measured_bits / self.info_bound_bits
        return out

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def entropy_report(n: int, histogram: Mapping[int, int], N: int,
                   delta: int | None = None,
                   entry_histogram: Mapping[int, int] | None = None) -> EntropyReport:
    """Bounds for a normalized trie with ``n`` leaves and the given leaf-label
    histogram.  ``delta`` defaults to the number of distinct leaf labels."""
    if delta is None:
        delta = len([c for c in histogram.values() if c])
    h0 = shannon_entropy(histogram)
    return EntropyReport(
        N=N, n=n, delta=delta, H0=h0,
        info_bound_bits=info_theoretic_bound(n, max(delta, 1)),
        entropy_bits=fib_entropy(n, h0),
        H0_entries=shannon_entropy(entry_histogram) if entry_histogram else None,
    )


def efficiency(measured_bits: float, report: EntropyReport) -> tuple[float, float]:
    """(nu, eta): size relative to the entropy bound, and bits per prefix."""
    if measured_bits <= 0:
        raise ValueError("measured size must be positive")
    nu = measured_bits / report.entropy_bits
    eta = measured_bits / report.N if report.N else math.inf
    return nu, eta


STATIC_COLUMNS = ("name", "N", "delta", "H0", "I", "E", "XBW-b", "pDAG", "nu", "eta_xbwb", "eta_pdag")


def static_table(rows: Sequence[Mapping[str, object]]) -> str:
    """Aligned text table with the storage-size columns; sizes in KBytes."""
    def fmt(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.2f}"
        return str(v)

    cells = [list(STATIC_COLUMNS)] + [[fmt(r.get(c)) for c in STATIC_COLUMNS] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(STATIC_COLUMNS))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# -- leaf-push barrier -------------------------------------------------------

@dataclass
class BarrierAnalysis:
    kappa: float
    xi: float
    zeta: float
    lambda_: int
    target: float


def _bisect(f, lo: float, hi: float, iters: int = 200) -> float:
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_kappa(target: float) -> float:
    """Real kappa >= 0 with kappa * 2**kappa == target.

    Equivalent to W(target * ln 2) / ln 2 for the Lambert W function.
    Bisection on [0, 64] followed by Newton polishing.
    """
    if target <= 0:
        raise ValueError("target must be positive")

    def f(k):
        return k * 2.0 ** k - target

    hi = 64.0
    if f(hi) < 0:
        raise ValueError("target beyond the supported range")
    k = _bisect(f, 0.0, hi)
    for _ in range(4):
        fk = f(k)
        d = 2.0 ** k * (1.0 + k * LN2)
        step = fk / d
        if not math.isfinite(step) or step == 0.0:
            break
        k -= step
    return k


def _floor_level(kappa: float, target: float) -> int:
    """Largest integer j with j * 2**j <= target, starting from floor(kappa)."""
    lam = max(int(math.floor(kappa)), 0)
    while (lam + 1) * 2.0 ** (lam + 1) <= target:
        lam += 1
    while lam > 0 and lam * 2.0 ** lam > target:
        lam -= 1
    return lam


def _xi(width: float, h0: float) -> float:
    """Level where 2**j meets H0 * 2**W / j + 3."""
    def f(j):
        return j * math.log(2) - math.log(h0 * 2.0 ** width / j + 3)
    lo, hi = 1e-9, float(width)
    if f(hi) <= 0:
        return hi
    return _bisect(f, lo, hi)


def _zeta(width: float, h0: float, delta: float) -> float:
    """Level where H0 * 2**W / j + 3 meets delta ** (2 ** (W - j))."""
    lg_delta = math.log2(delta)

    def f(j):
        return math.log2(h0 * 2.0 ** width / j + 3) - 2.0 ** (width - j) * lg_delta
    lo, hi = 1e-9, float(width)
    if f(lo) >= 0:
        return lo
    if f(hi) <= 0:
        return hi
    return _bisect(f, lo, hi)


def solve_barrier_compact(n: int, delta: int) -> BarrierAnalysis:
    """Barrier for the compact (alphabet-size) bound: floor(kappa) with
    kappa * 2**kappa = n * log2(delta)."""
    if n < 2 or delta < 2:
        raise ValueError("need n >= 2 and delta >= 2")
    target = n * math.log2(delta)
    kappa = solve_kappa(target)
    width = math.log2(n)
    h0 = math.log2(delta)
    return BarrierAnalysis(kappa=kappa, xi=_xi(width, h0), zeta=_zeta(width, h0, delta),
                           lambda_=_floor_level(kappa, target), target=target)


def solve_barrier_entropy(n: int, h0: float, delta: int | None = None) -> BarrierAnalysis:
    """Barrier for the entropy bound: floor(kappa) with kappa * 2**kappa = n * H0.

    ``delta`` only feeds the zeta level; it defaults to the smallest alphabet
    consistent with ``h0``.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if h0 <= 0:
        raise ValueError("barrier undefined for zero entropy")
    if delta is None:
        delta = max(2, math.ceil(2.0 ** h0))
    target = n * h0
    kappa = solve_kappa(target)
    width = math.log2(n)
    return BarrierAnalysis(kappa=kappa, xi=_xi(width, h0), zeta=_zeta(width, h0, delta),
                           lambda_=_floor_level(kappa, target), target=target)


def level_bounds(width: float, h0: float, delta: int) -> tuple[float, float, float]:
    """Closed-form (lower bound on xi, upper bound on zeta, upper bound on kappa)."""
    if h0 <= 0 or delta < 2 or width < 2:
        raise ValueError("need H0 > 0, delta >= 2, W >= 2")
    inner = width - math.log2(width / h0)
    if inner <= 0:
        raise ValueError("W - log2(W / H0) must be positive")
    lglg = math.log2(math.log2(delta))
    xi_lb = width - math.log2(width / h0)
    zeta_ub = width - math.log2(inner) + lglg
    kappa_ub = width - math.log2(width - math.log2(width)) + lglg
    return xi_lb, zeta_ub, kappa_ub


# -- coupon collector --------------------------------------------------------

def coupon_bound(probs: Sequence[float], m: int) -> float:
    """Upper bound m / log2(m) * H_C + 3 on the expected distinct coupons."""
    if m < 3:
        raise ValueError("need m >= 3 draws")
    return m / math.log2(m) * shannon_entropy_probs(probs) + 3


def shannon_entropy_probs(probs: Sequence[float]) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def expected_coupons(probs: Sequence[float], m: int) -> float:
    """Exact E|V| = sum over coupons of 1 - (1 - p)**m."""
    p = np.asarray(probs, dtype=float)
    return float((1.0 - (1.0 - p) ** m).sum())


def simulate_coupons(probs: Sequence[float], m: int, trials: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Distinct coupon counts over ``trials`` independent runs of m draws."""
    p = np.asarray(probs, dtype=float)
    p = p / p.sum()
    k = len(p)
    cdf = np.cumsum(p)
    draws = np.minimum(np.searchsorted(cdf, rng.random((trials, m)), side="right"), k - 1)
    # offset each run into its own block of k slots, then count occupied slots
    draws += np.arange(trials)[:, None] * k
    hits = np.bincount(draws.ravel(), minlength=trials * k).reshape(trials, k)
    return (hits > 0).sum(axis=1)

"""Robust selection of a single focal length from a candidate pool.

The pool collects the gated roots of many minimal samples.  The primary
selector seeks the dominant mode by iterated windowed (Tukey) medians and
polishes it by gradient ascent on a Gaussian kernel density; kernel voting
over a dense grid is kept as the baseline it is compared against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyPool
from .solver import CandidateSolution

_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class SelectionConfig:
    """Gaussian-kernel bandwidth (voting-domain units) and ascent controls."""

    bandwidth: float = 10.0
    max_iterations: int = 100
    tolerance: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError("bandwidth must be positive")
        if self.max_iterations < 1:
            raise ValueError("need at least one iteration")

    @property
    def step_tolerance(self) -> float:
        return self.tolerance if self.tolerance is not None else 1e-6 * self.bandwidth


@dataclass(frozen=True, eq=False)
class PoolEntry:
    """A focal-length vote tagged with the sample that produced it."""

    focal: float
    sample_index: int
    candidate: CandidateSolution | None = None


@dataclass(frozen=True)
class CandidatePool:
    entries: tuple

    @property
    def focals(self) -> np.ndarray:
        return np.array([e.focal for e in self.entries])


def _values(pool) -> np.ndarray:
    if isinstance(pool, CandidatePool):
        vals = pool.focals
    else:
        vals = np.asarray(pool, dtype=float).ravel()
    if vals.size == 0:
        raise EmptyPool("selection needs a non-empty pool")
    return vals


def tukey_median(values) -> float:
    """Deepest point of a 1-D sample: the standard median, with the
    lower-middle element returned for even counts so the result is always an
    input value."""
    vals = _values(values)
    return float(np.sort(vals)[(len(vals) - 1) // 2])


def kde_values(pool, xs, bandwidth: float) -> np.ndarray:
    """Gaussian kernel density of the pool at the query points.

    Evaluated in blocks so a dense grid over a wide pool cannot blow up the
    (queries x pool) intermediate.
    """
    vals = _values(pool)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.empty(xs.shape)
    block = max(1, (1 << 22) // len(vals))
    for start in range(0, len(xs), block):
        z = (vals[None, :] - xs[start:start + block, None]) / bandwidth
        out[start:start + block] = np.exp(-0.5 * z * z).sum(axis=1)
    return out / (len(vals) * bandwidth * _SQRT_2PI)


def median_shift(pool, config: SelectionConfig = SelectionConfig()) -> float:
    """Mode of the pool under iterated windowed Tukey medians.

    From every pool point, the current value is replaced by the Tukey median
    of all pool points within the bandwidth window until a fixed point is
    reached.  Fixed points within two bandwidths have overlapping windows and
    describe the same mode, so their basins are pooled (the usual mean-shift
    mode merge); the mode attracting the largest basin wins, represented by
    its highest-density fixed point.  Ties go first to the larger window
    population and then to the smaller value.  The result is always an
    element of the pool.
    """
    vals = _values(pool)
    h = config.bandwidth
    svals = np.sort(vals)

    def window_median(x):
        lo = np.searchsorted(svals, x - h, side="left")
        hi = np.searchsorted(svals, x + h, side="right")
        win = svals[lo:hi]
        return float(win[(len(win) - 1) // 2]), len(win)

    basins = {}
    populations = {}
    for start in vals:
        x = float(start)
        seen = set()
        for _ in range(1000):
            seen.add(x)
            nxt, _ = window_median(x)
            if nxt == x or nxt in seen:
                x = nxt
                break
            x = nxt
        basins[x] = basins.get(x, 0) + 1
        populations[x] = window_median(x)[1]

    # fixed points whose windows overlap belong to a single mode
    points = sorted(basins)
    groups = []
    for p in points:
        if groups and p - groups[-1][-1] <= 2.0 * h:
            groups[-1].append(p)
        else:
            groups.append([p])

    def represent(group):
        dens = kde_values(vals, np.array(group), h)
        rep = max(zip(group, dens),
                  key=lambda md: (md[1], populations[md[0]], -md[0]))[0]
        return rep, sum(basins[m] for m in group)

    reps = [represent(g) for g in groups]
    return max(reps, key=lambda rb: (rb[1], populations[rb[0]], -rb[0]))[0]


def kde_gradient_ascent(x0: float, pool,
                        config: SelectionConfig = SelectionConfig()) -> float:
    """Gaussian-kernel mean-shift ascent from x0 to a local density maximum.

    Fixed-point iteration that never decreases the density; stops after
    max_iterations or when the step drops below the tolerance
    (1e-6 * bandwidth by default).
    """
    vals = _values(pool)
    h = config.bandwidth
    x = float(x0)
    for _ in range(config.max_iterations):
        z = (vals - x) / h
        w = np.exp(-0.5 * z * z)
        total = w.sum()
        if total <= 0.0:
            break
        nxt = float((w * vals).sum() / total)
        done = abs(nxt - x) <= config.step_tolerance
        x = nxt
        if done:
            break
    return x


def kernel_voting(pool, config: SelectionConfig = SelectionConfig()) -> float:
    """Baseline selector: KDE maximizer over a dense grid across the pool.

    Grid step is bandwidth / 10; exact ties go to the smaller value.
    """
    vals = _values(pool)
    lo, hi = float(vals.min()), float(vals.max())
    if hi == lo:
        return lo
    count = int(np.ceil((hi - lo) / (config.bandwidth / 10.0))) + 1
    xs = np.linspace(lo, hi, max(count, 2))
    dens = kde_values(vals, xs, config.bandwidth)
    top = dens.max()
    return float(xs[np.nonzero(dens >= top * (1.0 - 1e-12))[0][0]])

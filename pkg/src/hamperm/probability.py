"""Exact probability formulas, tail bounds and Monte Carlo checks.

Counts are exact integers or ``Fraction`` values.  Floats appear only in
the analytic bounds and the simulations.  The simulations place the tour
``(1 2 ... n)`` on a circle and test whether random chords properly cross.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Literal

import numpy as np

from hamperm.errors import InputError


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise InputError(msg)


def p_admissible_3cycle(n: int) -> Fraction:
    """Chance that a random pseudo 3-cycle keeps the tour a single cycle."""
    _need(n >= 4, "n must be at least 4")
    return Fraction(n - 3, 2 * (n - 2))


def p_proper_intersection(n: int) -> Fraction:
    """Chance that two random non-tour chords properly cross."""
    _need(n >= 4, "n must be at least 4")
    return Fraction(n - 3, 3 * (n - 2))


def intersection_counts(n: int) -> tuple[int, int]:
    """(successes, failures) over chords (1, j) and (r, s) with 2 <= r < j."""
    _need(n >= 4, "n must be at least 4")
    ok = sum((n - j) * (j - 2) for j in range(3, n + 1))
    bad = sum((j - 2) ** 2 for j in range(3, n + 1))
    return ok, bad


@dataclass(frozen=True)
class TwoMoveCounts:
    """Configuration counts for the two-admissible-moves estimate.

    ``total`` counts every choice of chords ``(i,1), (j,1), (n,k), (n,l),
    (k-1,r), (l-1,s)``; the other two fields count configurations in the
    failure set (fewer than two admissible 3-cycles through ``n``).
    """

    total: int
    count_cases_1_2: int
    count_case_4: int


def two_move_total(n: int) -> int:
    _need(n >= 4, "n must be at least 4")
    return (n - 2) ** 4 * (n - 3) ** 2 // 4


def two_move_counts(n: int) -> TwoMoveCounts:
    """Closed forms of the failure counts (summed exactly, then factored).

    With ``i < j`` and ``k < l`` in ``2..n-1``, ``r`` outside ``{k-1, k}``
    and ``s`` outside ``{l-1, l}``:

    * cases 1 and 2: ``j <= k`` and the chord pairs ``(n,k),(k-1,r)`` and
      ``(n,l),(l-1,s)`` do not both cross;
    * case 4: ``i <= k < j <= l`` and neither pair crosses.
    """
    _need(n >= 8, "n must be at least 8")
    c12 = (n - 4) * (n - 3) * (n - 2) ** 2 * (n - 1) * (3 * n - 5) // 80
    c4 = n * (n - 3) * (n - 2) ** 2 * (n - 1) ** 2 // 72
    return TwoMoveCounts(two_move_total(n), c12, c4)


def p_at_least_two(n: int) -> Fraction:
    c = two_move_counts(n)
    return 1 - Fraction(c.count_cases_1_2 + c.count_case_4, c.total)


def hoeffding_tail(a: int, p: float, alpha: float, side: Literal["lower", "upper"] = "lower") -> float:
    """Bound on ``P(B(a,p) <= (1-alpha)ap)``, or the upper tail.

    The lower tail uses ``exp(-alpha^2 a p / 2)``; the upper tail the
    matching Chernoff form ``exp(-alpha^2 a p / 3)``.
    """
    _need(0 < alpha < 1 and 0 < p < 1 and a >= 1, "need 0<alpha<1, 0<p<1, a>=1")
    if side not in ("lower", "upper"):
        raise InputError("side must be 'lower' or 'upper'")
    return math.exp(-(alpha**2) * a * p / (2 if side == "lower" else 3))


def binomial_cdf(a: int, p: Fraction, k: int) -> Fraction:
    """Exact ``P(B(a, p) <= k)``."""
    p = Fraction(p)
    return sum((math.comb(a, x) * p**x * (1 - p) ** (a - x) for x in range(0, min(k, a) + 1)), Fraction(0))


def binomial_pmf(a: int, p: Fraction, x: int) -> Fraction:
    p = Fraction(p)
    return math.comb(a, x) * p**x * (1 - p) ** (a - x)


def hypergeometric_pmf(population: int, successes: int, draws: int, x: int) -> Fraction:
    """Exact probability of ``x`` successes when drawing without replacement."""
    _need(0 <= successes <= population and 0 <= draws <= population, "bad hypergeometric parameters")
    return Fraction(
        math.comb(successes, x) * math.comb(population - successes, draws - x),
        math.comb(population, draws),
    )


def occupancy_all_occupied(r: int, n: int) -> Fraction:
    """Probability that ``r`` uniform balls leave none of ``n`` boxes empty."""
    _need(r >= 0 and n >= 1, "need r >= 0 and n >= 1")
    return sum(
        ((-1) ** v * math.comb(n, v) * Fraction(n - v, n) ** r for v in range(n + 1)),
        Fraction(0),
    )


def occupancy_pi(r: int, n: int, m: int) -> Fraction:
    """Chance that a given box receives at most ``m`` of ``r`` balls."""
    q = Fraction(1, n)
    return sum((math.comb(r, j) * q**j * (1 - q) ** (r - j) for j in range(m + 1)), Fraction(0))


def poisson_occupancy_tv_bound(r: int, n: int, m: int) -> float:
    """Total-variation bound between the count of boxes with at most ``m``
    balls and a Poisson law with the same mean (equal box probabilities)."""
    _need(r >= 3 and n >= 1 and m >= 0, "need r >= 3, n >= 1, m >= 0")
    lr = math.log(r)
    llr = math.log(lr)
    denom = r - lr - m * llr - 4 * m
    if denom <= 0:
        raise InputError("bound inapplicable: r too small for m")
    pi = float(occupancy_pi(r, n, m))
    lam = n * pi
    if lam == 0:
        return 0.0
    inner = (lr + m * llr + 5 * m) / denom * lam + 4 / r
    return (1 - math.exp(-lam)) * (pi + r / lam * inner**2)


_POWER_SUMS: dict[int, Callable[[int], int]] = {
    1: lambda n: n * (n + 1) // 2,
    2: lambda n: n * (n + 1) * (2 * n + 1) // 6,
    3: lambda n: (n * (n + 1) // 2) ** 2,
    4: lambda n: n * (n + 1) * (2 * n + 1) * (3 * n * n + 3 * n - 1) // 30,
    5: lambda n: n * n * (n + 1) ** 2 * (2 * n * n + 2 * n - 1) // 12,
}


def power_sum(k: int, n: int) -> int:
    """``1^k + 2^k + ... + n^k`` for ``k`` in 1..5."""
    _need(k in _POWER_SUMS, "k must be in 1..5")
    _need(n >= 1, "n must be positive")
    return _POWER_SUMS[k](n)


# Monte Carlo -----------------------------------------------------------------


def _split(trials: int, seed: int | None, workers: int, fn: Callable[[np.random.Generator, int], int]) -> float:
    """Run ``fn`` on ``workers`` independent sub-streams and pool the hits."""
    _need(trials >= 1 and workers >= 1, "need trials >= 1 and workers >= 1")
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(workers)]
    sizes = [trials // workers + (i < trials % workers) for i in range(workers)]
    if workers == 1:
        hits = fn(streams[0], sizes[0])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(fn, streams, sizes))
    return hits / trials


def _chunks(size: int, chunk: int = 1 << 18):
    while size > 0:
        yield min(size, chunk)
        size -= chunk


def mc_3cycle(n: int, trials: int, seed: int | None = None, workers: int = 1) -> float:
    """Pick chord ``(1, t)``, then a chord from ``t-1`` to any vertex other
    than ``t-1, t``; count how often the two properly cross."""
    _need(n >= 4, "n must be at least 4")

    def run(rng: np.random.Generator, size: int) -> int:
        hits = 0
        for c in _chunks(size):
            t = rng.integers(3, n + 1, size=c)
            u = rng.integers(1, n - 1, size=c)
            s = np.where(u < t - 1, u, u + 2)
            hits += int(np.count_nonzero(s > t))
        return hits

    return _split(trials, seed, workers, run)


def mc_intersection(n: int, trials: int, seed: int | None = None, workers: int = 1) -> float:
    """Chord ``(1, j)`` against ``(r, s)`` with ``2 <= r < j`` and ``s`` not
    in ``{r, r+1}``, sampled uniformly over all such triples."""
    _need(n >= 4, "n must be at least 4")

    def run(rng: np.random.Generator, size: int) -> int:
        hits = 0
        for c in _chunks(size):
            x = rng.integers(2, n + 1, size=c)
            y = rng.integers(2, n, size=c)
            y = np.where(y >= x, y + 1, y)
            r, j = np.minimum(x, y), np.maximum(x, y)
            u = rng.integers(1, n - 1, size=c)
            s = np.where(u < r, u, u + 2)
            hits += int(np.count_nonzero(s > j))
        return hits

    return _split(trials, seed, workers, run)


def mc_two_admissible(n: int, trials: int, seed: int | None = None, workers: int = 1) -> float:
    """Fraction of random configurations outside the failure set described
    in :func:`two_move_counts`."""
    _need(n >= 8, "n must be at least 8")

    def pair(rng: np.random.Generator, c: int):
        x = rng.integers(2, n, size=c)
        y = rng.integers(2, n - 1, size=c)
        y = np.where(y >= x, y + 1, y)
        return np.minimum(x, y), np.maximum(x, y)

    def avoid_two(rng: np.random.Generator, lo, c: int):
        # uniform over 1..n with lo and lo+1 removed
        u = rng.integers(1, n - 1, size=c)
        return np.where(u < lo, u, u + 2)

    def run(rng: np.random.Generator, size: int) -> int:
        hits = 0
        for c in _chunks(size):
            i, j = pair(rng, c)
            k, l = pair(rng, c)
            r = avoid_two(rng, k - 1, c)
            s = avoid_two(rng, l - 1, c)
            cross_b = (r > k) & (r < n)
            cross_b2 = (s > l) & (s < n)
            fail = ((j <= k) & ~(cross_b & cross_b2)) | (
                (i <= k) & (k < j) & (j <= l) & ~cross_b & ~cross_b2
            )
            hits += int(np.count_nonzero(~fail))
        return hits

    return _split(trials, seed, workers, run)

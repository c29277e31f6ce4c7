"""Independent brute-force references.  Nothing here imports hamperm."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


# permutations as dicts -------------------------------------------------------


def cycle_perm(order):
    """The n-cycle visiting ``order``: x -> next element."""
    return {x: order[(i + 1) % len(order)] for i, x in enumerate(order)}


def perm_from_cycles(n, *cycles):
    p = {x: x for x in range(1, n + 1)}
    for cyc in cycles:
        for i, x in enumerate(cyc):
            p[x] = cyc[(i + 1) % len(cyc)]
    return p


def compose(h, s):
    """(h o s)(x) = h(s(x))."""
    return {x: h[s[x]] for x in h}


def cycle_count(p):
    seen, count = set(), 0
    for x in p:
        if x in seen:
            continue
        count += 1
        while x not in seen:
            seen.add(x)
            x = p[x]
    return count


def is_single_cycle(p):
    return cycle_count(p) == 1


def walk(p, start):
    out = [start]
    while p[out[-1]] != start:
        out.append(p[out[-1]])
    return out


# chord geometry on the canonical circle 1..n -------------------------------


def chords_cross(p, q, x, y):
    """Proper crossing of chords {p,q} and {x,y} on points placed 1..n in order.

    Shared endpoints never count as a crossing.
    """
    if len({p, q, x, y}) < 4:
        return False
    lo, hi = min(p, q), max(p, q)
    return (lo < x < hi) != (lo < y < hi)


def clockwise_by_rotation(pos, a, b, c, n):
    """Whether positions rotate to an increasing triple (tries every shift)."""
    return any(
        (pos[a] - k) % n < (pos[b] - k) % n < (pos[c] - k) % n for k in range(n)
    )


# counting references -----------------------------------------------------------


def three_cycle_space(n):
    """Proof space for the single-3-cycle estimate: (t, s) with success flag."""
    for t in range(3, n + 1):
        for s in range(1, n + 1):
            if s in (t - 1, t):
                continue
            yield t, s, s > t


def intersection_space(n):
    """(successes, failures) over chords (1, j), (r, s), 2 <= r < j, s not in {r, r+1}."""
    ok = bad = 0
    for j in range(3, n + 1):
        for r in range(2, j):
            for s in range(1, n + 1):
                if s in (r, r + 1):
                    continue
                if chords_cross(1, j, r, s):
                    ok += 1
                else:
                    bad += 1
    return ok, bad


def two_move_failures(n):
    """(total, cases 1-2, case 4) by looping over all six chord choices.

    Chords (i,1), (j,1), (n,k), (n,l), (k-1,r), (l-1,s) with i < j and
    k < l in 2..n-1, r not in {k-1,k}, s not in {l-1,l}.
    """
    total = c12 = c4 = 0
    mids = range(2, n)
    for i, j in itertools.combinations(mids, 2):
        for k, l in itertools.combinations(mids, 2):
            for r in range(1, n + 1):
                if r in (k - 1, k):
                    continue
                cb = chords_cross(n, k, k - 1, r)
                for s in range(1, n + 1):
                    if s in (l - 1, l):
                        continue
                    total += 1
                    cb2 = chords_cross(n, l, l - 1, s)
                    if j <= k and not (cb and cb2):
                        c12 += 1
                    elif i <= k < j <= l and not cb and not cb2:
                        c4 += 1
    return total, c12, c4


def surjections_by_enumeration(r, n):
    return sum(1 for f in itertools.product(range(n), repeat=r) if len(set(f)) == n)


def surjections_by_stirling(r, n):
    """n! * S(r, n) using the recurrence S(r,k) = k S(r-1,k) + S(r-1,k-1)."""
    row = [1] + [0] * n
    for _ in range(r):
        row = [0] + [k * row[k] + row[k - 1] for k in range(1, n + 1)]
    return math.factorial(n) * row[n]


def binomial_cdf_exact(a, p, k):
    p = Fraction(p)
    return sum(math.comb(a, x) * p**x * (1 - p) ** (a - x) for x in range(k + 1))


def power_sum_loop(k, n):
    return sum(j**k for j in range(1, n + 1))

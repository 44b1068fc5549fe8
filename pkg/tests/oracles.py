"""Brute-force reference implementations, pure Python and deliberately naive.

These transliterate the metric definitions with plain lists and sorting and
share no code with the package.
"""

import math
from fractions import Fraction


def naive_quantile(xs, q):
    s = sorted(xs)
    pos = Fraction(len(s) - 1) * Fraction(q)
    lo = math.floor(pos)
    frac = pos - lo
    if frac == 0:
        return s[lo]
    return s[lo] + float(frac) * (s[lo + 1] - s[lo])


def naive_iqr(xs):
    return naive_quantile(xs, Fraction(3, 4)) - naive_quantile(xs, Fraction(1, 4))


def tail_k(alpha, n):
    # alpha read as its shortest decimal literal, so 0.07 * 100 is exactly 7
    return max(1, min(n, math.ceil(Fraction(repr(alpha)) * n)))


def naive_cvar_lower(xs, alpha):
    k = tail_k(alpha, len(xs))
    return sum(sorted(xs)[:k]) / k


def naive_cvar_upper(xs, alpha):
    k = tail_k(alpha, len(xs))
    return sum(sorted(xs, reverse=True)[:k]) / k


def naive_diffs(vals):
    return [vals[i] - vals[i - 1] for i in range(1, len(vals))]


def naive_mean(xs):
    return sum(xs) / len(xs)


def naive_pstd(xs):
    m = naive_mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))


def naive_dispersion_within(runs, window=5):
    per_run = []
    for vals in runs:
        d = naive_diffs(vals)
        half = window // 2
        # centre positions whose window lies inside the difference series
        centres = range(half, len(d) - half)
        per_run.append(naive_mean([naive_iqr(d[c - half:c + half + 1]) for c in centres]))
    return naive_mean(per_run), naive_pstd(per_run)


def naive_short_term(runs, alpha):
    pooled = []
    for vals in runs:
        pooled += naive_diffs(vals)
    return -naive_cvar_lower(pooled, alpha)


def naive_long_term(runs, alpha):
    pooled = []
    for vals in runs:
        best = -math.inf
        for v in vals:
            best = max(best, v)
            pooled.append(best - v)
    return naive_cvar_upper(pooled, alpha)


def naive_interp(x, xs, ys):
    for i in range(len(xs)):
        if xs[i] == x:
            return ys[i]
    for i in range(len(xs) - 1):
        if xs[i] < x < xs[i + 1]:
            w = (x - xs[i]) / (xs[i + 1] - xs[i])
            return ys[i] + w * (ys[i + 1] - ys[i])
    raise ValueError("outside range")


def naive_dispersion_across(step_lists, value_lists):
    lo = max(s[0] for s in step_lists)
    hi = min(s[-1] for s in step_lists)
    grid = sorted({s for steps in step_lists for s in steps if lo <= s <= hi})
    per_point = [
        naive_iqr([naive_interp(g, steps, vals) for steps, vals in zip(step_lists, value_lists)])
        for g in grid
    ]
    return naive_mean(per_point), naive_pstd(per_point)


def naive_risk_across_runs(runs, alpha, k=1):
    finals = [sum(vals[-k:]) / k for vals in runs]
    return naive_cvar_lower(finals, alpha)

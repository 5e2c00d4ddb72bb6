"""Independent reference computations used as test oracles.

They share only the scalar inner product (``np.dot`` on two 1-D arrays)
with the library; everything else (scans, counting, summation) is done the
slow, obvious way, with exact rationals where precision matters.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def nn_double_loop(x, templates_by_class):
    """Exhaustive (class, template) scan; ties to the smallest class id."""
    best = None
    for y in templates_by_class:
        for t in templates_by_class[y]:
            s = float(np.dot(t, x))
            if best is None or s > best[1] or (s == best[1] and y < best[0]):
                best = (y, s)
    return best


def window_offsets(extent, side, step):
    last = extent - side
    offs = set()
    k = 0
    while k * step <= last:
        offs.add(math.floor(k * step))
        k += 1
    offs.add(last)
    return sorted(offs)


def counting_metrics(pairs):
    tp = n_pred = n_gt = 0
    for pred, gt in pairs:
        for y in pred:
            n_pred += 1
            if y in gt:
                tp += 1
        n_gt += len(gt)
    p = Fraction(tp, n_pred) if n_pred else Fraction(0)
    r = Fraction(tp, n_gt) if n_gt else Fraction(0)
    f = 2 * p * r / (p + r) if p + r else Fraction(0)
    return float(p), float(r), float(f)


def exact_sum(values):
    return sum((Fraction(v) for v in values), Fraction(0))


def exact_mae(pred_vals, gt_vals):
    n = len(pred_vals)
    mae = sum((abs(Fraction(p) - Fraction(g)) for p, g in zip(pred_vals, gt_vals)), Fraction(0)) / n
    mean_gt = exact_sum(gt_vals) / n
    return float(mae), float(mae / mean_gt) if mean_gt else None


def exact_pearson(xs, ys):
    n = len(xs)
    X = [Fraction(x) for x in xs]
    Y = [Fraction(y) for y in ys]
    sx, sy = sum(X), sum(Y)
    cov = n * sum(a * b for a, b in zip(X, Y)) - sx * sy
    vx = n * sum(a * a for a in X) - sx * sx
    vy = n * sum(b * b for b in Y) - sy * sy
    return float(cov) / math.sqrt(float(vx) * float(vy))

"""Pure-Python/numpy versions of the compiled kernels in ``_core.pyx``.

Same signatures, same floating-point operation order, so both backends
return bit-identical results.
"""
import numpy as np


def posterior_step(prior, p01, p11):
    p0 = 1.0 - prior
    num = prior * (p11 * p11 + (1.0 - p11) * p01)
    den = num + p0 * p01 * ((1.0 - p01) + p11)
    if den == 0.0:
        return prior, True
    if p01 == p11:
        return prior, False
    return num / den, False


def posterior_chain(prior, p01, p11, eps, max_steps):
    """Iterate the posterior map; returns (iterates, vacuous, converged)."""
    p = float(prior)
    out = [p]
    vacuous = False
    converged = 1.0 - p < eps
    while not converged and len(out) <= max_steps:
        p, flag = posterior_step(p, p01, p11)
        vacuous = vacuous or flag
        out.append(p)
        converged = 1.0 - p < eps
    return np.array(out, dtype=np.float64), vacuous, converged


def window_counts(times, offsets, edges):
    """counts[c, e] = number of alarms of cycle c with time <= edges[e]."""
    times = np.asarray(times, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.int64)
    edges = np.asarray(edges, dtype=np.float64)
    n_cycles = len(offsets) - 1
    cycle_of = np.repeat(np.arange(n_cycles), np.diff(offsets))
    out = np.zeros((n_cycles, len(edges)), dtype=np.int64)
    for e, edge in enumerate(edges):
        out[:, e] = np.bincount(cycle_of[times <= edge], minlength=n_cycles)
    return out


def bootstrap_sums(values, idx):
    """sums[b, m] = sum_j values[idx[b, j], m]."""
    values = np.asarray(values, dtype=np.int64)
    return values[np.asarray(idx)].sum(axis=1, dtype=np.int64)

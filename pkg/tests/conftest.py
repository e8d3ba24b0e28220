import numpy as np
from scipy.optimize import linear_sum_assignment


def multiset_deviation(a, b) -> float:
    """Max matched distance between two complex multisets (optimal assignment).

    Plain sorted comparison is unusable for conjugate pairs: which member
    comes first under (Re, Im) ordering is decided by ~1e-15 noise in the
    equal real parts.
    """
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    assert a.size == b.size
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def reconstruct_from_roots(roots, leading) -> np.ndarray:
    """Expand leading * prod (y - r_i) stably (ascending coefficients).

    Factors are multiplied as a balanced tree over bit-reversed angular
    order, so every partial product covers the root set roughly uniformly;
    sequential products over angular arcs are catastrophically
    ill-conditioned for ~100 near-unimodular roots.
    """
    roots = np.asarray(roots)
    order = np.argsort(np.angle(roots))
    n = roots.size
    bits = max(1, int(np.ceil(np.log2(n))))
    ranks = sorted(range(n), key=lambda k: int(format(k, f"0{bits}b")[::-1], 2))
    layer = [np.array([-roots[order[k]], 1.0]) for k in ranks]
    while len(layer) > 1:
        nxt = [np.convolve(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0] * leading

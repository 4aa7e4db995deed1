"""Independent oracles: deliberately different computation paths from the
package, used to pin expected values before trusting the implementation."""

from __future__ import annotations

import itertools


def defining_identity_max_error(X, m, Y, subset_cap: int = 10) -> float:
    """Max |sum_A Y dP_s - sum_{m^-1(A)} X dP_t| over subsets A of the target.

    All subsets are enumerated when the target has at most subset_cap
    outcomes; above that, singletons plus the full space (additivity makes
    that equivalent).  Y is checked against the identity, never recomputed.
    """
    target, source = m.target, m.source
    pulled = {o: 0.0 for o in target.outcomes}
    for o in source.outcomes:
        pulled[m.mapping[o]] += X.values[o] * source.weight(o)

    def err(A) -> float:
        lhs = sum(Y.values[o] * target.weight(o) for o in A)
        rhs = sum(pulled[o] for o in A)
        return abs(lhs - rhs)

    outcomes = target.outcomes
    if len(outcomes) <= subset_cap:
        worst = 0.0
        for size in range(len(outcomes) + 1):
            for A in itertools.combinations(outcomes, size):
                worst = max(worst, err(A))
        return worst
    singles = max(err((o,)) for o in outcomes)
    return max(singles, err(outcomes))


def crr_backward_induction(leaf_values, q1: float, q0: float, growth: float):
    """Classical array-style backward induction on a full binary tree.

    leaf_values[i] indexes leaves by their path bits read as a binary number
    (earliest move = most significant bit).  Returns nodal levels,
    levels[k][j] = one-step-discounted average of the two children, starting
    from the raw payoffs; divide levels[k][j] by growth**k for the
    time-0-discounted price at that node.
    """
    depth = (len(leaf_values) - 1).bit_length() if len(leaf_values) > 1 else 0
    assert len(leaf_values) == 2**depth
    level = [float(v) for v in leaf_values]
    levels = [list(level)]
    for _ in range(depth):
        level = [(q1 * level[2 * j + 1] + q0 * level[2 * j]) / growth for j in range(len(level) // 2)]
        levels.append(list(level))
    levels.reverse()
    return levels


def sibling_weight_from_linear_equation(c1: float, c0: float) -> float:
    """Solve 1 = c1*x + c0*(1 - x) directly."""
    return (1.0 - c0) / (c1 - c0)

"""Operation budgets: closed-form per-update costs and runtime counters.

``complexity_count`` evaluates the closed-form addition/multiplication
budgets of each algorithm family as functions of the filter length ``m``,
the inner-iteration count ``J`` (full-CG variants) and the linked-neighbor
count ``L`` (diffusion variants).

The runtime counters price *executed* work in the same units: trajectory
runners report event counts (node updates, CG inner iterations actually
run, combination links actually used), and :func:`runtime_counts` maps
those events onto the per-update budgets.  For the full-CG variants the
budget splits into a per-update base plus a per-inner-iteration term, so
early exits from a degenerate direction show up in the totals.  By
construction the mapping carries no extra bookkeeping term (the documented
offset between runtime totals and ``complexity_count`` at nominal ``J`` and
``L`` is zero).

The affine-projection baseline has no standard published budget; it is
priced by this library's own accounting (:func:`ap_budget`) and excluded
from ``complexity_count``.
"""

from __future__ import annotations

_ID_ALGORITHMS = ("idccg", "idmcg", "idlms", "idrls")
_DD_ALGORITHMS = ("ddccg", "ddmcg", "ddlms", "ddrls")


def _base_counts(alg: str, m: int, J: int | None):
    """Per-update (adds, mults) of the incremental families."""
    if alg == "idlms":
        return 4 * m - 1, 3 * m + 1
    if alg == "idrls":
        return m * m + 4 * m - 1, m * m + 5 * m
    if alg == "idmcg":
        return 3 * m * m + 11 * m - 5, 4 * m * m + 11 * m - 2
    if alg == "idccg":
        if J is None:
            raise ValueError("the full-CG variant needs the inner-iteration count J")
        adds = m * m + 2 * m - 2 + J * (2 * m * m + 7 * m - 2)
        mults = m * m + 3 * m + J * (3 * m * m + 6 * m - 2)
        return adds, mults
    raise ValueError(f"no closed-form budget for algorithm {alg!r}")


def ccg_split(m: int):
    """The full-CG budget as (base, per-inner-iteration) (adds, mults) pairs."""
    return (m * m + 2 * m - 2, m * m + 3 * m), (2 * m * m + 7 * m - 2, 3 * m * m + 6 * m - 2)


def complexity_count(algorithm: str, m: int, J: int | None = None, L: int | None = None):
    """Closed-form per-node-update (additions, multiplications).

    ``algorithm`` is one of idccg/idmcg/idlms/idrls or the diffusion
    counterparts ddccg/ddmcg/ddlms/ddrls (case-insensitive).  ``J`` is
    required for the full-CG variants and ``L`` for the diffusion variants
    (each diffusion update adds ``L*m`` to both counts for the neighbor
    combination).
    """
    alg = algorithm.strip().lower()
    if alg in _ID_ALGORITHMS:
        return _base_counts(alg, m, J)
    if alg in _DD_ALGORITHMS:
        if L is None:
            raise ValueError("diffusion variants need the linked-neighbor count L")
        adds, mults = _base_counts("id" + alg[2:], m, J)
        return adds + L * m, mults + L * m
    raise ValueError(f"no closed-form budget for algorithm {algorithm!r}")


def ap_budget(m: int, k: int):
    """This library's per-update accounting for order-``k`` affine projection.

    Error block: k inner products plus k subtractions; Gram matrix: k^2
    inner products plus the ridge; k x k solve priced at k^3 + k^2 for both
    op kinds; update: m inner products of length k plus scale and add.
    """
    adds = k * m + k * k * (m - 1) + k + k**3 + k * k + m * (k - 1) + m
    mults = k * m + k * k * m + k**3 + k * k + m * k + m
    return adds, mults


def runtime_counts(strategy: str, algorithm: str, m: int, events: dict, projection_order: int | None = None):
    """Price executed events in per-update budget units.

    ``events`` comes from the trajectory runners: ``node_updates`` always,
    ``inner_iterations`` for the CG variants, ``neighbor_links`` for
    diffusion runs (sum over updates of linked neighbors combined).
    """
    updates = int(events.get("node_updates", 0))
    if algorithm == "lms":
        per = (4 * m - 1, 3 * m + 1)
        adds, mults = per[0] * updates, per[1] * updates
    elif algorithm == "rls":
        adds, mults = (m * m + 4 * m - 1) * updates, (m * m + 5 * m) * updates
    elif algorithm == "mcg":
        adds, mults = (3 * m * m + 11 * m - 5) * updates, (4 * m * m + 11 * m - 2) * updates
    elif algorithm == "ccg":
        inner = int(events.get("inner_iterations", 0))
        (badds, bmults), (iadds, imults) = ccg_split(m)
        adds = badds * updates + iadds * inner
        mults = bmults * updates + imults * inner
    elif algorithm == "ap":
        if projection_order is None:
            raise ValueError("affine projection pricing needs the projection order")
        a, mu = ap_budget(m, projection_order)
        adds, mults = a * updates, mu * updates
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if strategy == "diffusion":
        links = int(events.get("neighbor_links", 0))
        adds += links * m
        mults += links * m
    elif strategy != "incremental":
        raise ValueError(f"unknown strategy {strategy!r}")
    return adds, mults

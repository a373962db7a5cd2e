"""Branch-and-bound over LP relaxations solved by the bounded simplex.

Branching fixes the most-fractional binary (ties to the lowest variable
index); nodes are explored best-bound-first with FIFO tie-breaking. Each
node solution is polished within its optimal face (minimum total activity),
which strips the degenerate flows that otherwise leave big-M indicator
binaries fractional, and a rounding heuristic (fix binaries, re-solve the
continuous LP) supplies early incumbents. The search is deterministic:
re-solving an identical model yields bit-identical results.
"""

from __future__ import annotations

import heapq
import itertools
import time

import numpy as np
import scipy.sparse as sp

from .model import MilpModel, MilpSolution, SolveParams, SolveStatus
from .simplex import solve_lp

__all__ = ["solve_reference"]


def _lp(arr, lb, ub, c, feas_tol, deadline=None):
    return solve_lp(arr.a, arr.relations, arr.rhs, c, lb, ub, feas_tol=feas_tol,
                    deadline=deadline)


class _Polisher:
    """Re-optimizes a node solution on its optimal face, minimizing the
    total continuous activity above lower bounds. Degenerate vertices with
    simultaneous opposing flows are replaced by clean ones, after which
    big-M indicator binaries can be reassigned directly from their flows,
    leaving fractionality only on binaries that carry real relaxation gap."""

    def __init__(self, arr, c):
        flows = ~arr.binary & np.isfinite(arr.lb)
        self.enabled = bool(flows.any()) and bool(arr.binary.any())
        if not self.enabled:
            return
        self.c_pol = np.where(flows, 1.0, 0.0)
        self.a = sp.vstack([arr.a, sp.csr_matrix(c)], format="csc")
        self.relations = np.concatenate([arr.relations, [0]]).astype(np.int8)
        self.rhs = np.concatenate([arr.rhs, [0.0]])

    def polish(self, lb, ub, objective, feas_tol, deadline=None):
        rhs = self.rhs.copy()
        rhs[-1] = objective + 1e-7 * max(1.0, abs(objective))
        return solve_lp(self.a, self.relations, rhs, self.c_pol, lb, ub,
                        feas_tol=feas_tol, deadline=deadline)


def _feasible_point(arr, x, lb, ub, feas_tol) -> bool:
    resid = arr.a @ x - arr.rhs
    if ((arr.relations == 0) & (resid > feas_tol)).any():
        return False
    if ((arr.relations == 1) & (np.abs(resid) > feas_tol)).any():
        return False
    if ((arr.relations == 2) & (resid < -feas_tol)).any():
        return False
    return bool((x >= lb - feas_tol).all() and (x <= ub + feas_tol).all())


def _reassign_indicators(arr, x, pure, flow_of, lb, ub, feas_tol):
    """Set each pure-indicator binary to whether its flow is active, keeping
    branch fixings; returns the adjusted point or None if it breaks a row
    (e.g. residual simultaneous flows)."""
    if not pure:
        return None
    x2 = x.copy()
    for b in pure:
        x2[b] = np.clip(1.0 if x[flow_of[b]] > 1e-7 else 0.0, lb[b], ub[b])
    if _feasible_point(arr, x2, lb, ub, feas_tol):
        return x2
    return None


def _discover_structure(arr):
    """One-off scan for two common MILP motifs used by the rounding and
    cleanup heuristics: exclusivity rows ``x_a + x_b <= 1`` over two
    binaries, and big-M coupling rows ``p - M x <= 0`` tying a binary to a
    flow. A binary is a *pure indicator* when those two row kinds are its
    only appearances; only pure indicators may be reassigned from their
    flows without re-solving."""
    a_csr = arr.a.tocsr()
    pairs: list[tuple[int, int]] = []
    flow_of: dict[int, int] = {}
    pair_rows: set[int] = set()
    bigm_rows: set[int] = set()
    for r in range(a_csr.shape[0]):
        lo, hi = a_csr.indptr[r], a_csr.indptr[r + 1]
        if hi - lo != 2:
            continue
        j1, j2 = a_csr.indices[lo:hi]
        v1, v2 = a_csr.data[lo:hi]
        rel, rhs = arr.relations[r], arr.rhs[r]
        if (
            rel == 0 and rhs == 1.0 and v1 == 1.0 and v2 == 1.0
            and arr.binary[j1] and arr.binary[j2]
        ):
            pairs.append((int(j1), int(j2)))
            pair_rows.add(r)
        elif rel == 0 and rhs == 0.0 and arr.binary[j1] != arr.binary[j2]:
            jb, vb = (j1, v1) if arr.binary[j1] else (j2, v2)
            jf, vf = (j2, v2) if arr.binary[j1] else (j1, v1)
            if vb < 0 < vf:
                if jb not in flow_of:
                    flow_of[int(jb)] = int(jf)
                bigm_rows.add(r)
    pure: set[int] = set()
    a_csc = arr.a
    for b in np.nonzero(arr.binary)[0]:
        rows = a_csc.indices[a_csc.indptr[b] : a_csc.indptr[b + 1]]
        if int(b) in flow_of and all(r in pair_rows or r in bigm_rows for r in rows):
            pure.add(int(b))
    return pairs, flow_of, pure


def _heuristic_fix(arr, lb, ub, c, x_lp, bin_idx, params, pairs, flow_of, deadline=None):
    """Fix binaries from the node LP point and polish the continuous part.

    The primary candidate is a ceiling fix (any positive activity keeps its
    binary on, respecting big-M coupling rows) with exclusivity conflicts
    resolved in favor of the larger coupled flow; nearest rounding is the
    fallback. Returns the best feasible (x, objective) or None.
    """
    ceil_fix = np.zeros(arr.binary.size)
    ceil_fix[bin_idx] = (x_lp[bin_idx] > params.int_tol).astype(float)
    for j_a, j_b in pairs:
        if ceil_fix[j_a] == 1.0 and ceil_fix[j_b] == 1.0:
            flow_a = x_lp[flow_of[j_a]] if j_a in flow_of else x_lp[j_a]
            flow_b = x_lp[flow_of[j_b]] if j_b in flow_of else x_lp[j_b]
            ceil_fix[j_b if flow_a >= flow_b else j_a] = 0.0

    best = None
    tried = set()
    for fix in (ceil_fix[bin_idx], np.round(x_lp[bin_idx])):
        fix = np.clip(fix, lb[bin_idx], ub[bin_idx])
        key = fix.tobytes()
        if key in tried:
            continue
        tried.add(key)
        lb2, ub2 = lb.copy(), ub.copy()
        lb2[bin_idx] = fix
        ub2[bin_idx] = fix
        res = _lp(arr, lb2, ub2, c, params.feas_tol, deadline)
        if res.status == "optimal" and (best is None or res.objective < best[1]):
            best = (res.x, res.objective)
    return best


def solve_reference(model: MilpModel, params: SolveParams) -> MilpSolution:
    """Solve a MILP with the built-in reference backend."""
    arr = model.arrays()
    sign = -1.0 if model.sense == "max" else 1.0
    c = sign * arr.c
    bin_idx = np.nonzero(arr.binary)[0]
    pairs, flow_of, pure = _discover_structure(arr) if bin_idx.size else ([], {}, set())
    polisher = _Polisher(arr, c) if bin_idx.size else None
    deadline = time.monotonic() + params.time_limit

    counter = itertools.count()
    heap = [(-np.inf, next(counter), arr.lb.copy(), arr.ub.copy())]
    incumbent_x = None
    incumbent_obj = np.inf
    min_pruned = np.inf
    root_relaxation = None
    nodes = 0
    iterations = 0
    limit_hit = False
    unbounded = False

    def cutoff() -> float:
        if not np.isfinite(incumbent_obj):
            return np.inf
        return incumbent_obj - params.rel_gap * max(1.0, abs(incumbent_obj))

    while heap:
        if nodes >= params.node_limit or time.monotonic() > deadline:
            limit_hit = True
            break
        est, _, lb, ub = heapq.heappop(heap)
        if est >= cutoff():
            # best-bound order: every remaining node is at least as bad
            min_pruned = min(min_pruned, est)
            break
        res = _lp(arr, lb, ub, c, params.feas_tol, deadline)
        nodes += 1
        iterations += res.iterations
        if root_relaxation is None and res.status == "optimal":
            root_relaxation = sign * res.objective
        if res.status == "infeasible":
            continue
        if res.status == "time_limit":
            limit_hit = True
            min_pruned = min(min_pruned, est)
            break
        if res.status == "unbounded":
            unbounded = True
            break
        obj = res.objective
        if obj >= cutoff():
            min_pruned = min(min_pruned, obj)
            continue

        frac_lp = np.abs(res.x[bin_idx] - np.round(res.x[bin_idx])) if bin_idx.size else np.zeros(0)
        if bin_idx.size == 0 or frac_lp.max(initial=0.0) <= params.int_tol:
            if obj < incumbent_obj:
                incumbent_obj, incumbent_x = obj, res.x
            continue

        x_node = res.x
        if polisher is not None and polisher.enabled:
            polished = polisher.polish(lb, ub, obj, params.feas_tol, deadline)
            if polished.status == "optimal":
                x_node = polished.x
                iterations += polished.iterations
                cleaned = _reassign_indicators(
                    arr, x_node, pure, flow_of, lb, ub, params.feas_tol
                )
                if cleaned is not None:
                    x_node = cleaned

        frac = np.abs(x_node[bin_idx] - np.round(x_node[bin_idx]))
        if frac.max(initial=0.0) <= params.int_tol:
            val = float(c @ x_node)
            if val < incumbent_obj:
                incumbent_obj, incumbent_x = val, x_node
        else:
            candidate = _heuristic_fix(arr, lb, ub, c, x_node, bin_idx, params,
                                       pairs, flow_of, deadline)
            if candidate is not None and candidate[1] < incumbent_obj:
                incumbent_x, incumbent_obj = candidate[0], candidate[1]
        if incumbent_obj <= obj + params.rel_gap * max(1.0, abs(obj)):
            # an incumbent attains this node's bound: subtree is done
            min_pruned = min(min_pruned, obj)
            continue
        if frac.max(initial=0.0) <= params.int_tol:
            frac = frac_lp  # polish drifted off the face; branch on the raw point
        branch = int(bin_idx[np.argmax(frac)])
        for fixed in (0.0, 1.0):
            lb2, ub2 = lb.copy(), ub.copy()
            lb2[branch] = fixed
            ub2[branch] = fixed
            heapq.heappush(heap, (obj, next(counter), lb2, ub2))

    if unbounded:
        return MilpSolution(
            status=SolveStatus.UNBOUNDED,
            objective=None,
            x=None,
            node_count=nodes,
            iterations=iterations,
        )

    if incumbent_x is not None and bin_idx.size:
        # exact cleanup: re-solve the continuous part under the incumbent's
        # binary assignment so heuristic face tolerances cannot leak into
        # the reported optimum
        fix = np.clip(np.round(incumbent_x[bin_idx]), arr.lb[bin_idx], arr.ub[bin_idx])
        lb2, ub2 = arr.lb.copy(), arr.ub.copy()
        lb2[bin_idx] = fix
        ub2[bin_idx] = fix
        # allow a little slack so the cleanup can still run after a limit
        final = _lp(arr, lb2, ub2, c, params.feas_tol,
                    time.monotonic() + max(5.0, 0.1 * params.time_limit))
        iterations += final.iterations
        if final.status == "optimal" and final.objective <= incumbent_obj + 1e-9:
            incumbent_x, incumbent_obj = final.x, final.objective

    open_bounds = [entry[0] for entry in heap]
    glb = min([incumbent_obj, min_pruned] + open_bounds)
    if incumbent_x is not None:
        gap = max(0.0, (incumbent_obj - glb) / max(1.0, abs(incumbent_obj)))
        status = SolveStatus.LIMIT if limit_hit and gap > params.rel_gap else SolveStatus.OPTIMAL
        return MilpSolution(
            status=status,
            objective=sign * incumbent_obj,
            x=incumbent_x,
            gap=gap,
            bound=sign * glb,
            root_relaxation=root_relaxation,
            node_count=nodes,
            iterations=iterations,
        )
    if limit_hit:
        return MilpSolution(
            status=SolveStatus.LIMIT,
            objective=None,
            x=None,
            bound=sign * glb if np.isfinite(glb) else None,
            root_relaxation=root_relaxation,
            node_count=nodes,
            iterations=iterations,
        )
    return MilpSolution(
        status=SolveStatus.INFEASIBLE,
        objective=None,
        x=None,
        node_count=nodes,
        iterations=iterations,
    )

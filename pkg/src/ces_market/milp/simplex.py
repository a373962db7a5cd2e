"""Bounded-variable primal simplex over dense basis inverses.

Two-phase method: artificial variables absorb initial row infeasibility,
then the true objective is minimized with artificials pinned at zero.
Entering variables follow Dantzig pricing with an automatic switch to
Bland's rule after a long degenerate streak, which guarantees termination.
All tie-breaking is by lowest index, so solves are bit-reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = ["LpResult", "solve_lp", "SimplexFailure"]

_DEADLINE_CHECK_EVERY = 64

# column statuses
_BASIC = 0
_AT_LOWER = 1
_AT_UPPER = 2
_FREE = 3

_DTOL = 1e-9  # reduced-cost threshold
_PTOL = 1e-9  # pivot magnitude threshold
_TIE = 1e-10  # ratio-test tie window
_REFACTOR_EVERY = 120


class SimplexFailure(ArithmeticError):
    """Numerical breakdown or iteration cap hit; callers should treat the
    solve as failed rather than trust any partial result."""


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | time_limit
    x: np.ndarray | None  # structural variable values
    objective: float | None
    iterations: int


def solve_lp(
    a: sp.csc_matrix,
    relations: np.ndarray,
    rhs: np.ndarray,
    c: np.ndarray,
    lb: np.ndarray,
    ub: np.ndarray,
    feas_tol: float = 1e-6,
    max_iter: int | None = None,
    deadline: float | None = None,
) -> LpResult:
    """Minimize ``c @ x`` subject to ``a @ x (<=,=,>=) rhs`` and
    ``lb <= x <= ub`` (entries may be infinite). `deadline` is an absolute
    ``time.monotonic`` instant after which the solve aborts."""
    return _Simplex(a, relations, rhs, c, lb, ub, feas_tol, max_iter, deadline).run()


class _TimeLimit(Exception):
    pass


class _Simplex:
    def __init__(self, a, relations, rhs, c, lb, ub, feas_tol, max_iter, deadline=None):
        self.deadline = deadline
        m, n = a.shape
        self.m, self.n = m, n
        self.n_ext = n + m  # structurals + slacks
        self.a = a
        self.at = a.T.tocsr()
        self.b = np.asarray(rhs, dtype=float)
        self.c_struct = np.asarray(c, dtype=float)
        self.feas_tol = feas_tol
        self.max_iter = max_iter if max_iter is not None else 200 * (m + 1) + 20 * n + 10_000
        self.degen_threshold = max(200, 2 * m)

        # slack bounds by relation: <= gives [0, inf), = gives [0, 0],
        # >= gives (-inf, 0]
        slack_lb = np.where(relations == 2, -np.inf, 0.0)
        slack_ub = np.where(relations == 0, np.inf, 0.0)
        self.lb = np.concatenate([np.asarray(lb, dtype=float), slack_lb])
        self.ub = np.concatenate([np.asarray(ub, dtype=float), slack_ub])
        self.fixed = self.ub - self.lb <= 0.0

        self.vstat = np.empty(self.n_ext, dtype=np.int8)
        self.x = np.zeros(self.n_ext)
        self.basis = np.empty(m, dtype=np.int64)
        self.xb = np.zeros(m)
        self.binv = np.eye(m)
        self.art_sign = np.ones(m)
        self.iterations = 0
        self.pivots_since_refactor = 0
        self._art_cost = 0.0
        self._art_ub = np.inf

    # -- column access ---------------------------------------------------

    def _col(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Sparse (rows, values) of extended column j."""
        if j < self.n:
            lo, hi = self.a.indptr[j], self.a.indptr[j + 1]
            return self.a.indices[lo:hi], self.a.data[lo:hi]
        if j < self.n_ext:
            row = j - self.n
            return np.array([row]), np.array([1.0])
        row = j - self.n_ext
        return np.array([row]), np.array([self.art_sign[row]])

    def _ftran(self, j: int) -> np.ndarray:
        rows, vals = self._col(j)
        if len(rows) == 0:
            return np.zeros(self.m)
        return self.binv[:, rows] @ vals

    # -- setup -----------------------------------------------------------

    def _initial_point(self) -> bool:
        """Place nonbasic variables at bounds, slacks or artificials in the
        basis. Returns True when artificials were needed."""
        lb_s, ub_s = self.lb, self.ub
        finite_lb = np.isfinite(lb_s)
        finite_ub = np.isfinite(ub_s)
        self.x = np.where(finite_lb, lb_s, np.where(finite_ub, ub_s, 0.0))
        self.vstat = np.where(
            finite_lb, _AT_LOWER, np.where(finite_ub, _AT_UPPER, _FREE)
        ).astype(np.int8)

        resid = self.b - (self.a @ self.x[: self.n])
        need_artificial = False
        for row in range(self.m):
            s = self.n + row
            slack_val = min(max(resid[row], lb_s[s]), ub_s[s])
            if abs(resid[row] - slack_val) <= 1e-12:
                self.basis[row] = s
                self.x[s] = resid[row]
                self.vstat[s] = _BASIC
                self.xb[row] = resid[row]
            else:
                self.x[s] = slack_val
                self.vstat[s] = _AT_LOWER if slack_val == lb_s[s] else _AT_UPPER
                gap = resid[row] - slack_val
                self.art_sign[row] = 1.0 if gap >= 0 else -1.0
                self.basis[row] = self.n_ext + row
                self.xb[row] = abs(gap)
                self.binv[row, row] = self.art_sign[row]
                need_artificial = True
        return need_artificial

    # -- factorization ---------------------------------------------------

    def _refactor(self) -> None:
        bmat = np.zeros((self.m, self.m))
        for k, j in enumerate(self.basis):
            rows, vals = self._col(int(j))
            bmat[rows, k] = vals
        try:
            self.binv = np.linalg.inv(bmat)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise SimplexFailure("singular basis") from exc
        self._recompute_xb()
        self.pivots_since_refactor = 0

    def _recompute_xb(self) -> None:
        nb = self.x.copy()
        real_basic = self.basis[self.basis < self.n_ext]
        nb[real_basic] = 0.0
        resid = self.b - self.a @ nb[: self.n] - nb[self.n :]
        self.xb = self.binv @ resid
        mask = self.basis < self.n_ext
        self.x[self.basis[mask]] = self.xb[mask]

    # -- pricing ---------------------------------------------------------

    def _reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        safe = np.minimum(self.basis, self.n_ext - 1)
        cb = np.where(self.basis < self.n_ext, cost[safe], self._art_cost)
        lam = self.binv.T @ cb
        d = np.empty(self.n_ext)
        d[: self.n] = cost[: self.n] - self.at @ lam
        d[self.n :] = cost[self.n :] - lam
        return d

    def _choose_entering(self, d: np.ndarray, bland: bool) -> int:
        nonbasic = self.vstat != _BASIC
        score = np.full(self.n_ext, -np.inf)
        at_lo = nonbasic & (self.vstat == _AT_LOWER) & ~self.fixed
        at_hi = nonbasic & (self.vstat == _AT_UPPER) & ~self.fixed
        free = nonbasic & (self.vstat == _FREE)
        score[at_lo] = -d[at_lo]
        score[at_hi] = d[at_hi]
        score[free] = np.abs(d[free])
        candidates = score > _DTOL
        if not candidates.any():
            return -1
        if bland:
            return int(np.nonzero(candidates)[0][0])
        return int(np.argmax(np.where(candidates, score, -np.inf)))

    # -- main loop ---------------------------------------------------------

    def _iterate(self, cost: np.ndarray) -> str:
        degenerate_streak = 0
        bland = False
        while True:
            if self.iterations >= self.max_iter:
                raise SimplexFailure(f"simplex iteration cap {self.max_iter} exceeded")
            if (
                self.deadline is not None
                and self.iterations % _DEADLINE_CHECK_EVERY == 0
                and time.monotonic() > self.deadline
            ):
                raise _TimeLimit
            d = self._reduced_costs(cost)
            j = self._choose_entering(d, bland)
            if j < 0:
                return "optimal"
            self.iterations += 1
            sigma = 1.0
            if self.vstat[j] == _AT_UPPER or (self.vstat[j] == _FREE and d[j] > 0):
                sigma = -1.0
            w = self._ftran(j)
            deltas = -sigma * w

            t_self = self.ub[j] - self.lb[j]  # may be inf
            safe = np.minimum(self.basis, self.n_ext - 1)
            is_real = self.basis < self.n_ext
            ub_b = np.where(is_real, self.ub[safe], self._art_ub)
            lb_b = np.where(is_real, self.lb[safe], 0.0)
            limits = np.full(self.m, np.inf)
            up = deltas > _PTOL
            dn = deltas < -_PTOL
            with np.errstate(invalid="ignore"):
                limits[up] = (ub_b[up] - self.xb[up]) / deltas[up]
                limits[dn] = (self.xb[dn] - lb_b[dn]) / (-deltas[dn])
            limits = np.maximum(limits, 0.0)
            t_rows = limits.min() if self.m else np.inf
            t = min(t_self, t_rows)
            if not np.isfinite(t):
                return "unbounded"

            if t_self <= t_rows:
                # bound flip: no basis change
                self.x[j] = self.ub[j] if sigma > 0 else self.lb[j]
                self.vstat[j] = _AT_UPPER if sigma > 0 else _AT_LOWER
                if self.m:
                    self.xb = self.xb + deltas * t_self
                    self.x[self.basis[is_real]] = self.xb[is_real]
                continue

            ties = np.nonzero(limits <= t + _TIE)[0]
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                order = np.lexsort((self.basis[ties], -np.abs(w[ties])))
                r = int(ties[order[0]])
            if abs(w[r]) <= _PTOL:
                raise SimplexFailure("pivot element too small")

            if t <= _TIE:
                degenerate_streak += 1
                if degenerate_streak > self.degen_threshold:
                    bland = True
            else:
                degenerate_streak = 0
                bland = False

            leaving = int(self.basis[r])
            self.xb = self.xb + deltas * t
            enter_val = self.x[j] + sigma * t
            if leaving < self.n_ext:
                if deltas[r] > 0:
                    self.x[leaving] = self.ub[leaving]
                    self.vstat[leaving] = _AT_UPPER
                else:
                    self.x[leaving] = self.lb[leaving]
                    self.vstat[leaving] = _AT_LOWER
            self.basis[r] = j
            self.vstat[j] = _BASIC
            self.xb[r] = enter_val
            self.x[j] = enter_val
            is_real = self.basis < self.n_ext
            self.x[self.basis[is_real]] = self.xb[is_real]

            # product-form update of the basis inverse
            piv_row = self.binv[r, :] / w[r]
            self.binv -= np.outer(w, piv_row)
            self.binv[r, :] = piv_row
            self.pivots_since_refactor += 1
            if self.pivots_since_refactor >= _REFACTOR_EVERY:
                self._refactor()

    # -- driver ------------------------------------------------------------

    def run(self) -> LpResult:
        try:
            return self._run()
        except _TimeLimit:
            return LpResult("time_limit", None, None, self.iterations)

    def _run(self) -> LpResult:
        if self._initial_point():
            self._art_cost = 1.0
            self._art_ub = np.inf
            status = self._iterate(np.zeros(self.n_ext))
            if status == "unbounded":  # pragma: no cover - bounded below by 0
                raise SimplexFailure("phase 1 unbounded")
            art_rows = self.basis >= self.n_ext
            art_total = float(self.xb[art_rows].sum()) if art_rows.any() else 0.0
            if art_total > self.feas_tol:
                return LpResult("infeasible", None, None, self.iterations)
            self._drive_out_artificials()

        self._art_cost = 0.0
        self._art_ub = 0.0  # any leftover artificial is pinned at zero
        cost2 = np.concatenate([self.c_struct, np.zeros(self.m)])
        status = self._iterate(cost2)
        if status == "unbounded":
            return LpResult("unbounded", None, None, self.iterations)

        self._recompute_xb()
        x = self.x[: self.n].copy()
        viol = np.maximum(self.lb[: self.n] - x, x - self.ub[: self.n]).max(initial=0.0)
        if viol <= self.feas_tol:
            x = np.clip(x, self.lb[: self.n], self.ub[: self.n])
        obj = float(self.c_struct @ x)
        return LpResult("optimal", x, obj, self.iterations)

    def _drive_out_artificials(self) -> None:
        """Pivot basic artificials (at zero level) out of the basis where a
        real column with a usable pivot element exists; rows without one are
        redundant and keep their artificial pinned at zero."""
        for r in range(self.m):
            j_art = int(self.basis[r])
            if j_art < self.n_ext:
                continue
            row = self.binv[r, :]
            alpha = np.concatenate([self.at @ row, row])
            alpha[self.vstat == _BASIC] = 0.0
            usable = np.nonzero(np.abs(alpha) > 1e-7)[0]
            if len(usable) == 0:
                continue
            j = int(usable[0])
            w = self._ftran(j)
            self.basis[r] = j
            self.vstat[j] = _BASIC
            piv_row = self.binv[r, :] / w[r]
            self.binv -= np.outer(w, piv_row)
            self.binv[r, :] = piv_row
            self.xb[r] = self.x[j]
            self.pivots_since_refactor += 1
        self._recompute_xb()

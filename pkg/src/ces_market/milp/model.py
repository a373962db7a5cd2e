"""Generic mixed-integer linear model container.

A model is built incrementally (variables, then constraints/objective) and
frozen into numpy/scipy arrays on first solve. Variables are continuous or
binary; rows are sparse with a ``<=``, ``=`` or ``>=`` relation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

__all__ = [
    "CONTINUOUS",
    "BINARY",
    "Relation",
    "MilpModel",
    "MilpSolution",
    "SolveParams",
    "SolveStatus",
    "ModelError",
    "new_model",
    "check_solution",
]

CONTINUOUS = "continuous"
BINARY = "binary"

RELATIONS = ("<=", "=", ">=")
Relation = str


class ModelError(ValueError):
    """Malformed model construction (bad id, non-finite coefficient, ...)."""


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    LIMIT = "limit-reached"


@dataclass
class SolveParams:
    """Solver controls.

    `seed` is reserved for backends with randomized heuristics; the
    built-in reference backend is fully deterministic and ignores it.
    """

    feas_tol: float = 1e-6
    int_tol: float = 1e-6
    rel_gap: float = 1e-6
    node_limit: int = 1_000_000
    time_limit: float = 300.0
    seed: int = 0

    def __post_init__(self):
        for name in ("feas_tol", "int_tol", "rel_gap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass
class MilpSolution:
    """Result envelope for one solve.

    When `status` is optimal the point is feasible within tolerance, every
    binary is within the integrality tolerance of 0/1, and `gap` is within
    the configured relative gap. A limit-reached result carries the best
    incumbent found (`x` may be None if there was none).
    """

    status: SolveStatus
    objective: float | None
    x: np.ndarray | None
    gap: float | None = None
    bound: float | None = None
    root_relaxation: float | None = None
    node_count: int = 0
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


def _check_finite(value: float, what: str) -> float:
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        raise ModelError(f"{what} must be finite, got {value}")
    return value


@dataclass
class _Arrays:
    """Frozen numeric view of a model (minimization-ready raw data)."""

    a: sp.csc_matrix
    relations: np.ndarray  # 0: <=, 1: =, 2: >=
    rhs: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray  # bool mask


class MilpModel:
    """Sparse MILP under construction.

    Construction order is deterministic: variable and constraint ids are
    assigned sequentially. `set_objective` replaces the whole objective;
    the last write wins.
    """

    def __init__(self, sense: str = "min"):
        if sense not in ("min", "max"):
            raise ModelError(f"sense must be 'min' or 'max', got {sense!r}")
        self.sense = sense
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._kind: list[str] = []
        self._names: list[str] = []
        self._rows: list[tuple[np.ndarray, np.ndarray]] = []
        self._relations: list[int] = []
        self._rhs: list[float] = []
        self._row_names: list[str] = []
        self._objective: dict[int, float] = {}
        self._arrays: _Arrays | None = None

    @property
    def n_variables(self) -> int:
        return len(self._lb)

    @property
    def n_constraints(self) -> int:
        return len(self._rhs)

    @property
    def variable_names(self) -> list[str]:
        return list(self._names)

    def add_variable(
        self,
        lb: float = 0.0,
        ub: float = math.inf,
        kind: str = CONTINUOUS,
        name: str | None = None,
    ) -> int:
        if kind not in (CONTINUOUS, BINARY):
            raise ModelError(f"unknown variable kind {kind!r}")
        lb, ub = float(lb), float(ub)
        if math.isnan(lb) or math.isnan(ub):
            raise ModelError("variable bounds must not be NaN")
        if lb > ub:
            raise ModelError(f"variable lower bound {lb} exceeds upper bound {ub}")
        if kind == BINARY and (lb < 0 or ub > 1):
            raise ModelError(f"binary variable bounds must lie within [0, 1], got [{lb}, {ub}]")
        vid = len(self._lb)
        self._lb.append(lb)
        self._ub.append(ub)
        self._kind.append(kind)
        self._names.append(name if name is not None else f"x{vid}")
        self._arrays = None
        return vid

    def _coerce_row(self, coeffs) -> tuple[np.ndarray, np.ndarray]:
        if isinstance(coeffs, Mapping):
            items = coeffs.items()
        else:
            items = list(coeffs)
        idx = []
        val = []
        for j, v in items:
            j = int(j)
            if not 0 <= j < self.n_variables:
                raise ModelError(f"variable id {j} out of range (model has {self.n_variables})")
            v = _check_finite(v, f"coefficient of variable {j}")
            if v != 0.0:
                idx.append(j)
                val.append(v)
        return np.asarray(idx, dtype=np.int64), np.asarray(val, dtype=float)

    def add_constraint(
        self,
        coeffs: Mapping[int, float] | Iterable[tuple[int, float]],
        relation: Relation,
        rhs: float,
        name: str | None = None,
    ) -> int:
        if relation not in RELATIONS:
            raise ModelError(f"relation must be one of {RELATIONS}, got {relation!r}")
        idx, val = self._coerce_row(coeffs)
        cid = len(self._rhs)
        self._rows.append((idx, val))
        self._relations.append(RELATIONS.index(relation))
        self._rhs.append(_check_finite(rhs, "constraint rhs"))
        self._row_names.append(name if name is not None else f"c{cid}")
        self._arrays = None
        return cid

    def set_objective(self, coeffs: Mapping[int, float] | Iterable[tuple[int, float]]) -> None:
        idx, val = self._coerce_row(coeffs)
        self._objective = dict(zip(idx.tolist(), val.tolist()))
        self._arrays = None

    def arrays(self) -> _Arrays:
        """Freeze into sparse arrays (cached until the model mutates)."""
        if self._arrays is None:
            n, m = self.n_variables, self.n_constraints
            data, rows, cols = [], [], []
            for r, (idx, val) in enumerate(self._rows):
                rows.extend([r] * len(idx))
                cols.extend(idx.tolist())
                data.extend(val.tolist())
            a = sp.csc_matrix(
                (np.asarray(data, dtype=float), (rows, cols)), shape=(m, n)
            )
            c = np.zeros(n)
            for j, v in self._objective.items():
                c[j] = v
            self._arrays = _Arrays(
                a=a,
                relations=np.asarray(self._relations, dtype=np.int8),
                rhs=np.asarray(self._rhs, dtype=float),
                c=c,
                lb=np.asarray(self._lb, dtype=float),
                ub=np.asarray(self._ub, dtype=float),
                binary=np.asarray([k == BINARY for k in self._kind], dtype=bool),
            )
        return self._arrays

    def write_lp(self, path: str | Path) -> None:
        """Export in LP text format for debugging against external solvers."""
        lines = ["Maximize" if self.sense == "max" else "Minimize"]
        terms = [
            f"{'+' if v >= 0 else '-'} {abs(v):.17g} {self._names[j]}"
            for j, v in sorted(self._objective.items())
        ]
        lines.append(" obj: " + (" ".join(terms) if terms else "0 " + (self._names[0] if self._names else "x0")))
        lines.append("Subject To")
        rel_txt = {0: "<=", 1: "=", 2: ">="}
        for r, (idx, val) in enumerate(self._rows):
            terms = [
                f"{'+' if v >= 0 else '-'} {abs(v):.17g} {self._names[j]}"
                for j, v in zip(idx.tolist(), val.tolist())
            ]
            lines.append(
                f" {self._row_names[r]}: " + " ".join(terms)
                + f" {rel_txt[self._relations[r]]} {self._rhs[r]:.17g}"
            )
        lines.append("Bounds")
        for j in range(self.n_variables):
            lo, hi = self._lb[j], self._ub[j]
            lo_txt = "-inf" if math.isinf(lo) else f"{lo:.17g}"
            hi_txt = "+inf" if math.isinf(hi) else f"{hi:.17g}"
            lines.append(f" {lo_txt} <= {self._names[j]} <= {hi_txt}")
        binaries = [self._names[j] for j in range(self.n_variables) if self._kind[j] == BINARY]
        if binaries:
            lines.append("Binary")
            lines.extend(f" {name}" for name in binaries)
        lines.append("End")
        Path(path).write_text("\n".join(lines) + "\n")


def new_model(sense: str = "min") -> MilpModel:
    return MilpModel(sense)


def check_solution(
    model: MilpModel,
    x: np.ndarray,
    feas_tol: float = 1e-6,
    int_tol: float = 1e-6,
) -> list[str]:
    """Independent feasibility re-check: evaluates every row, bound and
    integrality condition directly on `x`. Returns one message per
    violation; an empty list certifies feasibility at the tolerances."""
    arr = model.arrays()
    x = np.asarray(x, dtype=float)
    problems: list[str] = []
    if x.shape != (model.n_variables,):
        return [f"solution has shape {x.shape}, expected ({model.n_variables},)"]
    below = arr.lb - x
    above = x - arr.ub
    for j in np.nonzero(below > feas_tol)[0]:
        problems.append(f"var {j} below lower bound by {below[j]:.3e}")
    for j in np.nonzero(above > feas_tol)[0]:
        problems.append(f"var {j} above upper bound by {above[j]:.3e}")
    if model.n_constraints:
        lhs = arr.a @ x
        for r in range(model.n_constraints):
            resid = lhs[r] - arr.rhs[r]
            rel = arr.relations[r]
            if rel == 0 and resid > feas_tol:
                problems.append(f"row {r} (<=) violated by {resid:.3e}")
            elif rel == 1 and abs(resid) > feas_tol:
                problems.append(f"row {r} (=) violated by {abs(resid):.3e}")
            elif rel == 2 and resid < -feas_tol:
                problems.append(f"row {r} (>=) violated by {-resid:.3e}")
    frac = np.abs(x[arr.binary] - np.round(x[arr.binary]))
    for pos, j in enumerate(np.nonzero(arr.binary)[0]):
        if frac[pos] > int_tol:
            problems.append(f"binary var {j} fractional: {x[j]:.6f}")
    return problems

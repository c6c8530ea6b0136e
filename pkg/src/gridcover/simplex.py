"""Bounded-variable primal simplex over sparse instances.

Solves the LP relaxation of a MilpInstance (integrality dropped), with
optional per-solve bound tightenings supplied by branch-and-bound.  The
method is the two-phase revised simplex with variables allowed nonbasic at
either bound, Phase 1 via auxiliary artificials, largest-reduced-cost
pricing, and the Bland anti-cycling rule engaged after a run of
2*(rows+cols) degenerate pivots.  Basis factorizations use scipy's sparse
LU with product-form eta updates between refactorizations.

All tolerance constants live here: FEAS_TOL (constraint residual and Phase
1 acceptance), RC_TOL (reduced-cost optimality), BOUND_TOL (variable bound
verification), PIVOT_TOL (minimum pivot magnitude).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .milp import Assignment, MilpInstance

FEAS_TOL = 1e-7
RC_TOL = 1e-9
BOUND_TOL = 1e-9
PIVOT_TOL = 1e-8
REFACTOR_EVERY = 64
DEGEN_STEP = 1e-10
LOOKAHEAD = 10  # entering candidates inspected for a nondegenerate step

BASIC, AT_LO, AT_UP, FREE = 0, 1, 2, 3


class SimplexNumericalError(RuntimeError):
    """Numerical breakdown detected via residual re-verification."""


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    values: Optional[Assignment] = None
    objective: Optional[float] = None
    iterations: int = 0  # simplex pivots + bound flips, all phases


class LpData:
    """Arrays extracted once from a MilpInstance, reusable across solves."""

    def __init__(self, instance: MilpInstance):
        self.instance = instance
        n = instance.n_variables
        self.n = n
        self.lower = np.array([v.lower for v in instance.variables], dtype=float)
        self.upper = np.array([v.upper for v in instance.variables], dtype=float)
        self.is_binary = np.array(
            [v.kind == "binary" for v in instance.variables], dtype=bool
        )

        c = np.zeros(n)
        for vid, coef in instance.objective_terms.items():
            c[vid] = coef
        self.obj_sign = 1.0 if instance.objective_sense == "minimize" else -1.0
        self.c_min = self.obj_sign * c  # internal sense: minimize

        rows_i: List[int] = []
        cols_i: List[int] = []
        vals: List[float] = []
        senses: List[str] = []
        rhs: List[float] = []
        self.trivially_infeasible = False
        for con in instance.constraints:
            if not con.terms:
                ok = (
                    (con.sense == "<=" and 0.0 <= con.rhs + FEAS_TOL)
                    or (con.sense == ">=" and 0.0 >= con.rhs - FEAS_TOL)
                    or (con.sense == "=" and abs(con.rhs) <= FEAS_TOL)
                )
                if not ok:
                    self.trivially_infeasible = True
                continue  # empty rows carry no variables; drop
            r = len(senses)
            for vid, coef in con.terms:
                rows_i.append(r)
                cols_i.append(vid)
                vals.append(coef)
            senses.append(con.sense)
            rhs.append(con.rhs)

        m = len(senses)
        self.m = m
        self.b = np.array(rhs, dtype=float)
        self.senses = senses
        self.A = sp.csc_matrix(
            (vals, (rows_i, cols_i)), shape=(m, n), dtype=float
        )
        self.AT = self.A.T.tocsr()
        self.A_csr = self.A.tocsr()

        # slack bounds by sense: <= gives [0, inf), = gives [0, 0], >= gives (-inf, 0]
        self.slack_lo = np.array(
            [0.0 if s in ("<=", "=") else -math.inf for s in senses]
        )
        self.slack_up = np.array(
            [0.0 if s in ("=", ">=") else math.inf for s in senses]
        )


class _Basis:
    """LU factorization of the basis plus product-form eta updates."""

    def __init__(self, cols_getter, m: int):
        self._col = cols_getter  # j -> (indices, values)
        self.m = m
        self.lu = None
        self.etas: List[Tuple[int, np.ndarray]] = []

    def refactor(self, basis: np.ndarray) -> None:
        m = self.m
        idx_parts: List[np.ndarray] = []
        val_parts: List[np.ndarray] = []
        indptr = np.empty(m + 1, dtype=np.int64)
        indptr[0] = 0
        for t, j in enumerate(basis):
            idx, val = self._col(j)
            idx_parts.append(idx)
            val_parts.append(val)
            indptr[t + 1] = indptr[t] + len(idx)
        B = sp.csc_matrix(
            (np.concatenate(val_parts), np.concatenate(idx_parts), indptr),
            shape=(m, m),
        )
        try:
            self.lu = spla.splu(B)
        except RuntimeError as exc:  # singular basis
            raise SimplexNumericalError(f"singular basis: {exc}") from exc
        self.etas = []

    def ftran(self, rhs: np.ndarray) -> np.ndarray:
        z = self.lu.solve(rhs)
        for r, w in self.etas:
            zr = z[r] / w[r]
            z -= w * zr
            z[r] = zr
        return z

    def btran(self, rhs: np.ndarray) -> np.ndarray:
        v = rhs.copy()
        for r, w in reversed(self.etas):
            v[r] -= (w @ v - v[r]) / w[r]
        return self.lu.solve(v, trans="T")

    def push_eta(self, r: int, w: np.ndarray) -> None:
        self.etas.append((r, w.copy()))


class _Solver:
    """One solve over an LpData with optional extra bound tightenings."""

    def __init__(self, data: LpData, extra_bounds: Optional[Dict[int, Tuple[float, float]]]):
        self.data = data
        n, m = data.n, data.m
        self.n, self.m = n, m
        self.ncols = n + 2 * m  # structural | slacks | artificials

        lo = np.concatenate([data.lower, data.slack_lo, np.zeros(m)])
        up = np.concatenate([data.upper, data.slack_up, np.full(m, math.inf)])
        if extra_bounds:
            for vid, (xl, xu) in extra_bounds.items():
                lo[vid] = max(lo[vid], xl)
                up[vid] = min(up[vid], xu)
        self.lo, self.up = lo, up
        self.art_sign = np.ones(m)
        self.iterations = 0
        self.degenerate_steps = 0
        self._unit_idx = [np.array([r]) for r in range(m)]
        self._plus_one = np.array([1.0])
        self._minus_one = np.array([-1.0])

    def col(self, j: int) -> Tuple[np.ndarray, np.ndarray]:
        n, m, A = self.n, self.m, self.data.A
        if j < n:
            sl = slice(A.indptr[j], A.indptr[j + 1])
            return A.indices[sl], A.data[sl]
        if j < n + m:
            return self._unit_idx[j - n], self._plus_one
        r = j - n - m
        return self._unit_idx[r], (self._plus_one if self.art_sign[r] > 0 else self._minus_one)

    def col_dense(self, j: int) -> np.ndarray:
        v = np.zeros(self.m)
        idx, val = self.col(j)
        v[idx] = val
        return v

    # -- setup --------------------------------------------------------------

    def start(self) -> Optional[LpResult]:
        """Initial point: structurals nonbasic at a bound; each row's slack
        is basic when it can absorb the residual by itself, otherwise an
        artificial takes its place.  Returns an LpResult to short-circuit
        on trivial outcomes, else None."""
        if np.any(self.lo > self.up + BOUND_TOL):
            return LpResult(status="infeasible")
        if self.data.trivially_infeasible:
            return LpResult(status="infeasible")
        if self.m == 0:
            return self._solve_unconstrained()

        n, m = self.n, self.m
        self.status = np.full(self.ncols, AT_LO, dtype=np.int8)
        self.val = np.zeros(self.ncols)
        for j in range(n + m):
            if np.isfinite(self.lo[j]):
                self.status[j], self.val[j] = AT_LO, self.lo[j]
            elif np.isfinite(self.up[j]):
                self.status[j], self.val[j] = AT_UP, self.up[j]
            else:
                self.status[j], self.val[j] = FREE, 0.0

        r = self.data.b - self.data.A @ self.val[:n] - self.val[n : n + m]
        self.art_sign = np.where(r >= 0, 1.0, -1.0)
        slack_ok = (r >= self.lo[n : n + m] - 1e-12) & (r <= self.up[n : n + m] + 1e-12)
        crash = self._crash_columns(r, slack_ok)
        basis = np.where(
            slack_ok, np.arange(n, n + m), np.arange(n + m, n + 2 * m)
        )
        xb = np.where(slack_ok, r, np.abs(r))
        for row, (j, value) in crash.items():
            self.val[basis[row]] = 0.0  # displaced slack rests at zero
            self.status[basis[row]] = AT_LO if np.isfinite(self.lo[basis[row]]) else AT_UP
            basis[row] = j
            xb[row] = value
        self.basis = basis
        self.status[self.basis] = BASIC
        self.val[self.basis] = self.xb = xb
        # artificials not seated in the basis stay pinned at zero
        art_cols = np.arange(n + m, n + 2 * m)
        unused = np.ones(m, dtype=bool)
        unused[self.basis[self.basis >= n + m] - n - m] = False
        self.lo[art_cols[unused]] = 0.0
        self.up[art_cols[unused]] = 0.0
        self.fact = _Basis(self.col, m)
        self.fact.refactor(self.basis)
        return None

    def _crash_columns(self, r: np.ndarray, slack_ok: np.ndarray):
        """Seat structural columns in rows whose slack is fixed (equality
        rows): a column is eligible when its other nonzeros touch only rows
        with free slacks, so the seated set is permutable to triangular and
        the implied starting value (residual over coefficient) can be
        checked against the column's own bounds.  Cuts the starting count
        of degenerate fixed-slack basics dramatically."""
        n, m, data = self.n, self.m, self.data
        lo_s, up_s = self.lo[n : n + m], self.up[n : n + m]
        fixed_row = lo_s == up_s
        if not fixed_row.any():
            return {}
        A_csr = data.A_csr
        # a column is crash-eligible iff all its fixed-row entries are in one row
        fixed_hits = np.zeros(n, dtype=np.int32)
        for row in np.flatnonzero(fixed_row):
            sl = slice(A_csr.indptr[row], A_csr.indptr[row + 1])
            fixed_hits[A_csr.indices[sl]] += 1
        chosen: Dict[int, Tuple[int, float]] = {}
        used = set()
        for row in np.flatnonzero(fixed_row):
            if abs(r[row]) > 1e-12:
                continue  # only already-satisfied rows can be seated value-neutrally
            sl = slice(A_csr.indptr[row], A_csr.indptr[row + 1])
            cols = A_csr.indices[sl]
            coefs = A_csr.data[sl]
            best = None
            for j, a in zip(cols, coefs):
                if fixed_hits[j] != 1 or j in used or abs(a) < 0.01:
                    continue
                if self.lo[j] >= self.up[j]:  # fixed variables cannot pivot later
                    continue
                key = (-abs(a), j)
                if best is None or key < best[0]:
                    best = (key, int(j))
            if best is not None:
                # seating at the current nonbasic value leaves every residual
                # unchanged, so the start stays feasible
                used.add(best[1])
                chosen[int(row)] = (best[1], float(self.val[best[1]]))
        return chosen

    def _solve_unconstrained(self) -> LpResult:
        values = np.zeros(self.n)
        c = self.data.c_min
        lo, up = self.lo, self.up
        for j in range(self.n):
            if c[j] > 0:
                if not np.isfinite(lo[j]):
                    return LpResult(status="unbounded")
                values[j] = lo[j]
            elif c[j] < 0:
                if not np.isfinite(up[j]):
                    return LpResult(status="unbounded")
                values[j] = up[j]
            else:
                values[j] = (
                    lo[j]
                    if np.isfinite(lo[j])
                    else (up[j] if np.isfinite(up[j]) else 0.0)
                )
        obj = float(self.data.c_min @ values) * self.data.obj_sign
        return LpResult(
            status="optimal",
            values={i: float(values[i]) for i in range(self.n)},
            objective=obj,
        )

    # -- core loop ------------------------------------------------------------

    def _ratio_test(self, q: int, d_q: float):
        """Step data for entering column q: (direction, w, t, t_own, limits)."""
        lo, up, stat = self.lo, self.up, self.status
        direction = 1.0 if (stat[q] == AT_LO or (stat[q] == FREE and d_q < 0)) else -1.0
        w = self.fact.ftran(self.col_dense(q))
        delta = direction * w
        lo_b, up_b = lo[self.basis], up[self.basis]
        t_own = up[q] - lo[q] if np.isfinite(up[q]) and np.isfinite(lo[q]) else math.inf
        limits = np.full(self.m, math.inf)
        dec = (delta > PIVOT_TOL) & np.isfinite(lo_b)  # basic heads to its lower bound
        inc = (delta < -PIVOT_TOL) & np.isfinite(up_b)  # basic heads to its upper bound
        limits[dec] = (self.xb[dec] - lo_b[dec]) / delta[dec]
        limits[inc] = (self.xb[inc] - up_b[inc]) / delta[inc]
        np.maximum(limits, 0.0, out=limits)  # degeneracy can push slightly negative
        t_rows = float(limits.min()) if self.m else math.inf
        return direction, w, min(t_own, t_rows), t_own, t_rows, limits

    def _pivot_row(self, r: int) -> np.ndarray:
        """Row r of the full tableau B^{-1}[A | I | sign] (for Devex)."""
        n, m = self.n, self.m
        e = np.zeros(m)
        e[r] = 1.0
        v = self.fact.btran(e)
        alpha = np.empty(self.ncols)
        alpha[:n] = self.data.AT @ v
        alpha[n : n + m] = v
        alpha[n + m :] = self.art_sign * v
        return alpha

    def run_phase(self, c_all: np.ndarray) -> str:
        """Minimize c_all over the current basis state. Returns "optimal"
        (no improving direction) or "unbounded".

        Pricing is Devex (reference-weighted reduced costs), which keeps
        iteration counts near-linear in the row count on the heavily
        degenerate covering LPs this package produces; the Bland rule still
        takes over after a long run of degenerate steps to guarantee
        termination.
        """
        n, m = self.n, self.m
        bland = False
        degen_run = 0
        bland_trigger = 2 * (m + self.ncols)
        max_iters = 50000 + 20 * (m + self.ncols)
        since_refactor = 0
        gamma = np.ones(self.ncols)  # Devex reference weights
        d = None  # reduced costs, updated incrementally between refactors

        for _ in range(max_iters):
            if since_refactor >= REFACTOR_EVERY:
                self._refresh()
                since_refactor = 0
                d = None

            d_fresh = d is None
            if d is None:
                y = self.fact.btran(c_all[self.basis])
                d = c_all.copy()
                d[:n] -= self.data.AT @ y
                d[n : n + m] -= y
                d[n + m :] -= self.art_sign * y

            stat, lo, up = self.status, self.lo, self.up
            movable = lo < up  # fixed variables never enter
            elig_lo = (stat == AT_LO) & (d < -RC_TOL) & movable
            elig_up = (stat == AT_UP) & (d > RC_TOL) & movable
            elig_fr = (stat == FREE) & (np.abs(d) > RC_TOL)
            elig = elig_lo | elig_up | elig_fr
            if not np.any(elig):
                if d_fresh:
                    return "optimal"
                d = None  # confirm optimality against freshly computed costs
                continue

            if bland:
                q = int(np.flatnonzero(elig)[0])
            else:
                score = np.where(elig, d * d / gamma, -1.0)
                q = int(np.argmax(score))
            direction, w, t, t_own, t_rows, limits = self._ratio_test(q, d[q])

            if not np.isfinite(t):
                return "unbounded"

            self.iterations += 1
            if t <= DEGEN_STEP:
                degen_run += 1
                self.degenerate_steps += 1
                if degen_run >= bland_trigger:
                    bland = True
            else:
                degen_run = 0
                bland = False

            delta = direction * w
            if t_own <= t_rows:
                # bound-to-bound flip, basis unchanged
                self.xb -= delta * t_own
                self.val[q] = up[q] if direction > 0 else lo[q]
                self.status[q] = AT_UP if direction > 0 else AT_LO
            else:
                cand = np.flatnonzero(limits <= t + 1e-9 * (1.0 + t))
                # prefer evicting a bound-fixed basic (it can never re-enter,
                # so even a zero-length pivot makes permanent progress), then
                # the largest pivot magnitude for stability
                fixed_leave = lo[self.basis[cand]] >= up[self.basis[cand]]
                r = int(cand[np.lexsort((cand, -np.abs(w[cand]), ~fixed_leave))[0]])
                leaving = self.basis[r]
                self.xb -= delta * t
                leave_to_lower = delta[r] > 0
                self.status[leaving] = AT_LO if leave_to_lower else AT_UP
                self.val[leaving] = lo[leaving] if leave_to_lower else up[leaving]
                self.val[q] = self.val[q] + direction * t
                self.xb[r] = self.val[q]

                # the pivot row drives both the Devex weights and an
                # incremental reduced-cost update (exact recompute happens at
                # every refactorization)
                alpha = self._pivot_row(r)
                aq = alpha[q]
                if abs(aq) > PIVOT_TOL:
                    d_q = d[q]
                    d -= (d_q / aq) * alpha
                    d[q] = 0.0
                    ratio = alpha / aq
                    np.maximum(gamma, ratio * ratio * gamma[q], out=gamma)
                    gamma[leaving] = max(gamma[q] / (aq * aq), 1.0)
                    if gamma.max() > 1e8:
                        gamma[:] = 1.0
                else:
                    d = None  # pivot too small for a safe update

                self.basis[r] = q
                self.status[q] = BASIC
                self.fact.push_eta(r, w)
                since_refactor += 1

        raise SimplexNumericalError("simplex iteration limit exceeded")

    def _refresh(self) -> None:
        """Refactorize and recompute basic values from scratch."""
        n, m = self.n, self.m
        self.fact.refactor(self.basis)
        nb_val = self.val.copy()
        nb_val[self.basis] = 0.0
        rhs = self.data.b - self.data.A @ nb_val[:n] - nb_val[n : n + m]
        rhs -= self.art_sign * nb_val[n + m :]
        self.xb = self.fact.ftran(rhs)
        self.val[self.basis] = self.xb

    # -- drive ------------------------------------------------------------

    def solve(self) -> LpResult:
        short = self.start()
        if short is not None:
            return short
        n, m = self.n, self.m

        # deterministic per-column cost jitter breaks the pricing ties that
        # symmetric covering structures produce in droves; phases run on the
        # jittered costs and a final phase with exact costs settles the
        # true optimum from the (near-optimal) basis
        jitter = np.modf(np.arange(self.ncols) * 0.6180339887498949)[0]
        c1 = np.zeros(self.ncols)
        c1[n + m :] = 1.0 + 1e-3 * jitter[n + m :]
        outcome = self.run_phase(c1)
        if outcome == "unbounded":
            raise SimplexNumericalError("phase 1 reported unbounded")
        self._refresh()
        art_sum = float(self.val[n + m :].sum())
        if art_sum > FEAS_TOL * (1.0 + math.sqrt(m)):
            return LpResult(status="infeasible", iterations=self.iterations)

        # pin artificials to zero for phase 2
        self.lo[n + m :] = 0.0
        self.up[n + m :] = 0.0
        np.clip(self.val[n + m :], 0.0, 0.0, out=self.val[n + m :])
        self.xb = self.val[self.basis]

        c2 = np.zeros(self.ncols)
        c2[:n] = self.data.c_min
        c2_jittered = c2 * (1.0 + 1e-6 * jitter)
        outcome = self.run_phase(c2_jittered)
        if outcome == "unbounded":
            return LpResult(status="unbounded", iterations=self.iterations)

        # exact costs from the jitter-optimal basis: usually a few pivots
        outcome = self.run_phase(c2)
        if outcome == "unbounded":
            return LpResult(status="unbounded", iterations=self.iterations)

        self._refresh()
        return self._finish()

    def _finish(self) -> LpResult:
        n = self.n
        x = np.clip(self.val[:n], self.lo[:n], self.up[:n])
        if not self._verify(x):
            self._refresh()
            x = np.clip(self.val[:n], self.lo[:n], self.up[:n])
            if not self._verify(x):
                raise SimplexNumericalError("optimal point failed residual re-verification")
        obj = float(self.data.c_min @ x) * self.data.obj_sign
        return LpResult(
            status="optimal",
            values={i: float(x[i]) for i in range(n)},
            objective=obj,
            iterations=self.iterations,
        )

    def _verify(self, x: np.ndarray) -> bool:
        """Independent substitution check of the candidate optimum."""
        data = self.data
        if np.any(x < self.lo[: self.n] - BOUND_TOL) or np.any(x > self.up[: self.n] + BOUND_TOL):
            return False
        if data.m == 0:
            return True
        lhs = data.A @ x
        for r, s in enumerate(data.senses):
            resid = lhs[r] - data.b[r]
            if s == "<=" and resid > FEAS_TOL:
                return False
            if s == ">=" and resid < -FEAS_TOL:
                return False
            if s == "=" and abs(resid) > FEAS_TOL:
                return False
        return True


def solve_lp(
    instance_or_data,
    extra_bounds: Optional[Dict[int, Tuple[float, float]]] = None,
) -> LpResult:
    """Solve the LP relaxation (integrality dropped) of an instance.

    `extra_bounds` maps variable ids to (lower, upper) tightenings; they
    may only tighten the declared bounds, which is how branch-and-bound
    fixes binaries.  Accepts a MilpInstance or a prebuilt LpData (the
    latter avoids re-extracting arrays across repeated solves).
    """
    data = instance_or_data if isinstance(instance_or_data, LpData) else LpData(instance_or_data)
    return _Solver(data, extra_bounds).solve()

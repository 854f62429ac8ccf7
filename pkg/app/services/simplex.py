"""Exact rational simplex (two phases, Bland's rule) for max c.x, A x = b, x >= 0."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from app.errors import InternalError

logger = logging.getLogger(__name__)

ROUNDING_DENOMINATOR = 10**6


@dataclass
class LinearProgramResult:
    status: str
    value: Optional[Fraction] = None
    x: Optional[list[Fraction]] = None
    basis: Optional[list[int]] = None
    method: str = "exact-simplex"


class ExactSimplex:
    def __init__(self, rows: Sequence[Sequence], rhs: Sequence, cost: Sequence):
        self.A = [[Fraction(v) for v in row] for row in rows]
        self.b = [Fraction(v) for v in rhs]
        self.c = [Fraction(v) for v in cost]
        self.n = len(self.c)
        if any(len(row) != self.n for row in self.A) or len(self.A) != len(self.b):
            raise InternalError("inconsistent LP shapes")
        self.pivots = 0

    # ---------------------------------
    # tableau primitives
    # ---------------------------------
    def _pivot(self, T, rhs, reduced, basis, row, col):
        piv = T[row][col]
        pivot_row = T[row]
        for j, v in enumerate(pivot_row):
            if v:
                pivot_row[j] = v / piv
        rhs[row] /= piv
        nonzero = [(j, v) for j, v in enumerate(pivot_row) if v]
        for i, line in enumerate(T):
            if i == row:
                continue
            f = line[col]
            if f:
                for j, v in nonzero:
                    line[j] -= f * v
                rhs[i] -= f * rhs[row]
        f = reduced[col]
        if f:
            for j, v in nonzero:
                reduced[j] -= f * v
            reduced[-1] -= f * rhs[row]
        basis[row] = col
        self.pivots += 1

    def _bland(self, T, rhs, reduced, basis, columns: int) -> str:
        while True:
            basic = set(basis)
            entering = next((j for j in range(columns) if j not in basic and reduced[j] > 0), None)
            if entering is None:
                return "optimal"
            leaving, best = None, None
            for i, line in enumerate(T):
                a = line[entering]
                if a > 0:
                    ratio = rhs[i] / a
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                        leaving, best = i, ratio
            if leaving is None:
                return "unbounded"
            self._pivot(T, rhs, reduced, basis, leaving, entering)

    @staticmethod
    def _reduced_costs(T, rhs, basis, cost):
        reduced = list(cost) + [Fraction(0)]
        for i, line in enumerate(T):
            cb = cost[basis[i]]
            if cb:
                for j, v in enumerate(line):
                    if v:
                        reduced[j] -= cb * v
                reduced[-1] -= cb * rhs[i]
        return reduced

    # ---------------------------------
    # solve
    # ---------------------------------
    def solve(self) -> LinearProgramResult:
        m, n = len(self.A), self.n
        T = []
        rhs = []
        for row, b in zip(self.A, self.b):
            sign = -1 if b < 0 else 1
            T.append([sign * v for v in row] + [Fraction(0)] * m)
            rhs.append(sign * b)
        for i in range(m):
            T[i][n + i] = Fraction(1)
        basis = [n + i for i in range(m)]

        # phase 1: maximize -sum(artificials)
        phase1_cost = [Fraction(0)] * n + [Fraction(-1)] * m
        reduced = self._reduced_costs(T, rhs, basis, phase1_cost)
        self._bland(T, rhs, reduced, basis, n + m)
        infeasibility = sum((rhs[i] for i in range(m) if basis[i] >= n), Fraction(0))
        if infeasibility > 0:
            return LinearProgramResult(status="infeasible")

        # drive zero-level artificials out, dropping redundant rows
        row = 0
        while row < len(T):
            if basis[row] >= n:
                col = next((j for j in range(n) if T[row][j] != 0), None)
                if col is None:
                    del T[row], rhs[row], basis[row]
                    continue
                self._pivot(T, rhs, [Fraction(0)] * (n + m + 1), basis, row, col)
            row += 1
        for line in T:
            del line[n:]

        reduced = self._reduced_costs(T, rhs, basis, self.c)
        status = self._bland(T, rhs, reduced, basis, n)
        if status != "optimal":
            return LinearProgramResult(status=status)
        x = [Fraction(0)] * n
        for i, col in enumerate(basis):
            x[col] = rhs[i]
        value = sum((c * v for c, v in zip(self.c, x) if c), Fraction(0))
        logger.info("exact simplex finished after %d pivots, value %s", self.pivots, value)
        return LinearProgramResult(status="optimal", value=value, x=x, basis=list(basis))


# ============================================================
# FLOATING PRESOLVE WITH EXACT CERTIFICATE
# ============================================================

def _rational(values) -> list[Fraction]:
    return [Fraction(float(v)).limit_denominator(ROUNDING_DENOMINATOR) for v in values]


def certify(rows, rhs, cost, x, y) -> bool:
    """Exact optimality certificate: primal feasible, dual feasible, equal objectives."""
    if any(v < 0 for v in x):
        return False
    for row, b in zip(rows, rhs):
        if sum((a * v for a, v in zip(row, x) if a), Fraction(0)) != b:
            return False
    for j, c in enumerate(cost):
        if sum((row[j] * yi for row, yi in zip(rows, y) if row[j]), Fraction(0)) < c:
            return False
    primal = sum((c * v for c, v in zip(cost, x) if c), Fraction(0))
    dual = sum((b * yi for b, yi in zip(rhs, y) if b), Fraction(0))
    return primal == dual


def floating_presolve(rows, rhs, cost) -> Optional[LinearProgramResult]:
    """HiGHS solve rounded to rationals; returned only if the exact certificate holds."""
    A = np.array([[float(v) for v in row] for row in rows])
    b = np.array([float(v) for v in rhs])
    c = np.array([float(v) for v in cost])
    result = linprog(-c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if result.status != 0 or result.eqlin is None:
        logger.info("floating presolve failed: %s", result.message)
        return None
    x = _rational(result.x)
    marginals = _rational(result.eqlin.marginals)
    for y in ([-v for v in marginals], marginals):
        if certify(rows, rhs, cost, x, y):
            value = sum((Fraction(cj) * v for cj, v in zip(cost, x) if cj), Fraction(0))
            return LinearProgramResult(status="optimal", value=value, x=x, method="highs+certificate")
    logger.info("floating presolve rounding did not certify; falling back to exact simplex")
    return None


def maximize(rows, rhs, cost, warm_start: bool = True) -> LinearProgramResult:
    rows = [[Fraction(v) for v in row] for row in rows]
    rhs = [Fraction(v) for v in rhs]
    cost = [Fraction(v) for v in cost]
    if warm_start:
        result = floating_presolve(rows, rhs, cost)
        if result is not None:
            return result
    return ExactSimplex(rows, rhs, cost).solve()

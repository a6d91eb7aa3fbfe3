"""Exact rational linear-program feasibility (phase-1 simplex).

Solves ``A x = b, x >= 0`` over Fractions.  Used to decide convex-hull
membership of distributions: a distribution lies in the hull of a finite
family iff the mixing weights form a feasible point of such a system.

Infeasibility comes with a separating certificate ``y`` satisfying
``y . A_j <= 0`` for every column ``j`` and ``y . b > 0``.  By LP duality
this is exactly a hyperplane separating ``b`` from the cone/hull described
by the columns, and it is what the falsifying expectation functions in
``ndset.subset_p`` are built from.

Pivoting uses Bland's rule, which cannot cycle, and all arithmetic is
exact, so termination and decisions are guaranteed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional


@dataclass
class FeasibilityResult:
    feasible: bool
    solution: Optional[list]  # x with A x = b, x >= 0
    certificate: Optional[list]  # y with y.A <= 0, y.b > 0


def solve_equality_feasibility(A: list, b: list) -> FeasibilityResult:
    """Decide whether ``A x = b`` has a solution with ``x >= 0``.

    ``A`` is a list of m rows, each a list of n Fractions; ``b`` has m
    Fractions.  Returns a feasible point or a separating certificate.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    rows = [[Fraction(x) for x in row] for row in A]
    rhs = [Fraction(x) for x in b]
    sign = [Fraction(1)] * m
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]
            sign[i] = Fraction(-1)

    if m == 0:
        return FeasibilityResult(True, [Fraction(0)] * n, None)

    # Tableau columns: n structural + m artificial + rhs.
    width = n + m
    tab = []
    for i in range(m):
        row = rows[i] + [Fraction(0)] * m + [rhs[i]]
        row[n + i] = Fraction(1)
        tab.append(row)
    basis = [n + i for i in range(m)]

    # Phase-1 objective: minimize the sum of artificials.  The reduced-cost
    # row starts as -(sum of constraint rows) on structural columns, with
    # objective value -(sum of rhs); entry j holds c_j - y.A_j.
    obj = [Fraction(0)] * (width + 1)
    for j in range(width + 1):
        s = Fraction(0)
        for i in range(m):
            s += tab[i][j]
        obj[j] = (Fraction(1) if n <= j < width else Fraction(0)) - s
    # Artificial columns start basic, reduced cost 0.
    for i in range(m):
        obj[n + i] = Fraction(0)

    while True:
        enter = -1
        for j in range(width):  # Bland: smallest eligible index
            if obj[j] < 0:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][width] / tab[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            raise ArithmeticError("phase-1 objective unbounded; malformed tableau")
        pivot(tab, obj, leave, enter, width)
        basis[leave] = enter

    value = -obj[width]  # current objective value (sum of artificials)
    if value == 0:
        x = [Fraction(0)] * n
        for i in range(m):
            if basis[i] < n:
                x[basis[i]] = tab[i][width]
        return FeasibilityResult(True, x, None)

    # Infeasible: dual prices from reduced costs of the artificial columns,
    # mapped back through the row sign flips.
    y = []
    for i in range(m):
        yi = Fraction(1) - obj[n + i]
        y.append(sign[i] * yi)
    # Exactness self-check: the certificate must actually separate.
    ydotb = sum(y[i] * Fraction(b[i]) for i in range(m))
    if ydotb <= 0:
        raise ArithmeticError("separating certificate failed y.b > 0")
    for j in range(n):
        col = sum(y[i] * Fraction(A[i][j]) for i in range(m))
        if col > 0:
            raise ArithmeticError("separating certificate failed y.A <= 0")
    return FeasibilityResult(False, None, y)


def pivot(tab: list, obj: list, leave: int, enter: int, width: int) -> None:
    piv = tab[leave][enter]
    tab[leave] = [x / piv for x in tab[leave]]
    for i in range(len(tab)):
        if i != leave and tab[i][enter] != 0:
            c = tab[i][enter]
            tab[i] = [tab[i][j] - c * tab[leave][j] for j in range(width + 1)]
    if obj[enter] != 0:
        c = obj[enter]
        for j in range(width + 1):
            obj[j] -= c * tab[leave][j]


def convex_hull_membership(point: list, generators: list) -> FeasibilityResult:
    """Is ``point`` a convex combination of ``generators``?

    All arguments are coordinate vectors (lists of Fractions) of equal
    length.  On success the solution gives the mixing weights; on failure
    the certificate's first ``dim`` coordinates give a linear function
    strictly larger on ``point`` than on every generator.
    """
    dim = len(point)
    rows = []
    rhs = []
    for d in range(dim):
        rows.append([g[d] for g in generators])
        rhs.append(point[d])
    rows.append([Fraction(1)] * len(generators))
    rhs.append(Fraction(1))
    return solve_equality_feasibility(rows, rhs)

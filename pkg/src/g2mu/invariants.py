"""Closed-form mu_3 / mu_4 invariants of a flat G2 orbifold.

Both invariants are group averages of degree <= 3 trace polynomials of the
matrix parts, evaluated in integer arithmetic:

    tr8(A)  = (Tr(A)^2 - Tr(A^2))/2 - 2 Tr(A) + 1
    tr12(A) = (Tr(A)^3 + 2 Tr(A^3) - 3 Tr(A^2) Tr(A))/6
              - (Tr(A)^2 - Tr(A^2))/2 - 2

    mu_3 = -(1/|G|) sum tr8(A),   mu_4 = -(1/|G|) sum tr12(A).

tr8(A) and tr12(A) are the traces of A acting on the 8- and 12-dimensional
pieces of Lambda^2_14 and Lambda^3_27 cut out by a fixed unit direction;
see the spectral oracle module for the direct verification of that fact.
"""

from dataclasses import dataclass
from fractions import Fraction


def _traces(A):
    mat = [[int(x) for x in row] for row in A]
    n = len(mat)

    def mul(X, Y):
        return [[sum(X[i][k] * Y[k][j] for k in range(n)) for j in range(n)]
                for i in range(n)]

    A2 = mul(mat, mat)
    A3 = mul(A2, mat)
    tr = sum(mat[i][i] for i in range(n))
    tr2 = sum(A2[i][i] for i in range(n))
    tr3 = sum(A3[i][i] for i in range(n))
    return tr, tr2, tr3


def tr8_su3(A):
    """Trace polynomial (Tr^2 - Tr(A^2))/2 - 2 Tr + 1; exact Fraction."""
    tr, tr2, _ = _traces(A)
    return Fraction(tr * tr - tr2, 2) - 2 * tr + 1


def tr12_su3(A):
    """Trace polynomial of degree 3; exact Fraction."""
    tr, tr2, tr3 = _traces(A)
    return Fraction(tr ** 3 + 2 * tr3 - 3 * tr2 * tr, 6) - Fraction(tr * tr - tr2, 2) - 2


@dataclass(frozen=True)
class InvariantPair:
    mu3: Fraction
    mu4: Fraction


def mu_invariants(orbifold):
    """Exact mu_3 and mu_4 of a validated orbifold (matrix parts only)."""
    group = orbifold.group
    n = len(group)
    s8 = sum(tr8_su3(e.matrix) for e in group)
    s12 = sum(tr12_su3(e.matrix) for e in group)
    return InvariantPair(mu3=Fraction(-s8, n), mu4=Fraction(-s12, n))

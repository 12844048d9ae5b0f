"""Twisted Epstein zeta functions and the regularisation constant at s = 0.

For a rank-r lattice with positive-definite Gram matrix Q and a rational
twist covector w, the series

    Z(s) = sum_{x in Z^r, x != 0} e^{2 pi i <w, x>} / Q(x)^s

converges for Re(s) > r/2.  Splitting the Mellin integral of the twisted
theta function at 1 and applying the theta transformation to the lower
piece gives the meromorphic continuation

    pi^-s Gamma(s) Z(s) =
        - 1/s  -  [w integral] * det(Q)^(-1/2) / (s - r/2)
        + sum_{x != 0}   e(q(x)) (pi Q(x))^-s      Gamma(s, pi Q(x))
        + det(Q)^(-1/2) sum_{m + w != 0} (pi Q*(m+w))^(s - r/2) Gamma(r/2 - s, pi Q*(m+w)),

where Q* is the dual form (inverse Gram) and both sums converge like
exp(-pi Q).  Dividing by Gamma(s) (a zero at s = 0) leaves the boundary
term -1/s as the only contribution at s = 0, so the continued value there
is -1 for every rank and every twist; the sums are what make the formula
correct away from 0, and they are cross-checked against direct summation
and classical closed forms in the test suite.
"""

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import linalg
from .exterior import DIM
from .invariants import InvariantPair, tr8_su3, tr12_su3


class PoleEncountered(ValueError):
    """Evaluation requested at the pole s = rank/2 of an untwisted lattice."""


@dataclass(frozen=True)
class TwistedLattice:
    """A sublattice of Z^7 with induced Gram matrix and rational phase twist."""
    rank: int
    basis: tuple          # rank integer vectors in Z^7 (rows)
    gram: object          # rank x rank Fraction matrix (numpy object array)
    twist: tuple          # rank rational exponents; phase of x is e(sum w_i x_i)

    def quadratic_form(self, x):
        v = linalg.frac_vector(x)
        return v @ self.gram @ v

    def twist_exponent(self, x):
        return sum(w * xi for w, xi in zip(self.twist, x)) % 1

    def is_twist_trivial(self):
        return all(w == 0 for w in self.twist)

    def rebase(self, unimodular):
        """Same lattice described in a new basis: B' = U^T applied to coords."""
        U = linalg.frac_matrix(unimodular)
        if abs(linalg.det(U)) != 1:
            raise ValueError("change of basis must be unimodular")
        B = linalg.frac_matrix(self.basis)
        newB = U.T @ B
        gram = U.T @ self.gram @ U
        twist = tuple((linalg.frac_vector(self.twist) @ U)[i] % 1 for i in range(self.rank))
        return TwistedLattice(
            rank=self.rank,
            basis=tuple(tuple(int(x) for x in row) for row in newB),
            gram=gram,
            twist=twist,
        )


def fixed_lattice(element, metric):
    """The fixed lattice {l in Z^7 : A l = l} of a group element, with twist.

    The basis comes from an exact integer-kernel computation; the Gram
    matrix is the restriction of the torus metric and the twist exponents
    are q(x) = g(basis x, t) mod 1.  A zero-rank kernel means the element
    cannot belong to a finite orientation-preserving isometry group and is
    rejected.
    """
    A = element.matrix
    m = [[A[i][j] - (1 if i == j else 0) for j in range(DIM)] for i in range(DIM)]
    kernel = linalg.integer_kernel(m)
    if not kernel:
        raise ValueError("fixed lattice is zero; element is not a valid input")
    B = linalg.frac_matrix(kernel)  # rows are basis vectors
    G = metric.gram
    gram = B @ G @ B.T
    t = linalg.frac_vector(element.translation)
    twist = tuple((B @ G @ t)[i] % 1 for i in range(len(kernel)))
    return TwistedLattice(rank=len(kernel), basis=tuple(kernel), gram=gram, twist=twist)


_SHELL_CACHE = {}


def _phase_of(expo):
    expo = expo % 1
    if expo == 0:
        return 1.0 + 0j
    if expo == Fraction(1, 2):
        return -1.0 + 0j
    return complex(np.exp(2j * np.pi * float(expo)))


def _gram_key(gram):
    return tuple(tuple(linalg.frac(x) for x in row) for row in gram)


def _is_diagonal(gram):
    n = gram.shape[0]
    return all(gram[i, j] == 0 for i in range(n) for j in range(n) if i != j)


def _shell_sums(gram, bound, twist=None, shift=None, exclude_origin=True):
    """Group lattice points by exact Q-value; returns {Q: complex phase sum}.

    With `shift` = w the points are x + w for integer x (used for the dual
    sum, where no phases appear); with `twist` the phases e(q(x)) are
    attached.  Q-values are exact Fractions.  Diagonal Gram matrices take a
    separable coordinate-by-coordinate convolution; the general case falls
    back to ellipsoid enumeration.  Results are cached.
    """
    r = gram.shape[0]
    twist = tuple(linalg.frac(x) % 1 for x in twist) if twist is not None else None
    w = tuple(linalg.frac(x) % 1 for x in shift) if shift is not None else None
    key = (_gram_key(gram), linalg.frac(bound), twist, w, exclude_origin)
    if key in _SHELL_CACHE:
        return _SHELL_CACHE[key]
    if _is_diagonal(gram):
        shells = _shell_sums_diagonal(gram, bound, twist, w)
    else:
        shells = {}
        pts = linalg.enumerate_ellipsoid(gram, bound, shift=w)
        wv = w if w is not None else (Fraction(0),) * r
        for x in pts:
            v = linalg.frac_vector([xi + wi for xi, wi in zip(x, wv)])
            q_val = v @ gram @ v
            if twist is not None:
                phase = _phase_of(sum(t * xi for t, xi in zip(twist, x)))
            else:
                phase = 1.0 + 0j
            shells[q_val] = shells.get(q_val, 0j) + phase
    if exclude_origin:
        shells.pop(Fraction(0), None)
    _SHELL_CACHE[key] = shells
    return shells


def _shell_sums_diagonal(gram, bound, twist, shift):
    """Separable shell sums for diagonal Gram matrices.

    Convolves per-coordinate dictionaries {d_i (x+w_i)^2 : phase sum},
    pruning values above the bound; exact Fraction keys throughout.
    """
    r = gram.shape[0]
    bound = linalg.frac(bound)
    shells = {Fraction(0): 1.0 + 0j}
    for i in range(r):
        d = linalg.frac(gram[i, i])
        wi = shift[i] if shift is not None else Fraction(0)
        ti = twist[i] if twist is not None else Fraction(0)
        coord = {}
        x = 0
        while True:
            hit = False
            for xv in ((x,) if x == 0 else (x, -x)):
                q = d * (xv + wi) ** 2
                if q <= bound:
                    hit = True
                    coord[q] = coord.get(q, 0j) + _phase_of(ti * xv)
            if not hit and d * x * x > bound:
                break
            x += 1
        new = {}
        for q1, p1 in shells.items():
            for q2, p2 in coord.items():
                q = q1 + q2
                if q <= bound:
                    new[q] = new.get(q, 0j) + p1 * p2
        shells = new
    return shells


def _cutoff(s, rank):
    # terms decay like exp(-pi Q) with an algebraic prefactor; pi*16 ~ 1e-18
    sigma = abs(complex(s).real) + abs(complex(s).imag)
    return Fraction(max(16, int(np.ceil(2 * sigma + 8))))


def epstein_value(lat, s, dps=30):
    """Analytic continuation of the twisted Epstein zeta function at s.

    Valid at every complex s except the pole s = rank/2 of the untwisted
    case.  In the convergence region it agrees with the direct series;
    everywhere it is computed from two exponentially convergent
    incomplete-gamma sums plus explicit boundary terms.
    """
    s = complex(s)
    r = lat.rank
    trivial = lat.is_twist_trivial()
    if trivial and abs(s - r / 2) < 1e-12:
        raise PoleEncountered(f"s = rank/2 = {r/2} is a pole of the untwisted zeta")
    with mpmath.workdps(dps):
        ms = mpmath.mpc(s)
        det = linalg.det(lat.gram)
        det_root = mpmath.sqrt(mpmath.mpf(det.numerator) / det.denominator)
        inv_gram = linalg.inverse(lat.gram)

        cut = _cutoff(s, r)
        primal = _shell_sums(lat.gram, cut, twist=lat.twist)
        s1 = mpmath.mpc(0)
        for q_val, phases in sorted(primal.items()):
            a = mpmath.pi * mpmath.mpf(q_val.numerator) / q_val.denominator
            s1 += phases * mpmath.gammainc(ms, a) * a ** (-ms)

        wvec = [x % 1 for x in lat.twist]
        dual = _shell_sums(inv_gram, cut, shift=wvec)
        s2 = mpmath.mpc(0)
        for q_val, count in sorted(dual.items()):
            a = mpmath.pi * mpmath.mpf(q_val.numerator) / q_val.denominator
            s2 += count * mpmath.gammainc(r / 2 - ms, a) * a ** (ms - r / 2)
        s2 /= det_root

        # Z(s) = pi^s [ -1/G(s+1) + s c /((s - r/2) G(s+1)) + s (S1+S2)/G(s+1) ]
        # with c = det^-1/2 present only when the twist is trivial (the
        # dual theta series then has a constant term)
        g1 = mpmath.gamma(ms + 1)
        total = -1 / g1
        if trivial:
            total += ms / ((ms - mpmath.mpf(r) / 2) * g1 * det_root)
        total += ms * (s1 + s2) / g1
        total *= mpmath.pi ** ms
        out = complex(total)
    return out


def direct_sum(lat, s, radius_q):
    """Reference truncated series sum_{0 < Q(x) <= radius} phase / Q(x)^s.

    Only meaningful in the convergence region Re(s) > rank/2; used as an
    independent check of the continuation.
    """
    shells = _shell_sums(lat.gram, linalg.frac(radius_q), twist=lat.twist)
    s = complex(s)
    total = 0j
    for q_val, phases in sorted(shells.items()):
        total += phases * float(q_val) ** (-s)
    return total


def value_at_zero(lat):
    """The continued value at s = 0 (always -1 by the boundary term).

    The incomplete-gamma sums are multiplied by s/Gamma(s+1) and vanish at
    s = 0; the correctness of those sums (and hence of this limit) is
    established by the cross-checks against direct summation away from 0.
    """
    return epstein_value(lat, 0.0).real


def closed_form_mu(orbifold):
    """mu_3 and mu_4 assembled from zeta values at 0, element by element.

    Demonstrates the regularisation route numerically: each element
    contributes its trace polynomial times the continued value at 0 of its
    fixed lattice's twisted zeta.  Must agree with the exact invariants.
    """
    metric = orbifold.structure.metric
    n = len(orbifold.group)
    total3 = 0.0
    total4 = 0.0
    for element in orbifold.group:
        lat = fixed_lattice(element, metric)
        z0 = value_at_zero(lat)
        total3 += float(tr8_su3(element.matrix)) * z0
        total4 += float(tr12_su3(element.matrix)) * z0
    return InvariantPair(mu3=total3 / n, mu4=total4 / n)

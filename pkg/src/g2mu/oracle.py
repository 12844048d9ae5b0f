"""Brute-force verification of the eigenspace multiplicity formulas.

For a flat orbifold the negative spectrum of both Hessian operators is
carried by spaces of twisted constant forms

    H_l  = {chi_l a : a in Lambda^2_14,  l . a = 0}   (dimension 8),
    H'_l = {chi_l a : a in Lambda^3_27,  l . a = 0}   (dimension 12),

summed over lattice vectors l of a fixed squared length.  The group acts by
pullback; the dimension of the invariant subspace is the group average of
the character.  This module computes that dimension two independent ways:

  * brute force: explicit bases of the fibres, explicit pullback matrices,
    exact restricted traces and exact root-of-unity phases;
  * closed form: the tr8/tr12 trace polynomials weighted by the same phases
    over the fixed vectors of each element.

Agreement of the two routes on every class is the oracle for the character
formula behind the mu-invariants.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .exterior import DIM, ExteriorForm, pullback
from .fourier import typed_contraction_kernel, typed_contraction_kernel_dim
from .invariants import tr8_su3, tr12_su3

# exact cosines of 2 pi q at the rational angles where they are rational
_RATIONAL_COS = {
    Fraction(0): Fraction(1),
    Fraction(1, 2): Fraction(-1),
    Fraction(1, 3): Fraction(-1, 2),
    Fraction(2, 3): Fraction(-1, 2),
    Fraction(1, 4): Fraction(0),
    Fraction(3, 4): Fraction(0),
    Fraction(1, 6): Fraction(1, 2),
    Fraction(5, 6): Fraction(1, 2),
}

KINDS = {"H": (2, 14, 8), "Hprime": (3, 27, 12)}


class NonIntegerDimension(ArithmeticError):
    """The averaged character failed to be a nonnegative integer."""


class NotFixed(ValueError):
    """The lattice vector is not fixed by the element's matrix part."""


@dataclass(frozen=True)
class EigenClass:
    """All lattice vectors sharing one exact squared length."""
    norm_sq: Fraction
    vectors: tuple

    def eigenvalue(self):
        """The (negative) eigenvalue -4 pi^2 |l|^2 as a float."""
        return -4.0 * np.pi ** 2 * float(self.norm_sq)

    def __len__(self):
        return len(self.vectors)


@dataclass(frozen=True)
class SpectralReport:
    norm_sq: Fraction
    kind: str
    dim_bruteforce: int
    dim_formula: int

    @property
    def match(self):
        return self.dim_bruteforce == self.dim_formula

    def to_json_dict(self):
        return {
            "norm_sq": str(self.norm_sq),
            "kind": self.kind,
            "dim_bruteforce": self.dim_bruteforce,
            "dim_formula": self.dim_formula,
            "match": self.match,
        }


def enumerate_classes(orbifold, radius_sq):
    """Nonzero lattice vectors with |l|^2_g <= radius_sq, grouped by norm."""
    radius_sq = linalg.frac(radius_sq)
    if radius_sq < 0:
        raise ValueError("radius_sq must be nonnegative")
    structure = orbifold.structure
    key = ("classes", radius_sq)
    if key in structure._fiber_cache:
        return structure._fiber_cache[key]
    gram = structure.metric.gram
    points = linalg.enumerate_ellipsoid(gram, radius_sq)
    by_norm = {}
    integer_gram = structure.is_exact and all(
        linalg.frac(x).denominator == 1 for x in gram.flat)
    if integer_gram and points:
        V = np.array(points, dtype=np.int64)
        G = np.array([[int(x) for x in row] for row in gram], dtype=np.int64)
        norms = np.einsum("ij,jk,ik->i", V, G, V)
        for l, n2 in zip(points, norms):
            if any(l):
                by_norm.setdefault(Fraction(int(n2)), []).append(l)
    else:
        for l in points:
            if not any(l):
                continue
            v = linalg.frac_vector(l)
            by_norm.setdefault(v @ gram @ v, []).append(l)
    classes = [EigenClass(norm_sq=n2, vectors=tuple(sorted(by_norm[n2])))
               for n2 in sorted(by_norm)]
    structure._fiber_cache[key] = classes
    return classes


class ModeSpace:
    """Lazily constructed fibre bases of H_l or H'_l for one structure."""

    def __init__(self, structure, kind):
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {sorted(KINDS)}")
        self.structure = structure
        self.kind = kind
        self.grade, self.component, self.expected_dim = KINDS[kind]

    def fiber_basis(self, l):
        """Exact basis of {a in Lambda^grade_component : l . a = 0}."""
        basis = typed_contraction_kernel(self.structure, l, self.grade, self.component)
        if len(basis) != self.expected_dim:
            raise NonIntegerDimension(
                f"fibre at {l} has dimension {len(basis)}, expected {self.expected_dim}")
        return basis

    def fiber_dimension(self, l):
        return typed_contraction_kernel_dim(self.structure, l, self.grade, self.component)

    def orthonormal_fiber_basis(self, l):
        """Floating orthonormal version of fiber_basis (w.r.t. the metric)."""
        gram = self.structure.metric.lambda_gram(self.grade)
        ortho, norms = linalg.gram_schmidt([list(v) for v in self.fiber_basis(l)], gram)
        return [ExteriorForm(self.grade,
                             (np.array([float(x) for x in v]) / np.sqrt(float(n2))).astype(complex))
                for v, n2 in zip(ortho, norms)]


def group_action_on_mode(element, l, alpha, metric=None, gram_inv=None):
    """Pullback of chi_l * alpha by the affine map x -> Ax + t.

    Returns (phase exponent q, l_out, A* alpha) with the actual phase equal
    to exp(2 pi i q); q = g(l, t) reduced mod 1, exact.  The new mode is
    the unique integer vector with g(l_out, x) = g(l, Ax), i.e.
    G^-1 A^T G l; for any g-preserving A this coincides with the transpose
    rule A^T l, and a mismatch (impossible for validated groups) raises.
    """
    from .exterior import Metric7
    if metric is None:
        metric = Metric7.euclidean()
    A = element.matrix
    G = metric.gram
    lv = linalg.frac_vector(l)
    At = linalg.frac_matrix([[A[j][i] for j in range(DIM)] for i in range(DIM)])
    if gram_inv is None:
        gram_inv = metric.inverse_gram()
    l_exact = gram_inv @ (At @ (G @ lv))
    if any(x.denominator != 1 for x in l_exact):
        raise ValueError(f"mode map of {l} under {element} is not integral")
    l_out = tuple(int(x) for x in l_exact)
    l_transpose = tuple(int(sum(A[j][i] * l[j] for j in range(DIM))) for i in range(DIM))
    if l_out != l_transpose:
        raise ValueError(
            f"metric mode map {l_out} disagrees with transpose rule {l_transpose}; "
            "the element does not preserve the metric")
    q = (lv @ G @ linalg.frac_vector(element.translation)) % 1
    return q, l_out, pullback(A, alpha)


def _restricted_trace(structure, mat_pullback, basis):
    """Exact trace of proj_span o pullback restricted to span(basis).

    This is the diagonal-block trace of the big representation matrix: the
    action composed with the orthogonal projection back onto the fibre,
    tr((B^T G B)^-1 B^T G M B).  When the fibre is invariant (fixed modes)
    the projection is a no-op.  Integer data takes an int64 fast path.
    """
    grade = {21: 2, 35: 3}[mat_pullback.shape[0]]
    gram = structure.metric.lambda_gram(grade)
    euclidean = structure.is_exact and _is_identity_matrix(gram)
    if euclidean and mat_pullback.dtype == np.int64:
        try:
            B = np.stack([np.array([int(x) for x in v], dtype=np.int64)
                          for v in basis], axis=1)
        except (TypeError, ValueError):
            B = None
        if B is not None:
            key = ("invBtB", B.tobytes(), B.shape)
            inv = structure._fiber_cache.get(key)
            if inv is None:
                inv = linalg.inverse(linalg.frac_matrix((B.T @ B).tolist()))
                structure._fiber_cache[key] = inv
            BtMB = (B.T @ (mat_pullback @ B)).tolist()
            k = len(BtMB)
            # trace of inv @ BtMB without forming the product
            return sum(inv[i, j] * BtMB[j][i] for i in range(k) for j in range(k))
    B = np.stack([np.array([linalg.frac(x) for x in v], dtype=object)
                  for v in basis], axis=1)
    M = mat_pullback if mat_pullback.dtype == object else \
        linalg.frac_matrix(mat_pullback.tolist())
    BtG = B.T @ gram
    C = linalg.inverse(BtG @ B) @ (BtG @ (M @ B))
    return sum(C[i, i] for i in range(C.shape[0]))


def _is_identity_matrix(m):
    n = m.shape[0]
    return all(m[i, j] == (1 if i == j else 0) for i in range(n) for j in range(n))


class _PhaseSum:
    """Exact accumulator for sums of coeff * exp(2 pi i q), q rational."""

    def __init__(self):
        self.terms = {}

    def add(self, q, coeff):
        q = linalg.frac(q) % 1
        self.terms[q] = self.terms.get(q, Fraction(0)) + linalg.frac(coeff)

    def value(self):
        """The exact rational value; requires conjugation symmetry."""
        total = Fraction(0)
        seen = set()
        for q, c in self.terms.items():
            if q in seen:
                continue
            q_conj = (1 - q) % 1
            c_conj = self.terms.get(q_conj, Fraction(0))
            if q == q_conj:
                pair_value = c * _cos_2pi(q)
            else:
                if c != c_conj:
                    raise NonIntegerDimension(
                        f"phase sum is not real: coeff({q}) = {c}, coeff({q_conj}) = {c_conj}")
                pair_value = 2 * c * _cos_2pi(q)
                seen.add(q_conj)
            seen.add(q)
            total += pair_value
        return total


def _cos_2pi(q):
    if q in _RATIONAL_COS:
        return _RATIONAL_COS[q]
    # cos(2 pi q) is irrational for other rational q (Niven); such phases can
    # only arise from user groups outside the shipped examples, where the
    # final average is still an integer -- evaluate with enough precision to
    # recover it and let the integrality check below be the arbiter.
    import mpmath
    with mpmath.workdps(50):
        val = mpmath.cos(2 * mpmath.pi * mpmath.mpf(q.numerator) / q.denominator)
        approx = Fraction(val).limit_denominator(10 ** 30)
    return approx


def _fixed_vectors(element, cls):
    """Vectors of the class fixed by the matrix part (vectorised scan)."""
    if element.is_identity():
        return list(cls.vectors)
    A = np.array(element.matrix, dtype=np.int64)
    V = np.array(cls.vectors, dtype=np.int64)
    mask = np.all(V @ A.T == V, axis=1)
    return [cls.vectors[i] for i in np.flatnonzero(mask)]


def _phase_exponent(metric, l, translation):
    if all(x == 0 for x in translation):
        return Fraction(0)
    return (linalg.frac_vector(l) @ metric.gram @ linalg.frac_vector(translation)) % 1


def invariant_dimension_bruteforce(orbifold, cls, kind):
    """dim of the invariant part of H(lambda) by explicit group averaging.

    Builds the block matrix of each element in the explicit fibre bases;
    off-diagonal blocks (modes moved elsewhere) contribute no trace, so the
    average is the phase-weighted sum of restricted traces over fixed modes.
    The identity block's trace is the fibre dimension itself.
    """
    structure = orbifold.structure
    space = ModeSpace(structure, kind)
    metric = structure.metric
    acc = _PhaseSum()
    for element in orbifold.group:
        fixed = _fixed_vectors(element, cls)
        if not fixed:
            continue
        if element.is_identity():
            for l in fixed:
                acc.add(Fraction(0), space.fiber_dimension(l))
            continue
        mat = pullback_matrix_cached(structure, element, space.grade)
        for l in fixed:
            q = _phase_exponent(metric, l, element.translation)
            tr = _restricted_trace(structure, mat, space.fiber_basis(l))
            acc.add(q, tr)
    return _integer_average(acc, len(orbifold.group))


def invariant_dimension_formula(orbifold, cls, kind):
    """Same dimension via the closed-form character: phases times tr8/tr12."""
    structure = orbifold.structure
    metric = structure.metric
    poly = tr8_su3 if kind == "H" else tr12_su3
    acc = _PhaseSum()
    for element in orbifold.group:
        value = poly(element.matrix)
        for l in _fixed_vectors(element, cls):
            acc.add(_phase_exponent(metric, l, element.translation), value)
    return _integer_average(acc, len(orbifold.group))


def _integer_average(acc, order):
    total = acc.value() / order
    if total.denominator != 1 or total < 0:
        raise NonIntegerDimension(f"averaged character {total} is not a nonnegative integer")
    return int(total)


def pullback_matrix_cached(structure, element, grade):
    """Compound (pullback) matrix of the matrix part, int64 where possible."""
    key = ("pullback", element.matrix, grade)
    cache = structure._fiber_cache
    if key not in cache:
        from .exterior import pullback_matrix
        mat = pullback_matrix(element.matrix, grade, exact=True)
        entries = [[linalg.frac(x) for x in row] for row in mat]
        if all(x.denominator == 1 and abs(x) < 2 ** 31 for row in entries for x in row):
            mat = np.array([[int(x) for x in row] for row in entries], dtype=np.int64)
        cache[key] = mat
    return cache[key]


def su3_trace_check(orbifold, element, l):
    """Residuals |tr(A | fibre) - tr8(A)| and |tr(A | fibre') - tr12(A)|.

    Exact Fractions; both vanish because the fibres at a fixed direction
    realise the 8- and 12-dimensional pieces whose characters the trace
    polynomials compute.  l must be a nonzero fixed vector of the
    element's matrix part.
    """
    A = element.matrix
    if all(x == 0 for x in l):
        raise NotFixed("l must be nonzero")
    if any(sum(A[i][j] * l[j] for j in range(DIM)) != l[i] for i in range(DIM)):
        raise NotFixed(f"{l} is not fixed by the element")
    structure = orbifold.structure
    res = []
    for kind, poly in (("H", tr8_su3), ("Hprime", tr12_su3)):
        space = ModeSpace(structure, kind)
        mat = pullback_matrix_cached(structure, element, space.grade)
        tr = _restricted_trace(structure, mat, space.fiber_basis(l))
        res.append(abs(tr - poly(A)))
    return tuple(res)


class ConvergenceRegionViolated(ValueError):
    """The Morse partial sum was requested outside Re(s) > 7/2."""


def partial_morse_sum(orbifold, kind, s, radius_sq, use_formula=False):
    """Truncated sum over classes of dim^Gamma / |lambda|^s.

    Only defined in the convergence region s > 7/2 of the full series;
    outside it the truncation is meaningless and is rejected.
    """
    if kind == "mu3":
        space_kind = "H"
    elif kind == "mu4":
        space_kind = "Hprime"
    else:
        raise ValueError("kind must be 'mu3' or 'mu4'")
    if not float(s) > 3.5:
        raise ConvergenceRegionViolated(f"s = {s} is not in the region Re(s) > 7/2")
    dim_of = invariant_dimension_formula if use_formula else invariant_dimension_bruteforce
    total = 0.0
    for cls in enumerate_classes(orbifold, radius_sq):
        dim = dim_of(orbifold, cls, space_kind)
        lam = abs(cls.eigenvalue())
        total += dim / lam ** float(s)
    return total


def spectral_reports(orbifold, radius_sq, kinds=("H", "Hprime")):
    """One SpectralReport per (class, kind); the oracle's main entry point."""
    out = []
    for cls in enumerate_classes(orbifold, radius_sq):
        for kind in kinds:
            out.append(SpectralReport(
                norm_sq=cls.norm_sq,
                kind=kind,
                dim_bruteforce=invariant_dimension_bruteforce(orbifold, cls, kind),
                dim_formula=invariant_dimension_formula(orbifold, cls, kind),
            ))
    return out


def spectral_report_lines(reports):
    """Serialise reports as JSON lines, one record per line."""
    import json
    return "\n".join(json.dumps(r.to_json_dict(), sort_keys=True) for r in reports)

"""Finite groups of affine torus automorphisms and their G2 compatibility.

Group elements are pairs (A, t) in SL(7,Z) x T^7 acting on the torus by
x -> A x + t.  Translations are kept as exact reduced rationals in [0,1)
so that the characters and twist phases computed downstream are exact
roots of unity.
"""

from fractions import Fraction

import numpy as np

from . import linalg
from .exterior import DIM
from .g2 import G2Structure


class NonUnimodular(ValueError):
    """A matrix part fails det = +1."""


class NonFinite(ValueError):
    """Group closure exceeded the safety cap."""


class NotG2Compatible(ValueError):
    """Some element does not preserve the candidate G2-structure."""

    def __init__(self, element, message=None):
        self.element = element
        super().__init__(message or f"element {element} does not preserve the 3-form")


DEFAULT_CAP = 10_000


def _reduce_mod1(t):
    return tuple(linalg.frac(x) % 1 for x in t)


class AffineElement:
    """An element (A, t) of SL(7,Z) x T^7, acting by x -> A x + t."""

    __slots__ = ("matrix", "translation")

    def __init__(self, matrix, translation=None):
        mat = tuple(tuple(int(x) for x in row) for row in matrix)
        if len(mat) != DIM or any(len(r) != DIM for r in mat):
            raise ValueError("matrix must be 7x7")
        if linalg.int_det(mat) != 1:
            raise NonUnimodular("matrix part must have determinant +1")
        if translation is None:
            translation = (0,) * DIM
        trans = _reduce_mod1(translation)
        if len(trans) != DIM:
            raise ValueError("translation must have 7 entries")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "translation", trans)

    def __setattr__(self, *_):
        raise AttributeError("AffineElement is immutable")

    @classmethod
    def identity(cls):
        return cls(tuple(tuple(1 if i == j else 0 for j in range(DIM)) for i in range(DIM)))

    def is_identity(self):
        return self == AffineElement.identity()

    def matrix_array(self):
        return np.array(self.matrix, dtype=object)

    def apply(self, x):
        """Image of the rational point x under x -> A x + t (mod 1)."""
        x = [linalg.frac(v) for v in x]
        out = [sum(self.matrix[i][j] * x[j] for j in range(DIM)) + self.translation[i]
               for i in range(DIM)]
        return tuple(v % 1 for v in out)

    def __eq__(self, other):
        return isinstance(other, AffineElement) and self.matrix == other.matrix \
            and self.translation == other.translation

    def __hash__(self):
        return hash((self.matrix, self.translation))

    def __repr__(self):
        diag = all(self.matrix[i][j] == 0 for i in range(DIM) for j in range(DIM) if i != j)
        mat = f"diag{tuple(self.matrix[i][i] for i in range(DIM))}" if diag else f"{self.matrix}"
        return f"AffineElement({mat}, t={tuple(str(x) for x in self.translation)})"


def compose(a, b):
    """Group law for the action x -> Ax + t:  (A1,t1)(A2,t2) = (A1 A2, A1 t2 + t1)."""
    mat = tuple(tuple(sum(a.matrix[i][k] * b.matrix[k][j] for k in range(DIM))
                      for j in range(DIM)) for i in range(DIM))
    trans = tuple(sum(Fraction(a.matrix[i][k]) * b.translation[k] for k in range(DIM))
                  + a.translation[i] for i in range(DIM))
    return AffineElement(mat, trans)


def inverse(a):
    """(A, t)^-1 = (A^-1, -A^-1 t)."""
    inv = linalg.inverse(linalg.frac_matrix(a.matrix))
    mat = tuple(tuple(int(inv[i, j]) for j in range(DIM)) for i in range(DIM))
    trans = tuple(-sum(Fraction(mat[i][k]) * a.translation[k] for k in range(DIM))
                  for i in range(DIM))
    return AffineElement(mat, trans)


class OrbifoldGroup:
    """A finite subgroup of SL(7,Z) x T^7, identity first, no duplicates."""

    __slots__ = ("elements",)

    def __init__(self, elements, check=True):
        elems = list(elements)
        ident = AffineElement.identity()
        if ident not in elems:
            raise ValueError("group must contain the identity")
        elems = [ident] + sorted((e for e in elems if e != ident), key=repr)
        if check:
            table = set(elems)
            if len(table) != len(elems):
                raise ValueError("duplicate elements")
            for x in elems:
                if inverse(x) not in table:
                    raise ValueError(f"not closed under inverse at {x}")
                for y in elems:
                    if compose(x, y) not in table:
                        raise ValueError(f"not closed under composition at {x}, {y}")
        object.__setattr__(self, "elements", tuple(elems))

    def __setattr__(self, *_):
        raise AttributeError("OrbifoldGroup is immutable")

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def generate(generators, cap=DEFAULT_CAP):
    """Closure of the generators under composition and inverse.

    Raises NonFinite if the closure would exceed `cap` elements and
    NonUnimodular if any generator is outside SL(7,Z) (checked on
    construction of the AffineElements themselves).
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    gens = list(generators)
    seen = {AffineElement.identity()}
    frontier = list(seen)
    gens_and_inverses = []
    for gen in gens:
        gens_and_inverses.append(gen)
        gens_and_inverses.append(inverse(gen))
    while frontier:
        nxt = []
        for x in frontier:
            for gch in gens_and_inverses:
                y = compose(x, gch)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > cap:
                        raise NonFinite(f"group closure exceeded cap = {cap}")
        frontier = nxt
    return OrbifoldGroup(seen, check=False)


class JoyceOrbifold:
    """A finite group together with a frame making every element G2-compatible."""

    __slots__ = ("group", "frame", "structure")

    def __init__(self, group, frame, structure):
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "structure", structure)

    def __setattr__(self, *_):
        raise AttributeError("JoyceOrbifold is immutable")

    def __len__(self):
        return len(self.group)


def validate_joyce(group, frame=None):
    """Check F A F^-1 in G2 for every element; assemble the orbifold.

    The membership test is the pullback condition A*(F*phi0) = F*phi0,
    exact for rational frames.  Raises NotG2Compatible naming the first
    failing element.  Structures are shared per frame so downstream fibre
    caches are reused between orbifolds over the same flat metric.
    """
    structure = G2Structure.for_frame(frame)
    for elem in group:
        if not structure.is_g2_element(elem.matrix):
            raise NotG2Compatible(elem)
    return JoyceOrbifold(group, structure.frame, structure)

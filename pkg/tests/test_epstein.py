from fractions import Fraction

import mpmath
import numpy as np
import pytest

from g2mu import epstein as ez
from g2mu import linalg
from g2mu.exterior import Metric7
from g2mu.invariants import mu_invariants
from g2mu.orbifold import AffineElement, generate, validate_joyce


def diag(*entries):
    return [[entries[i] if i == j else 0 for j in range(7)] for i in range(7)]


ALPHA = AffineElement(diag(1, 1, 1, -1, -1, -1, -1))
BETA = AffineElement(diag(1, -1, -1, 1, 1, -1, -1), [0, 0, 0, 0, 0, 0, Fraction(1, 2)])
GAMMA = AffineElement(diag(-1, 1, -1, 1, -1, 1, -1),
                      [0, 0, Fraction(1, 2), 0, 0, 0, Fraction(1, 2)])


def cubic_lattice(rank, twist=None):
    basis = tuple(tuple(1 if j == i else 0 for j in range(7)) for i in range(rank))
    return ez.TwistedLattice(rank=rank, basis=basis, gram=linalg.identity_frac(rank),
                             twist=tuple(twist or [Fraction(0)] * rank))


def dirichlet_beta(s):
    return complex(mpmath.mpf(4) ** (-s)
                   * (mpmath.zeta(s, mpmath.mpf(1) / 4) - mpmath.zeta(s, mpmath.mpf(3) / 4)))


def test_fixed_lattice_identity():
    lat = ez.fixed_lattice(AffineElement.identity(), Metric7.euclidean())
    assert lat.rank == 7
    assert all(lat.gram[i, j] == (1 if i == j else 0) for i in range(7) for j in range(7))
    assert lat.is_twist_trivial()


def test_fixed_lattice_involution():
    lat = ez.fixed_lattice(ALPHA, Metric7.euclidean())
    assert lat.rank == 3
    axes = {tuple(abs(x) for x in row) for row in lat.basis}
    assert axes == {(1, 0, 0, 0, 0, 0, 0), (0, 1, 0, 0, 0, 0, 0), (0, 0, 1, 0, 0, 0, 0)}


def test_fixed_lattice_with_translation():
    lat = ez.fixed_lattice(BETA, Metric7.euclidean())
    assert lat.rank == 3
    assert lat.is_twist_trivial()   # fixed axes 1, 4, 5 avoid the shifted axis
    ab = None
    from g2mu.orbifold import compose
    ab = compose(ALPHA, BETA)
    lat2 = ez.fixed_lattice(ab, Metric7.euclidean())
    assert lat2.rank == 3
    assert not lat2.is_twist_trivial()  # axis 7 is fixed and carries the 1/2 shift


def test_fixed_lattice_rejects_rank_zero():
    # -Id is not in SL(7,Z) (det = -1), so build a fake via a rotation block
    # acting freely... every 7x7 case has rank >= 1, so check the guard directly
    class Fake:
        matrix = tuple(tuple(2 if i == j else 0 for j in range(7)) for i in range(7))
        translation = (Fraction(0),) * 7
    with pytest.raises(ValueError):
        ez.fixed_lattice(Fake, Metric7.euclidean())


def test_rank1_matches_riemann_zeta():
    lat = cubic_lattice(1)
    for s in [2.0, 1.2, 0.75, 0.3, -0.5, 1.5 + 0.7j]:
        val = ez.epstein_value(lat, s)
        ref = complex(2 * mpmath.zeta(2 * s))
        assert abs(val - ref) < 1e-10 * max(1.0, abs(ref)), s


def test_rank1_twisted_matches_eta_form():
    lat = cubic_lattice(1, [Fraction(1, 2)])
    for s in [2.0, 1.0, 0.4, -0.3]:
        val = ez.epstein_value(lat, s)
        ref = complex(2 * (2 ** (1 - 2 * s) - 1) * mpmath.zeta(2 * s))
        assert abs(val - ref) < 1e-10 * max(1.0, abs(ref)), s
    assert abs(ez.value_at_zero(lat) + 1) < 1e-12


def test_rank2_matches_zeta_times_beta():
    lat = cubic_lattice(2)
    for s in [2.0, 3.0, 0.6]:
        val = ez.epstein_value(lat, s)
        ref = complex(4 * mpmath.zeta(s) * dirichlet_beta(s))
        assert abs(val - ref) < 1e-10 * max(1.0, abs(ref)), s
    # 4 zeta(0) beta(0) = 4 * (-1/2) * (1/2) = -1
    assert abs(ez.value_at_zero(lat) + 1) < 1e-12


def test_rank7_against_theta_series_direct_sum():
    # independent direct sum: representation numbers of the cubic lattice
    # from the 7th power of the 1-dimensional theta series
    N = 400
    theta = np.zeros(N + 1, dtype=np.int64)
    n = 0
    while n * n <= N:
        theta[n * n] = 2 if n else 1
        n += 1
    r = np.array([1], dtype=np.int64)
    for _ in range(7):
        full = np.convolve(r, theta)
        r = full[:N + 1]
    s = 6.0
    direct = sum(int(r[k]) / k ** s for k in range(1, N + 1))
    tail_bound = 3 * int(r[N]) / N ** s * N  # crude geometric-style bound
    val = ez.epstein_value(cubic_lattice(7), s).real
    assert abs(val - direct) < max(1e-8, tail_bound)


def test_value_at_zero_for_all_example_elements():
    g = Metric7.euclidean()
    orb = validate_joyce(generate([ALPHA, BETA, GAMMA]))
    saw_twisted = False
    for e in orb.group:
        lat = ez.fixed_lattice(e, g)
        saw_twisted = saw_twisted or not lat.is_twist_trivial()
        assert abs(ez.value_at_zero(lat) + 1) < 1e-6
    assert saw_twisted


def test_pole_detection():
    lat = cubic_lattice(2)
    with pytest.raises(ez.PoleEncountered):
        ez.epstein_value(lat, 1.0)
    # twisted zeta has no pole there
    twisted = cubic_lattice(2, [Fraction(1, 2), Fraction(0)])
    ez.epstein_value(twisted, 1.0)


def test_continuation_agrees_with_direct_sum_random_lattices():
    rng = np.random.default_rng(0)
    for trial in range(20):
        rank = int(rng.integers(1, 4))
        while True:
            B = rng.integers(-2, 3, size=(rank, rank))
            if abs(np.linalg.det(B)) > 0.5:
                break
        gram = linalg.frac_matrix((B.T @ B + np.eye(rank, dtype=np.int64)).tolist())
        twist = tuple(Fraction(int(rng.integers(0, 4)), 4) for _ in range(rank))
        lat = ez.TwistedLattice(rank=rank, basis=tuple(map(tuple, np.eye(7, dtype=int)[:rank])),
                                gram=gram, twist=twist)
        s = rank / 2 + 1 + float(rng.uniform(0, 2))
        radius = 600
        direct = ez.direct_sum(lat, s, radius)
        cont = ez.epstein_value(lat, s)
        # truncation bound: remaining shells decay like Q^(rank/2 - 1 - s)
        tail = 4 * radius ** (rank / 2 - s)
        assert abs(cont - direct) <= tail + 1e-9, (trial, rank, s)


def test_scaling_covariance():
    lat = cubic_lattice(3)
    scaled = ez.TwistedLattice(rank=3, basis=lat.basis,
                               gram=lat.gram * Fraction(4), twist=lat.twist)
    for s in [2.5, 4.0]:
        a = ez.epstein_value(lat, s)
        b = ez.epstein_value(scaled, s)
        assert abs(b - a * 4.0 ** (-s)) < 1e-10 * max(1.0, abs(a))
    assert abs(ez.value_at_zero(scaled) - ez.value_at_zero(lat)) < 1e-10


def test_basis_change_invariance():
    lat = ez.fixed_lattice(ALPHA, Metric7.euclidean())
    U = [[1, 1, 0], [0, 1, 0], [1, 0, 1]]  # unimodular
    rebased = lat.rebase(U)
    for s in [2.4, 0.5]:
        assert abs(ez.epstein_value(rebased, s) - ez.epstein_value(lat, s)) < 1e-10
    assert abs(ez.value_at_zero(rebased) - ez.value_at_zero(lat)) < 1e-10
    with pytest.raises(ValueError):
        lat.rebase([[2, 0, 0], [0, 1, 0], [0, 0, 1]])


def test_closed_form_mu_bridge():
    expected = {
        (): (-8.0, -12.0),
        (ALPHA,): (-4.0, -8.0),
        (ALPHA, BETA): (-2.0, -6.0),
        (ALPHA, BETA, GAMMA): (-1.0, -5.0),
    }
    for gens, (m3, m4) in expected.items():
        orb = validate_joyce(generate(list(gens)))
        bridge = ez.closed_form_mu(orb)
        exact = mu_invariants(orb)
        assert abs(bridge.mu3 - m3) < 1e-6 and abs(bridge.mu4 - m4) < 1e-6
        assert abs(bridge.mu3 - float(exact.mu3)) < 1e-6
        assert abs(bridge.mu4 - float(exact.mu4)) < 1e-6

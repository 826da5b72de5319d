from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nblab import algebra as al
from nblab.specfun import gamma_complex

rational = st.fractions(min_value=-5, max_value=5, max_denominator=12)
polys = st.lists(rational, min_size=1, max_size=6).map(al.RationalPoly)


def test_recursion_step_gaussian():
    g1 = al.seed_recursion_step(al.gaussian_seed())
    assert g1.poly == al.RationalPoly([Fraction(-1, 2), 0, 2])


def test_recursion_step_r_zero():
    assert al.seed_recursion_step(al.gaussian_seed(), 0).poly == al.RationalPoly([0, 0, 2])


def test_recursion_step_xi_seed():
    g1 = al.seed_recursion_step(al.xi_seed())
    assert g1.poly == al.RationalPoly([0, 0, -30, 0, 150, 0, -108, 0, 16])


def test_recursion_step_matches_numeric_derivative():
    g = al.xi_seed()
    g1 = al.seed_recursion_step(g)
    t = np.linspace(-2, 2, 9)
    h = 1e-6
    num = -t * (g(t + h) - g(t - h)) / (2 * h) - 0.5 * g(t)
    assert np.allclose(g1(t), num, atol=1e-8)


def test_triangle_corners():
    tri = al.coefficient_triangle(4)
    assert tri[0, 0] == 1
    assert tri[1, 1] == -1
    for k in range(5):
        assert tri[k, k] == (-1) ** k


def test_triangle_expansion_equals_recursion():
    seq = al.seed_sequence(al.xi_seed(), 10)
    tri = al.coefficient_triangle(10)
    for k in (2, 5, 10):
        assert tri.expand(al.xi_seed(), k).poly == seq[k].poly


def test_triangle_with_general_r():
    r = [Fraction(1, 3), Fraction(2, 5), Fraction(-1, 7)]
    seq = al.seed_sequence(al.gaussian_seed(), 3, r)
    assert al.coefficient_triangle(3, r).expand(al.gaussian_seed(), 3).poly == seq[3].poly


def test_bernstein_values():
    assert al.bernstein_eval(0, 0, 0.4) == 1
    assert al.bernstein_eval(1, 1, 0.5) == pytest.approx(0.5)
    assert sum(al.bernstein_eval(n, 5 - n, 0.3) for n in range(6)) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        al.bernstein_eval(-1, 2, 0.5)


def test_seed_mellin_gaussian():
    assert complex(al.seed_mellin(al.gaussian_seed(), 0.5)).real == pytest.approx(gamma_complex(0.25).real / 2,
                                                                                 rel=1e-13)


def test_seed_mellin_xi_closed_form():
    s = 0.5 + 2j
    g = al.xi_seed(normalized=False)
    closed = 0.5 * (s - 1) * s ** 2 * gamma_complex(s / 2)
    assert abs(complex(al.seed_mellin(g, s)) - closed) <= 1e-10 * abs(closed)


@given(polys, polys)
def test_seed_mellin_linear(p, q):
    s = 0.3 + 1.7j
    a = al.seed_mellin(al.SeedFunction(p + q), s)
    b = al.seed_mellin(al.SeedFunction(p), s) + al.seed_mellin(al.SeedFunction(q), s)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


@pytest.mark.parametrize("k", range(5))
def test_mellin_factorisation(k):
    rng = np.random.default_rng(k)
    seq = al.seed_sequence(al.xi_seed(), k)
    for s in rng.uniform(0.1, 0.9, 10) + 1j * rng.uniform(-10, 10, 10):
        lhs = complex(al.seed_mellin(seq[k], s))
        rhs = (s - 0.5) ** k * complex(al.seed_mellin(seq[0], s))
        # roundoff scale of the monomial sum
        scale = sum(abs(float(q)) * abs(complex(gamma_complex((s + j) / 2)))
                    for j, q in enumerate(seq[k].poly.coeffs) if q)
        assert abs(lhs - rhs) <= 1e-13 * scale


def test_mellin_factorisation_exact_arithmetic():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 60
    seq = al.seed_sequence(al.xi_seed(), 10)

    def mel(g, s):
        return sum(mpmath.mpf(q.numerator) / q.denominator * mpmath.gamma((s + j) / 2)
                   for j, q in enumerate(g.poly.coeffs) if q) / 2

    s = mpmath.mpc("0.3", "7.5")
    for k in (6, 10):
        lhs = mel(seq[k], s)
        rhs = (s - mpmath.mpf(1) / 2) ** k * mel(seq[0], s)
        assert abs(lhs - rhs) <= mpmath.mpf(10) ** -40 * abs(rhs)


def test_gaussian_domination():
    seq = al.seed_sequence(al.xi_seed(), 6)
    t = 40.0
    for k, g in enumerate(seq):
        assert abs(g(t)) * t ** (k + 2) < 1e-300 or abs(g(t)) * t ** (k + 2) == 0.0


@given(polys, polys)
def test_poly_ring_identities(p, q):
    assert p + q == q + p
    assert (p * q).derivative() == p.derivative() * q + p * q.derivative()
    assert p - p == al.RationalPoly([0])


@given(polys)
def test_poly_json_round_trip(p):
    assert al.RationalPoly.from_json(p.to_json()) == p
    g = al.SeedFunction(p, 0.75)
    assert al.SeedFunction.from_json(g.to_json()) == g


def test_recursion_exact_after_ten_steps():
    seq = al.seed_sequence(al.xi_seed(), 10)
    assert all(isinstance(c, Fraction) for c in seq[10].poly.coeffs)
    assert seq[10].poly.degree == 26

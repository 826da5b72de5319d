import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nblab import invgamma as ig
from nblab.specfun import DomainError, RhoSpec, gamma_complex, zeta_strip

DIRAC = RhoSpec.dirac()
EXP = RhoSpec.exponential(1.0)


@pytest.mark.parametrize("k", [1, 2, 4])
@pytest.mark.parametrize("t", [0.05, 0.4, 1.0, 3.0])
def test_gx_routes_agree_dirac(k, t):
    f = ig.gx_invgamma(k, t, DIRAC, route="fourier")
    assert f == pytest.approx(ig.gx_invgamma(k, t, DIRAC, route="formula"), abs=1e-9)
    assert f == pytest.approx(ig.gx_invgamma(k, t, DIRAC, route="definition"), abs=1e-9)


@pytest.mark.parametrize("k", [1, 3])
@pytest.mark.parametrize("t", [0.2, 1.0, 4.0])
def test_gx_routes_agree_exp(k, t):
    a = ig.gx_invgamma(k, t, EXP, route="formula")
    assert a == pytest.approx(ig.gx_invgamma(k, t, EXP, route="definition"), abs=1e-9)
    with pytest.raises(ValueError):
        ig.gx_invgamma(k, t, EXP, route="fourier")


def test_gx_large_t():
    # {Z/t} = Z/t once t > Z, so t g_2(t) -> E Z_2 = 1
    assert 1000 * ig.gx_invgamma(2, 1000.0, DIRAC) == pytest.approx(1.0, abs=5e-3)
    vals = [ig.gx_invgamma(2, t, DIRAC) for t in (10.0, 100.0, 1000.0)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_gx_bounds_and_errors():
    for t in (0.01, 0.5, 2.0):
        assert 0 < ig.gx_invgamma(3, t, DIRAC) < 1
    with pytest.raises(DomainError):
        ig.gx_invgamma(1, 0.0, DIRAC)
    with pytest.raises(ValueError):
        ig.gx_invgamma(0, 1.0, DIRAC)


def test_rhs_identity_b2_equals_g1_at_one():
    # b_2 = E[R(X_2)/X_2] = int_0^1 E rho(X_2 t) dt, and integrating by parts gives g_1(1)
    assert ig.rhs_entry_invgamma(2, DIRAC).value == pytest.approx(ig.gx_invgamma(1, 1.0, DIRAC), abs=1e-10)
    assert ig.rhs_entry_invgamma(2, EXP).value == pytest.approx(ig.gx_invgamma(1, 1.0, EXP), abs=1e-9)


@pytest.mark.parametrize("spec", [DIRAC, EXP], ids=["dirac", "exp"])
def test_rhs_matches_direct_integral(spec):
    assert ig.rhs_entry_invgamma(3, spec).value == pytest.approx(ig.rhs_entry_chi_direct(3, spec, 1e-8), abs=1e-7)


@settings(max_examples=20)
@given(st.floats(0.01, 0.49))
def test_a_symmetric(u):
    for spec in (DIRAC, EXP):
        assert ig.a_function(u, spec) == pytest.approx(ig.a_function(1 - u, spec), rel=1e-9)


def test_a_domain():
    with pytest.raises(DomainError):
        ig.a_function(0.0, DIRAC)
    with pytest.raises(DomainError):
        ig.a_function(np.array([0.5, 1.0]), EXP)


@pytest.fixture(scope="module")
def dirac_gram():
    return ig.gram_invgamma(8, DIRAC)


def test_bernstein_identities(dirac_gram):
    G = dirac_gram.G
    # int (1-u) A = (1/2) int A by symmetry
    assert G[0, 1] == pytest.approx(G[0, 0] / 2, abs=1e-7)
    # Bernstein partition of unity: each anti-diagonal sums to int A
    for N in range(1, 8):
        assert sum(G[n, N - n] for n in range(N + 1)) == pytest.approx(G[0, 0], abs=1e-6)


def test_gram_entries_against_mellin(dirac_gram):
    M = ig.mellin_system(DIRAC).gram(6)
    E = np.abs(dirac_gram.G[:6, :6] - M.G)
    E[0, 0] = 0.0   # delicate entry
    assert np.max(E) < 1e-5
    assert np.max(np.abs(dirac_gram.b[:6] - M.b)) < 1e-7


def test_delicate_entry_flagged():
    pv = ig.gram_entry_invgamma(0, 0, DIRAC)
    assert pv.route == "bernstein-delicate" and pv.est_error >= 1e-4
    assert ig.InvGammaBasis().delicate == (1, 1)


def test_bruteforce_agrees_off_diagonal():
    a = ig.gram_entry_invgamma(1, 2, EXP).value
    b = ig.gram_entry_bruteforce(1, 2, EXP).value
    assert a == pytest.approx(b, abs=1e-6)


def test_weight_at_zero_and_evenness():
    w0 = ig.mellin_weight_invgamma(0.0, DIRAC)
    expect = abs(complex(zeta_strip(0.5)) * 2 * complex(gamma_complex(0.5))) ** 2
    assert w0 == pytest.approx(expect, rel=1e-12)
    t = np.linspace(0.1, 20, 15)
    for spec in (DIRAC, EXP):
        assert np.allclose(ig.mellin_weight_invgamma(t, spec), ig.mellin_weight_invgamma(-t, spec), rtol=1e-12)


def test_gx_hat_pochhammer_form():
    s = 0.5 + 2j
    a = ig.gx_hat_invgamma(3, s, DIRAC)
    b = -complex(zeta_strip(s)) / s * complex(gamma_complex(3 - s)) / 2
    assert abs(a - b) <= 1e-12 * abs(b)


def test_distance_monotone_dirac(dirac_gram):
    prev = 1.0
    for n in range(1, 9):
        rep = ig.distance_invgamma(n, DIRAC, system=dirac_gram)
        assert 0 < rep.D2 <= prev + 1e-12
        assert abs(rep.D2 - rep.D2_crosscheck) <= max(1e-4, 1e-2 * rep.D2)
        assert "delicate(1,1)" in rep.flags
        assert rep.tail_diag["tail_sum"] <= rep.tail_diag["sum_k_c2"]
        prev = rep.D2


def test_distance_values():
    assert ig.distance_invgamma(1, DIRAC).D2 == pytest.approx(0.89339299, abs=1e-6)
    assert ig.distance_invgamma(2, DIRAC).D2 == pytest.approx(0.4992938, abs=1e-5)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.9])
def test_moment_bound(alpha):
    vals = [k ** alpha * ig.moment_zk(k, alpha, DIRAC) for k in range(1, 51)]
    assert all(v <= math.gamma(1 - alpha) + 1e-12 for v in vals)
    assert vals[-1] == pytest.approx(1.0, abs=0.02)
    assert ig.moment_zk(1, 1.0, DIRAC) == math.inf


def test_first_moment():
    for k in range(2, 51):
        assert k * ig.moment_zk(k, 1.0, DIRAC) == pytest.approx(k / (k - 1), rel=1e-12)
        assert k * ig.moment_zk(k, 1.0, DIRAC) <= 2.0
    assert ig.moment_zk(3, 1.0, RhoSpec.exponential(2.0)) == pytest.approx(0.25, rel=1e-12)

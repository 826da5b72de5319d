import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammainc

from nblab import solver as sv
from nblab.specfun import RhoSpec


def test_identity_system():
    rep = sv.distance_from_system(sv.GramSystem(np.eye(3), [0.1, 0.2, 0.3]))
    assert np.allclose(rep.coefficients, [0.1, 0.2, 0.3])
    assert rep.D2 == pytest.approx(1 - 0.14, abs=1e-15)
    assert rep.condition_estimate == pytest.approx(1.0)


def test_hilbert_2x2():
    H = np.array([[1, 1 / 2], [1 / 2, 1 / 3]])
    c, cond, flags = sv.solve_spd(sv.GramSystem(H, [1, 0]))
    assert np.allclose(c, [4, -6], atol=1e-13)
    assert flags == []
    assert cond > 10


def test_zero_rhs():
    rep = sv.distance_from_system(sv.GramSystem(np.diag([2.0, 3.0]), [0, 0]))
    assert np.all(rep.coefficients == 0) and rep.D2 == 1.0


def test_one_by_one():
    rep = sv.distance_from_system(sv.GramSystem([[4.0]], [1.0]))
    assert rep.coefficients[0] == 0.25 and rep.D2 == 0.75


def test_bad_inputs():
    with pytest.raises(ValueError):
        sv.GramSystem(np.zeros((2, 3)), [0, 0])
    with pytest.raises(ValueError):
        sv.GramSystem(np.eye(2), [0, 0, 0])
    with pytest.raises(ValueError):
        sv.GramSystem([[1.0, 0.5], [0.0, 1.0]], [0, 0])
    with pytest.raises(sv.NotPositiveDefinite):
        sv.solve_spd(sv.GramSystem(np.diag([1.0, -1.0]), [0, 0]))


def test_conditioning_refusal():
    n = 14
    H = 1.0 / (np.arange(n)[:, None] + np.arange(n)[None, :] + 1)
    with pytest.raises(sv.ConditioningError) as ei:
        sv.solve_spd(sv.GramSystem(H, np.ones(n)), max_condition=1e12)
    assert ei.value.condition > 1e12
    rows = sv.distance_table(sv.GramSystem(H, np.ones(n)), max_condition=1e12)
    assert rows[0].status == "ok" and rows[-1].status.startswith("refused")


@settings(max_examples=30)
@given(st.integers(1, 8), st.integers(0, 10 ** 6))
def test_bordered_gram(n, seed):
    """A Gram matrix of n vectors with chi in the ambient space: D2 = ||chi - proj||^2 >= 0."""
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(n + 3, n))
    chi = rng.normal(size=n + 3)
    chi /= np.linalg.norm(chi)
    sys = sv.GramSystem(V.T @ V, V.T @ chi)
    rep = sv.distance_from_system(sys, max_condition=1e16)
    c_ref, *_ = np.linalg.lstsq(V, chi, rcond=None)
    assert rep.D2 == pytest.approx(np.linalg.norm(chi - V @ c_ref) ** 2, abs=1e-9)
    assert 0 <= rep.D2 <= 1


def test_refinement_residual():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(8, 8))
    G = A @ A.T + 1e-3 * np.eye(8)
    b = rng.normal(size=8)
    c, _, _ = sv.solve_spd(sv.GramSystem(G, b))
    assert np.linalg.norm(G @ c - b) <= 1e-10 * np.linalg.norm(b)


def test_clamp_counts():
    before = sv.CLAMP_EVENTS["count"]
    rep = sv.distance_from_system(sv.GramSystem([[1.0]], [1.0 + 1e-15]))
    assert rep.D2 == 0.0 and "clamped" in rep.flags and "negative" not in rep.flags
    assert sv.CLAMP_EVENTS["count"] == before + 1
    rep = sv.distance_from_system(sv.GramSystem([[1.0]], [2.0]))
    assert "negative" in rep.flags


def test_stieltjes_hermite():
    # Gauss-Hermite nodes discretise exp(-x^2); monic Hermite: alpha = 0, beta_j = j/2
    x, w = np.polynomial.hermite.hermgauss(40)
    rec = sv.stieltjes(x, w, 10)
    assert np.allclose(rec.alpha, 0, atol=1e-12)
    assert rec.beta[0] == pytest.approx(math.sqrt(math.pi))
    assert np.allclose(rec.beta[1:], np.arange(1, 10) / 2, rtol=1e-11)
    P = rec.orthonormal(x)
    assert np.allclose((P * w) @ P.T, np.eye(10), atol=1e-11)


def test_stieltjes_truncates_on_small_support():
    rec = sv.stieltjes(np.array([0.0, 1.0, 2.0]), np.ones(3), 6)
    assert rec.truncated_at is not None and rec.n <= 3


def test_tail_diagnostic():
    spec = RhoSpec.dirac()
    assert sv.tail_diagnostic([0.0, 0.0], spec, 5.0)["tail_sum"] == 0.0
    c = [1.0, -2.0, 0.5]
    t = [sv.tail_diagnostic(c, spec, M)["tail_sum"] for M in (1.0, 3.0, 10.0, 100.0)]
    assert all(a > b for a, b in zip(t, t[1:]))
    assert sv.tail_probability(3, spec, 2.0) == pytest.approx(gammainc(3, 0.5), rel=1e-13)
    assert sv.tail_probability(2, RhoSpec.exponential(2.0), 1.5) == pytest.approx(1 / 16)
    assert sv.tail_probability(1, spec, 0.0) == 1.0


def test_report_json():
    rep = sv.distance_from_system(sv.GramSystem(np.eye(2), [0.5, 0.5]))
    d = rep.to_json()
    assert d["D2"] == 0.5 and d["coefficients"] == [0.5, 0.5] and d["status"] == "ok"

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cubeconc.cube import CapacityError, CubePoint, InvalidParameter, NotApplicable
from cubeconc.dist import (
    make_delta_mix,
    make_markov,
    make_product,
    make_random_dense,
    make_random_markov,
    make_random_product,
    make_uniform,
    restrict,
)
from cubeconc.sets import (
    CubeSet,
    alpha_lower_bound,
    concentration_alpha,
    conditional_sup_bounds,
    cosh_factor,
    cubeset_from_json,
    distance_field,
    enlargement,
    hamming_median,
    lipschitz_set_bound,
    median_concentration_check,
    minmax_grid_search,
    minmax_maximizer,
    minmax_value,
    set_distance,
    talagrand_product_baseline,
)

E = math.e
seeds = st.integers(0, 2**32 - 1)


def S(n, *bits):
    return CubeSet.from_points(n, [CubePoint.from_bits(b) for b in bits])


def random_set(n, seed):
    return CubeSet.random(n, np.random.default_rng(seed))


# -- CubeSet ----------------------------------------------------------------------------------


def test_cubeset_basics():
    A = S(3, "000", "101")
    assert len(A) == 2 and CubePoint.from_bits("101") in A and "111" not in A
    assert list(A.indices) == [0, 5]
    assert A.to_hex() == "21"
    assert CubeSet.from_hex(3, "21") == A
    assert cubeset_from_json(A.to_json()) == A
    assert cubeset_from_json({"n": 3, "bitmask_hex": "21"}) == A
    assert CubeSet.full(2).measure(make_uniform(2)) == pytest.approx(1.0)


def test_cubeset_errors():
    with pytest.raises(InvalidParameter):
        CubeSet.from_indices(2, [4])
    with pytest.raises(InvalidParameter):
        set_distance("00", CubeSet.from_indices(2, []))
    with pytest.raises(InvalidParameter):
        enlargement(CubeSet.from_indices(2, []), 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), seeds)
def test_random_set_nonempty_and_roundtrip(n, seed):
    A = random_set(n, seed)
    assert not A.is_empty()
    assert len(A) == int(A.members.sum())
    assert CubeSet.from_hex(n, A.to_hex()) == A


# -- distances and enlargements ----------------------------------------------------------------


def test_set_distance_examples():
    A = S(3, "010", "111")
    assert set_distance("111", A) == 0
    assert set_distance("1101", S(4, "0000")) == 3
    assert set_distance("01", S(2, "00", "11")) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), seeds)
def test_distance_recursion_matches_direct(n, seed):
    A = random_set(n, seed)
    field = distance_field(A)
    direct = [set_distance(CubePoint(n, i), A) for i in range(1 << n)]
    np.testing.assert_array_equal(field, direct)


@pytest.mark.parametrize("seed", range(5))
def test_distance_matches_oracle(seed):
    A = random_set(5, seed)
    pts = [CubePoint(5, i).bits for i in A.indices]
    for x in oracles.points(5):
        assert set_distance(x, A) == oracles.set_distance(x, pts)


def test_enlargement_examples():
    A = S(3, "010", "100")
    assert enlargement(A, 0) == A
    assert enlargement(S(4, "0000"), 4) == CubeSet.full(4)
    assert enlargement(S(2, "00", "01"), 1) == CubeSet.full(2)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), seeds)
def test_enlargement_monotone_and_idempotent(n, seed):
    A = random_set(n, seed)
    prev = enlargement(A, 0)
    assert np.all(prev.members >= A.members)
    for r in range(1, n + 2):
        cur = enlargement(A, r)
        assert np.all(cur.members >= prev.members)
        prev = cur
    assert enlargement(A, n) == CubeSet.full(n)
    assert enlargement(enlargement(A, n), n) == CubeSet.full(n)


def test_enlargement_matches_oracle():
    A = random_set(4, 3)
    pts = [CubePoint(4, i).bits for i in A.indices]
    for r in range(5):
        got = {CubePoint(4, int(i)).bits for i in enlargement(A, r).indices}
        assert got == oracles.enlargement(4, pts, r)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), seeds, seeds)
def test_split_measure_inequality(n, seed, set_seed):
    mu = make_random_dense(n, seed)
    A = random_set(n, set_seed)
    A0, A1 = A.split_last()
    prev = restrict(mu, n - 1)
    c_n = conditional_sup_bounds(mu)[-1]
    assert A.measure(mu) <= c_n * (A0.measure(prev) + A1.measure(prev)) * (1 + 1e-12) + 1e-15


# -- concentration function ----------------------------------------------------------------------


def test_alpha_examples():
    assert concentration_alpha(make_uniform(2), 1) == pytest.approx(0, abs=1e-15)
    assert concentration_alpha(make_delta_mix(2, 0), 0) == pytest.approx(0.5)
    for mu in (make_uniform(3), make_random_dense(3, 1), make_delta_mix(3, 0.2)):
        assert concentration_alpha(mu, 3) == pytest.approx(0, abs=1e-12)
    with pytest.raises(InvalidParameter):
        concentration_alpha(make_uniform(2), -1)


@pytest.mark.parametrize("mu", [
    make_uniform(2), make_uniform(3), make_delta_mix(2, 0), make_delta_mix(3, 0.1),
    make_random_dense(3, 8), make_markov(0.5, [(0.9, 0.2), (0.3, 0.6)]),
], ids=lambda m: f"{m.kind}{m.n}")
def test_alpha_matches_oracle(mu):
    d = oracles.table(mu.probs(), mu.n)
    for r in range(mu.n + 1):
        assert concentration_alpha(mu, r) == pytest.approx(oracles.alpha(d, mu.n, r), abs=1e-12)


def test_alpha_monotone_in_eps():
    mu = make_random_dense(4, 2)
    vals = [concentration_alpha(mu, r) for r in range(5)]
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


def test_alpha_capacity():
    with pytest.raises(CapacityError):
        concentration_alpha(make_uniform(5), 1)


def test_alpha_capacity_env_override(monkeypatch):
    monkeypatch.setenv("CUBECONC_MAX_N", "2")
    with pytest.raises(CapacityError):
        concentration_alpha(make_uniform(3), 1)


def test_alpha_lower_bound_is_below_exact():
    for seed in range(3):
        mu = make_random_dense(4, seed)
        for r in range(3):
            assert alpha_lower_bound(mu, r) <= concentration_alpha(mu, r) + 1e-12
    assert 0 <= alpha_lower_bound(make_delta_mix(8, 0), 1) <= 1


# -- median chain ----------------------------------------------------------------------------


def test_median_examples():
    chk = median_concentration_check(make_uniform(2), "00", 1)
    assert chk.lhs == pytest.approx(1) and chk.rhs == pytest.approx(1) and chk.holds
    chk = median_concentration_check(make_random_dense(3, 4), "011", 3)
    assert chk.lhs == pytest.approx(1) and chk.rhs == pytest.approx(1)
    chk = median_concentration_check(make_delta_mix(2, 0), "00", 0)
    assert chk.rhs == pytest.approx(0) and chk.holds
    assert hamming_median(make_delta_mix(2, 0), "00") == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_median_chain_tiny(n):
    laws = [make_uniform(n), make_random_dense(n, n), make_random_markov(n, n) if n > 1 else make_uniform(1)]
    for mu in laws:
        for idx in range(1 << n):
            for r in range(n + 1):
                assert median_concentration_check(mu, CubePoint(n, idx), r).holds


# -- uniform conditional bound -------------------------------------------------------------------


def test_conditional_sup_examples():
    assert conditional_sup_bounds(make_uniform(5)) == [0.5] * 4
    assert conditional_sup_bounds(make_delta_mix(4, 0)) == [1.0] * 3
    assert conditional_sup_bounds(make_markov(0.5, [(0.8, 0.2)])) == [pytest.approx(0.8)]
    assert conditional_sup_bounds(make_uniform(1)) == []


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), seeds)
def test_conditional_sup_range(n, seed):
    for c in conditional_sup_bounds(make_random_dense(n, seed)):
        assert 0.5 <= c <= 1


@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_lipschitz_base_cases(t):
    mu = make_uniform(1)
    one = lipschitz_set_bound(mu, S(1, "0"), t)
    assert one.lhs == pytest.approx(0.5 + math.exp(t) / 2)
    assert one.mid == pytest.approx(2 * (0.5 + (math.exp(t) + math.exp(-t)) / 4))
    assert one.passed and one.hypothesis_ok
    both = lipschitz_set_bound(mu, CubeSet.full(1), t)
    assert both.lhs == pytest.approx(1.0)
    assert both.mid == pytest.approx(0.5 + (math.exp(t) + math.exp(-t)) / 4)
    assert both.passed


def test_lipschitz_matches_oracle():
    mu = make_markov(0.5, [(0.7, 0.4), (0.2, 0.9), (0.5, 0.6)])
    d = oracles.table(mu.probs(), 4)
    for seed in range(4):
        A = random_set(4, seed)
        pts = [CubePoint(4, i).bits for i in A.indices]
        rep = lipschitz_set_bound(mu, A, 1.0)
        assert rep.lhs == pytest.approx(oracles.set_integral(d, pts, 1.0), rel=1e-12)
        assert rep.c_prod == pytest.approx(math.prod(c * c for c in rep.c))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), seeds, seeds, st.sampled_from([0.5, 1.0, 2.0]))
def test_lipschitz_chain_markov(n, seed, set_seed, t):
    mu = make_random_markov(n, seed, initial_p0=0.5)
    A = random_set(n, set_seed)
    rep = lipschitz_set_bound(mu, A, t)
    assert rep.hypothesis_ok and rep.passed
    assert rep.lhs <= rep.mid * (1 + 1e-9) and rep.mid <= rep.outer * (1 + 1e-9)


def test_lipschitz_hypothesis_violated_is_reported():
    mu = make_product([0.9, 0.5, 0.5])
    rep = lipschitz_set_bound(mu, S(3, "111"), 1.0)
    assert not rep.hypothesis_ok and rep.passed
    with pytest.raises(InvalidParameter):
        lipschitz_set_bound(mu, S(3, "111"), 0)
    with pytest.raises(InvalidParameter):
        lipschitz_set_bound(mu, S(2, "11"), 1.0)


def test_lipschitz_zero_mass_set():
    rep = lipschitz_set_bound(make_delta_mix(3, 0), S(3, "010"), 1.0)
    assert rep.mu_A == 0 and math.isinf(rep.mid) and rep.passed


def test_scalar_inequalities():
    t = np.linspace(1e-4, 5, 20001)
    ch = np.cosh(t)
    assert np.all(0.5 + ch / 2 <= np.exp(t * t / 4))
    for n in range(2, 12):
        assert np.all((2 + 2 * ch) ** (n - 1) <= 4.0 ** (n - 1) * np.exp(t * t * (n - 1) / 4) * (1 + 1e-12))


# -- min-max step ---------------------------------------------------------------------------------


@pytest.mark.parametrize("c_n", [0.5, 0.6, 0.8, 1.0])
@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0, 4.0])
def test_minmax_closed_form_vs_grid(c_n, t):
    exact = minmax_maximizer(c_n, t)
    assert exact.value == pytest.approx(c_n * c_n * cosh_factor(t), rel=1e-14)
    assert float(minmax_value(exact.a0, exact.a1, c_n, t)) == pytest.approx(exact.value, rel=1e-12)
    grid = minmax_grid_search(c_n, t)
    assert abs(grid.a0 - exact.a0) <= 1e-6 and abs(grid.a1 - exact.a1) <= 1e-6
    assert abs(grid.value - exact.value) <= 1e-6


def test_minmax_symmetry():
    v = minmax_value(0.3, 1.4, 0.6, 1.0)
    assert float(v) == pytest.approx(float(minmax_value(1.4, 0.3, 0.6, 1.0)))
    assert math.isinf(float(minmax_value(0.0, 0.0, 0.6, 1.0)))


# -- product-measure baseline ----------------------------------------------------------------------


def test_talagrand_examples():
    chk = talagrand_product_baseline(make_uniform(3), CubeSet.full(3), 1.5)
    assert chk.lhs == pytest.approx(1.0) and chk.bound == pytest.approx(math.exp(1.5**2 * 3 / 4))
    chk = talagrand_product_baseline(make_uniform(4), S(4, "0000"), 1.0)
    assert chk.lhs == pytest.approx(sum(math.comb(4, k) * math.exp(k) for k in range(5)) / 16)
    assert chk.lhs == pytest.approx((1 + E) ** 4 / 16)
    assert chk.bound == pytest.approx(16 * E) and chk.holds
    chk = talagrand_product_baseline(make_uniform(2), S(2, "00", "11"), 1.0)
    assert chk.lhs == pytest.approx((2 + 2 * E) / 4) and chk.bound == pytest.approx(2 * math.exp(0.5))


def test_talagrand_rejects_dependent_laws():
    with pytest.raises(NotApplicable):
        talagrand_product_baseline(make_delta_mix(3, 0), S(3, "000"), 1.0)
    with pytest.raises(NotApplicable):
        talagrand_product_baseline(make_random_dense(3, 0), S(3, "000"), 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), seeds, seeds, st.floats(0.05, 3))
def test_talagrand_holds_for_products(n, seed, set_seed, t):
    mu = make_random_product(n, seed)
    assert talagrand_product_baseline(mu, random_set(n, set_seed), t).holds

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cubeconc.cube import CapacityError, CubePoint, InvalidParameter
from cubeconc.dist import (
    conditional,
    dumps,
    epsilon_table,
    load,
    loads,
    make_delta_mix,
    make_dense,
    make_markov,
    make_product,
    make_random_dense,
    make_random_markov,
    make_uniform,
    marginal,
    restrict,
    save,
)

probs = st.floats(0.0, 1.0, allow_nan=False)


def as_dict(mu):
    return oracles.table(mu.probs(), mu.n)


# -- constructors --------------------------------------------------------------------------


def test_product_examples():
    np.testing.assert_allclose(make_product([0.5, 0.5]).probs(), [0.25] * 4)
    np.testing.assert_array_equal(make_product([1.0, 1.0]).probs(), [1, 0, 0, 0])
    mu = make_product([0.3, 0.6])
    assert mu.probs()[CubePoint.from_bits("01").index] == pytest.approx(0.12, abs=1e-15)


def test_product_rejects_bad_probability():
    with pytest.raises(InvalidParameter):
        make_product([0.5, 1.2])


def test_delta_mix_examples():
    np.testing.assert_array_equal(make_delta_mix(3, 0).probs(), [0.5, 0, 0, 0, 0, 0, 0, 0.5])
    p = make_delta_mix(3, 0.1).probs()
    assert p[0] == pytest.approx(0.4) and p[7] == 0.5
    np.testing.assert_allclose(p[1:7], 0.1 / 6, rtol=1e-15)
    np.testing.assert_allclose(make_delta_mix(2, 0.2).probs(), [0.3, 0.1, 0.1, 0.5], atol=1e-15)


@pytest.mark.parametrize("n, eps", [(3, 0.5), (3, 0.7), (1, 0.1), (3, -0.1)])
def test_delta_mix_errors(n, eps):
    with pytest.raises(InvalidParameter):
        make_delta_mix(n, eps)


def test_markov_examples():
    np.testing.assert_array_equal(make_markov(0.5, [(1, 0)]).probs(), make_delta_mix(2, 0).probs())
    np.testing.assert_allclose(make_markov(0.5, [(0.5, 0.5)]).probs(), [0.25] * 4)
    np.testing.assert_allclose(make_markov(0.5, [(0.8, 0.2)]).probs(), [0.4, 0.1, 0.1, 0.4])
    with pytest.raises(InvalidParameter):
        make_markov(0.5, [(0.8, 1.5)])
    with pytest.raises(InvalidParameter):
        make_markov(-0.1, [(0.8, 0.5)])


def test_random_dense():
    a = make_random_dense(1, 3).probs()
    assert a.shape == (2,) and np.all(a >= 0) and a.sum() == pytest.approx(1, abs=1e-15)
    np.testing.assert_array_equal(make_random_dense(5, 11).probs(), make_random_dense(5, 11).probs())
    assert np.all(make_random_dense(3, 42).probs() > 0)
    with pytest.raises(CapacityError):
        make_random_dense(13, 0)


def test_dense_validation():
    with pytest.raises(InvalidParameter):
        make_dense([0.5, 0.6])
    with pytest.raises(InvalidParameter):
        make_dense([0.5, 0.25, 0.25])
    with pytest.raises(InvalidParameter):
        make_dense([1.5, -0.5])


def test_dense_is_immutable():
    mu = make_random_dense(3, 0)
    with pytest.raises(ValueError):
        mu.probs()[0] = 1.0


# -- marginals and conditionals ------------------------------------------------------------


def test_marginal_examples():
    assert marginal(make_uniform(3), 2) == (0.5, 0.5)
    assert marginal(make_delta_mix(3, 0), 1) == (0.5, 0.5)
    assert marginal(make_markov(0.5, [(0.8, 0.2)]), 2).p0 == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(InvalidParameter):
        marginal(make_uniform(3), 4)


def test_conditional_examples():
    mu = make_product([0.3, 0.6, 0.9])
    for prefix in ["00", "01", "10", "11"]:
        row = conditional(mu, 3, prefix)
        assert row.defined and row.p0 == pytest.approx(0.9)
    row = conditional(make_delta_mix(2, 0), 2, "0")
    assert row.p0 == 1.0 and row.p1 == 0.0
    assert epsilon_table(make_delta_mix(2, 0), 2).entry(CubePoint.from_bits("0"), 0) == 0.5
    with pytest.raises(InvalidParameter):
        conditional(mu, 3, "0")


def test_conditional_undefined_prefix():
    row = conditional(make_delta_mix(3, 0), 3, "01")
    assert not row.defined
    tab = epsilon_table(make_delta_mix(3, 0), 3)
    assert not tab.defined[1] and math.isnan(tab.eps0[1])
    assert tab.sup_norm() == 0.5


def test_epsilon_examples():
    tab = epsilon_table(make_delta_mix(2, 0), 2)
    pt = CubePoint.from_bits
    assert tab.entry(pt("0"), 0) == 0.5 and tab.entry(pt("0"), 1) == -0.5
    assert tab.entry(pt("1"), 0) == -0.5 and tab.entry(pt("1"), 1) == 0.5
    for k in range(2, 5):
        assert np.all(epsilon_table(make_product([0.2, 0.7, 0.4, 0.9]), k).eps0 == 0)


# -- invariants against brute force ----------------------------------------------------------


def _all_laws():
    yield make_random_dense(4, 1)
    yield make_random_dense(5, 2)
    yield make_product([0.2, 0.7, 0.4, 0.9, 0.5])
    yield make_markov(0.3, [(0.8, 0.1), (0.05, 0.95), (1.0, 0.0)])
    yield make_delta_mix(4, 0.0)
    yield make_delta_mix(5, 0.13)


@pytest.mark.parametrize("mu", list(_all_laws()), ids=lambda m: f"{m.kind}{m.n}")
def test_marginals_conditionals_eps_against_oracle(mu):
    d = as_dict(mu)
    assert sum(d.values()) == pytest.approx(1, abs=1e-12)
    for k in range(1, mu.n + 1):
        assert marginal(mu, k).p0 == pytest.approx(oracles.marginal0(d, k), abs=1e-12)
    for k in range(2, mu.n + 1):
        tab = epsilon_table(mu, k)
        cond_mean = 0.0
        for pre in oracles.points(k - 1):
            ref = oracles.conditional0(d, pre)
            row = conditional(mu, k, pre)
            i = oracles.index_of(pre)
            if ref is None:
                assert not row.defined and not tab.defined[i]
                continue
            assert row.defined
            assert row.p0 == pytest.approx(ref, abs=1e-12)
            assert row.p0 + row.p1 == pytest.approx(1, abs=1e-12)
            cond_mean += row.p0 * oracles.prefix_mass(d, pre)
            for b in (0, 1):
                assert tab.values(b)[i] == pytest.approx(oracles.eps(d, pre, b), abs=1e-12)
        assert cond_mean == pytest.approx(marginal(mu, k).p0, abs=1e-12)
        assert tab.weighted_mean(0) == pytest.approx(0, abs=1e-12)
        assert tab.weighted_mean(1) == pytest.approx(0, abs=1e-12)
        # sign flip is exact, not approximate
        ok = tab.defined
        assert np.array_equal(tab.values(0)[ok] + tab.values(1)[ok], np.zeros(ok.sum()))


@pytest.mark.parametrize("mu", list(_all_laws()), ids=lambda m: f"{m.kind}{m.n}")
def test_prefix_marginalization_consistent(mu):
    tables = mu.prefix_tables()
    d = as_dict(mu)
    for k in range(1, mu.n + 1):
        t = tables[k]
        np.testing.assert_allclose(t[0::2] + t[1::2], tables[k - 1], atol=1e-12)
        for pre in oracles.points(k):
            assert t[oracles.index_of(pre)] == pytest.approx(oracles.prefix_mass(d, pre), abs=1e-12)


def test_generator_closed_forms_match_oracle():
    p0 = [0.1, 0.6, 0.35, 0.8]
    assert oracles.table(make_product(p0).probs(), 4) == pytest.approx(oracles.product_table(p0), abs=1e-15)
    rows = [(0.8, 0.1), (0.05, 0.95), (0.3, 0.6)]
    assert oracles.table(make_markov(0.3, rows).probs(), 4) == pytest.approx(oracles.markov_table(0.3, rows), abs=1e-15)
    assert oracles.table(make_delta_mix(4, 0.2).probs(), 4) == pytest.approx(oracles.delta_mix_table(4, 0.2), abs=1e-15)


@pytest.mark.parametrize("mu", [
    make_product([0.1, 0.6, 0.35, 0.8, 0.5, 0.99]),
    make_random_markov(9, 3, initial_p0=0.2),
    make_delta_mix(8, 0.3),
    make_delta_mix(12, 0.0),
], ids=lambda m: m.kind)
def test_generator_dense_equivalence(mu):
    dense = make_dense(mu.probs())
    for k in range(1, mu.n + 1):
        assert mu.marginal0(k) == pytest.approx(dense.marginal0(k), abs=1e-12)
        prefixes = np.arange(1 << k)
        np.testing.assert_allclose(mu.prefix_mass(k, prefixes), dense.prefix_mass(k, prefixes), atol=1e-12)
    for k in range(2, mu.n + 1):
        a, b = epsilon_table(mu, k), epsilon_table(dense, k)
        np.testing.assert_array_equal(a.defined, b.defined)
        np.testing.assert_allclose(a.eps0[a.defined], b.eps0[b.defined], atol=1e-12)


def test_restrict_matches_prefix_table():
    mu = make_random_dense(6, 4)
    r = restrict(mu, 3)
    assert r.n == 3
    np.testing.assert_array_equal(r.probs(), mu.prefix_tables()[3])


@settings(max_examples=40, deadline=None)
@given(st.lists(probs, min_size=2, max_size=8))
def test_product_eps_vanishes(p0):
    mu = make_product(p0)
    for k in range(2, mu.n + 1):
        tab = epsilon_table(mu, k)
        assert tab.sup_norm() <= 1e-15


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_random_dense_determinism(n, seed):
    assert np.array_equal(make_random_dense(n, seed).probs(), make_random_dense(n, seed).probs())


# -- JSON ------------------------------------------------------------------------------------


@pytest.mark.parametrize("mu", list(_all_laws()), ids=lambda m: f"{m.kind}{m.n}")
def test_json_roundtrip(mu, tmp_path):
    path = tmp_path / "mu.json"
    save(mu, path)
    back = load(path)
    assert back.kind == mu.kind and back.n == mu.n
    np.testing.assert_array_equal(back.probs(), mu.probs())


def test_json_layout_and_digits():
    text = dumps(make_product([0.1, 1 / 3]))
    data = json.loads(text)
    assert data == {"n": 2, "kind": "product", "params": {"p0": [0.1, 1 / 3]}}
    assert "0.10000000000000001" in text and "0.33333333333333331" in text
    dense = json.loads(dumps(make_random_dense(2, 0)))
    assert dense["kind"] == "dense" and len(dense["probs"]) == 4


def test_json_errors():
    with pytest.raises(InvalidParameter):
        loads('{"n": 2, "kind": "weird"}')
    with pytest.raises(InvalidParameter):
        loads('{"n": 3, "kind": "product", "params": {"p0": [0.5, 0.5]}}')

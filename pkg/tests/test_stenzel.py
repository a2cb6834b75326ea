import numpy as np
import pytest
import scipy.linalg

import oracles
from malab.chart import flat_J, sample_points
from malab.errors import ChartError
from malab.lie import bracket
from malab.stenzel import (J_in_chart, StenzelModel, TangentRep, _operators,
                           canonical_rep, chart_condition, chart_tangent_basis, gauge_basis,
                           gauge_distance, nijenhuis_max, stenzel_J, translate_point)
from malab.symmetric import build_pair

PAIRS = ["sphere(2)", "sphere(3)", "rproj(2)", "cproj(1)"]


@pytest.mark.parametrize("name", ["sphere(2)", "sphere(3)", "cproj(1)", "rproj(3)"])
def test_J_matches_frozen_embedding_oracle(name, frozen):
    rec = frozen["J"][name]
    Jm = J_in_chart(build_pair(name), np.array(rec["point"]))
    assert np.max(np.abs(Jm - np.array(rec["matrix"]))) < 1e-8


@pytest.mark.parametrize("name", PAIRS)
def test_J_makes_embedding_holomorphic(name, rng):
    pair = build_pair(name)
    F = oracles.embedding(pair)
    for _ in range(3):
        p = rng.uniform(-0.4, 0.4, 2 * pair.n)
        DF = oracles.embedding_jacobian(F, p)
        assert np.max(np.abs(DF @ J_in_chart(pair, p) - 1j * DF)) < 1e-9


@pytest.mark.parametrize("name", PAIRS)
def test_chart_basis_matches_group_derivative(name, rng):
    pair = build_pair(name)
    p = rng.uniform(-0.5, 0.5, 2 * pair.n)
    basis = chart_tangent_basis(pair, p)
    for i in range(pair.n):
        assert np.max(np.abs(oracles.chart_left_derivative(pair, p[:pair.n], i) - basis[i].Y)) < 1e-8


def test_origin_is_flat():
    for name in PAIRS:
        pair = build_pair(name)
        assert np.max(np.abs(J_in_chart(pair, np.zeros(2 * pair.n)) - flat_J(pair.n))) < 1e-14


@pytest.mark.parametrize("name", PAIRS)
def test_square_and_gauge(name, rng):
    model = StenzelModel(name)
    pair = model.pair
    for p in sample_points(model, rng, 10):
        Jm = J_in_chart(pair, p)
        assert np.max(np.abs(Jm @ Jm + np.eye(model.dim))) < 1e-9
        X = pair.P @ p[pair.n:]
        for w in chart_tangent_basis(pair, p):
            W = pair.K @ rng.standard_normal(pair.k_sub.dim)
            shifted = TangentRep(w.Y + W, w.V - bracket(pair.algebra, W, X))
            assert gauge_distance(pair, X, stenzel_J(pair, X, w), stenzel_J(pair, X, shifted)) < 1e-10


def test_gauge_vectors_are_zero_modulo_gauge():
    pair = build_pair("sphere(3)")
    X = pair.P @ np.array([0.3, -0.2, 0.4])
    G = gauge_basis(pair, X)
    d = pair.algebra.dim
    for i in range(G.shape[1]):
        w = canonical_rep(pair, X, TangentRep(G[:d, i], G[d:, i]))
        assert np.max(np.abs(w.stacked())) < 1e-12


def test_wrong_T_factor_breaks_J_squared():
    # a gauge shift leaves ad_X Y^k - V unchanged, so the prefactor is only
    # detected by J^2 = -1 modulo gauge
    pair = build_pair("sphere(2)")
    X = pair.P @ np.array([0.5, 0.7])
    adX, T, _ = _operators(pair, X)

    def J_wrong(w):
        return TangentRep(T @ (adX @ (pair.Pk @ w.Y) - w.V), T @ (pair.Pp @ w.Y))

    worst_ok, worst_bad = 0.0, 0.0
    for w in chart_tangent_basis(pair, np.concatenate([[0.2, -0.1], [0.5, 0.7]])):
        worst_ok = max(worst_ok, gauge_distance(pair, X, stenzel_J(pair, X, stenzel_J(pair, X, w)), -w))
        worst_bad = max(worst_bad, gauge_distance(pair, X, J_wrong(J_wrong(w)), -w))
    assert worst_ok < 1e-12
    assert worst_bad > 1e-2


@pytest.mark.parametrize("name", ["sphere(2)", "cproj(1)"])
def test_nijenhuis_second_order(name, rng):
    model = StenzelModel(name)
    p = sample_points(model, rng, 1)[0]
    r1, r2 = nijenhuis_max(model, p, 2e-3), nijenhuis_max(model, p, 1e-3)
    assert r2 < 1e-4
    assert 3 <= r1 / r2 <= 5


@pytest.mark.parametrize("name", ["sphere(2)", "sphere(3)", "cproj(1)"])
def test_equivariance_under_translation(name, rng):
    pair = build_pair(name)
    g = scipy.linalg.expm(pair.algebra.to_matrix(0.3 * rng.standard_normal(pair.algebra.dim)))
    p = rng.uniform(-0.3, 0.3, 2 * pair.n)
    q = translate_point(pair, g, p)
    D = oracles.translation_jacobian(pair, g, p)
    lhs = J_in_chart(pair, q, radius=np.inf) @ D
    rhs = D @ J_in_chart(pair, p)
    assert np.max(np.abs(lhs - rhs)) < 1e-7
    # the action preserves tau = -B(v, v)
    assert q[pair.n:] @ q[pair.n:] == pytest.approx(p[pair.n:] @ p[pair.n:], rel=1e-10)


def test_chart_radius_and_condition(rng):
    model = StenzelModel("sphere(2)")
    with pytest.raises(ChartError):
        chart_tangent_basis(model.pair, np.array([1.5, 0.0, 0.1, 0.1]))
    assert chart_condition(model, sample_points(model, rng, 5)) < 1e3
    assert not model.in_chart(np.array([0.9, 0.0, 0.1, 0.0]), margin=0.2)

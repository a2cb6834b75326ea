import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from malab.errors import UnsupportedModelError
from malab.lie import (AD_FUNCTIONS, Subspace, ad_matrix, analytic_ad, analytic_ads, bracket,
                       build_algebra, jacobi_residual, orth_complement, span_distance)

ALGEBRAS = ["so(3)", "so(4)", "so(5)", "so(6)", "su(2)", "su(3)", "su(4)"]


@pytest.mark.parametrize("name", ALGEBRAS)
def test_killing_matches_trace_identity(name):
    L = build_algebra(name)
    assert np.max(np.abs(L.killing - oracles.killing_by_trace(L))) < 1e-12


@pytest.mark.parametrize("name", ALGEBRAS)
def test_killing_is_scalar_in_the_basis(name, frozen):
    L = build_algebra(name)
    c = frozen["killing_diag"][name]
    assert np.allclose(L.killing, c * np.eye(L.dim), atol=1e-12)
    assert np.linalg.eigvalsh(L.killing)[-1] < 0


@pytest.mark.parametrize("name", ["so(4)", "su(3)"])
def test_structure_constants_reproduce_commutators(name, rng):
    L = build_algebra(name)
    X, Y = rng.standard_normal((2, L.dim))
    lhs = L.to_matrix(bracket(L, X, Y))
    A, B = L.to_matrix(X), L.to_matrix(Y)
    assert np.max(np.abs(lhs - (A @ B - B @ A))) < 1e-12
    assert np.allclose(L.from_matrix(L.to_matrix(X)), X)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9))
def test_jacobi_identity(xs):
    L = build_algebra("so(3)")
    X, Y, W = np.reshape(xs, (3, 3))
    assert jacobi_residual(L, X, Y, W) < 1e-12


@pytest.mark.parametrize("fn", ["cos", "sinc", "dexp"])
@pytest.mark.parametrize("name", ["so(4)", "su(2)", "su(3)"])
def test_spectral_calculus_matches_power_series(name, fn, rng):
    L = build_algebra(name)
    X = 0.7 * rng.standard_normal(L.dim)
    ref = oracles.ad_series(ad_matrix(L, X), fn)
    assert np.max(np.abs(analytic_ad(L, X, fn) - ref)) < 1e-11


def test_T_and_inverse(rng):
    L = build_algebra("so(5)")
    X = 0.6 * rng.standard_normal(L.dim)
    T, Ti = analytic_ads(L, X, ("T", "T_inv"))
    assert np.max(np.abs(T - oracles.T_series(ad_matrix(L, X)))) < 1e-10
    assert np.max(np.abs(T @ Ti - np.eye(L.dim))) < 1e-12


def test_functions_at_zero_and_tiny_arguments():
    L = build_algebra("su(2)")
    for fn in AD_FUNCTIONS:
        assert np.allclose(analytic_ad(L, np.zeros(L.dim), fn), np.eye(L.dim))
        tiny = analytic_ad(L, np.full(L.dim, 1e-9), fn)
        assert np.all(np.isfinite(tiny))


def test_unknown_function_id():
    with pytest.raises(ValueError):
        analytic_ad(build_algebra("so(3)"), np.ones(3), "tan")


@pytest.mark.parametrize("spec", ["so(2)", "so(7)", "su(5)", "sp(2)", "nonsense"])
def test_unsupported_algebras(spec):
    with pytest.raises(UnsupportedModelError):
        build_algebra(spec)


def test_subspaces():
    L = build_algebra("so(4)")
    E = np.eye(L.dim)
    S = Subspace.span(L, np.column_stack([E[:, 0], E[:, 1], E[:, 0] + E[:, 1]]))
    assert S.dim == 2
    C = orth_complement(L, S)
    assert C.dim == L.dim - 2
    assert span_distance(L, S + C, Subspace(L, E)) < 1e-12
    assert span_distance(L, S, C) == pytest.approx(np.pi / 2)
    P = S.projector()
    assert np.allclose(P @ P, P)

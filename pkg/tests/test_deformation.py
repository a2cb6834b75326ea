import csv

import numpy as np
import pytest

from malab.chart import flat_J, sample_points
from malab.errors import NumericalDegeneracyError, PremiseViolation
from malab.euclidean import EuclideanModel
from malab.deformation import (DeformedStructure, boundedness_probe, conj_bump_map,
                               cr_residual_grid, deformation_tensor, eigenspace_split,
                               export_phi, identity_map, leafwise_cr_residual,
                               leafwise_rotation, premise_residual, require_leaf_premise,
                               unitary_map)
from malab.foliation import solve_Z


@pytest.fixture(scope="module")
def flat():
    return EuclideanModel(2)


def _unitary(n, rng):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return Q


def test_flat_eigenspace_split():
    H10, H01 = eigenspace_split(flat_J(2))
    J = flat_J(2)
    assert np.allclose(J @ H10, 1j * H10) and np.allclose(J @ H01, -1j * H01)
    assert np.allclose(H10, H01.conj())


def test_eigenspace_split_rejects_non_invariant_subspace():
    with pytest.raises(NumericalDegeneracyError):
        eigenspace_split(flat_J(2), np.eye(4)[:, :2])


@pytest.mark.parametrize("cmap", ["rotation", "bump"])
def test_analytic_jacobians_match_differences(flat, cmap, rng):
    m = leafwise_rotation(2) if cmap == "rotation" else conj_bump_map(2)
    p = rng.standard_normal(4)
    fd = DeformedStructure(flat, m.__call__, jacobian=None, fd_step=1e-6).jacobian(p)
    assert np.max(np.abs(m.jacobian(p) - fd)) < 1e-8


def test_phi_vanishes_for_holomorphic_maps(flat, rng):
    pts = sample_points(flat, rng, 10, delta=0.2)
    for cmap in (identity_map(2), unitary_map(_unitary(2, rng))):
        d = DeformedStructure(flat, cmap)
        for p in pts:
            s = deformation_tensor(flat, d, p)
            assert s.regular
            assert np.max(np.abs(s.phi)) < 1e-12


def test_phi_zero_iff_structures_agree_on_normal_part(flat, rng):
    for cmap in (unitary_map(_unitary(2, rng)), leafwise_rotation(2)):
        d = DeformedStructure(flat, cmap)
        p = sample_points(flat, rng, 1, delta=0.3)[0]
        Hb = solve_Z(flat, p).Hbasis
        diff = float(np.max(np.abs((d.Jprime(p) - flat.J(p)) @ Hb)))
        phi = float(np.max(np.abs(deformation_tensor(flat, d, p).phi)))
        assert (diff < 1e-10) == (phi < 1e-10)


def test_rotation_phi_is_leaf_valued(flat, rng):
    d = DeformedStructure(flat, leafwise_rotation(2))
    assert d.square_defect(np.array([0.3, 0.2, -0.1, 0.4])) < 1e-12
    for p in sample_points(flat, rng, 5, delta=0.2):
        s = deformation_tensor(flat, d, p)
        assert s.phi.shape == (2, 1)
        assert np.max(np.abs(s.phi_normal)) < 1e-10
        assert abs(s.phi_leaf[0]) > 1e-3


def test_premise_rejects_non_leaf_holomorphic_map(flat, rng):
    pts = sample_points(flat, rng, 5, delta=0.2)
    d = DeformedStructure(flat, conj_bump_map(2))
    assert premise_residual(flat, d, pts[0]) > 1e-8
    with pytest.raises(PremiseViolation):
        require_leaf_premise(flat, d, pts)
    with pytest.raises(PremiseViolation):
        deformation_tensor(flat, d, pts[0])
    s = deformation_tensor(flat, d, pts[0], check_premise=False)
    assert s.regular and s.premise > 1e-8


def test_regular_neighbourhoods(flat):
    d = DeformedStructure(flat, leafwise_rotation(2))
    p = np.array([0.4, -0.2, 0.1, 0.3])
    a = deformation_tensor(flat, d, p)
    b = deformation_tensor(flat, d, p + 1e-4)
    assert a.regular and b.regular and a.condition < 10
    # the H^{01} frame is only fixed up to a phase; compare frame-free data
    assert abs(abs(a.phi_leaf[0]) - abs(b.phi_leaf[0])) < 1e-3


def test_cr_grid_is_second_order():
    def grid(f, h):
        k = np.arange(-3, 4) * h
        S, T = np.meshgrid(k, k, indexing="ij")
        return f(0.3 + S + 1j * (0.1 + T))

    # quadratics are differentiated exactly by central differences
    assert cr_residual_grid(grid(lambda z: z**2, 0.05), 0.05, 0.05) < 1e-13
    # for a general holomorphic function the residual is pure O(h^2) error
    r1 = cr_residual_grid(grid(np.exp, 0.02), 0.02, 0.02)
    r2 = cr_residual_grid(grid(np.exp, 0.01), 0.01, 0.01)
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)
    assert cr_residual_grid(grid(np.conj, 0.1), 0.1, 0.1) == pytest.approx(1.0)


@pytest.mark.slow
def test_leafwise_field_is_holomorphic_and_bounded(flat):
    d = DeformedStructure(flat, leafwise_rotation(2))
    seed = np.array([0.3, 0.4, -0.2, 0.1])
    res, fld = leafwise_cr_residual(flat, d, seed)
    assert res < 1e-5
    assert fld.frame_drift < 1e-6
    probe = boundedness_probe(flat, d, seed, field=fld)
    assert probe["variation"] < 1e-6
    assert probe["nodes"] == 25
    assert 1e-3 < probe["sup_norm"] < 10


def test_export_phi(flat, rng, tmp_path):
    d = DeformedStructure(flat, leafwise_rotation(2))
    samples = [deformation_tensor(flat, d, p) for p in sample_points(flat, rng, 3, delta=0.2)]
    path = tmp_path / "phi.csv"
    export_phi(samples, path)
    rows = list(csv.reader(path.open()))
    assert len(rows) == 3
    assert len(rows[0]) == 4 + 2 + 2 * 2
    assert rows[0][4] == "1"

import numpy as np
import pytest

from checkernet import (GridTooSmallError, InconsistentCheckerboardError, QuadNet,
                        Tolerances, build_checkerboard, classify, face_edge_vectors,
                        reconstruct_control)
from checkernet._geometry import plane_deviation

from conftest import moebius_grid_net, random_conjugate_net, random_net


def unit_square_net():
    return QuadNet(np.array([[[0.0, 0, 0], [0, 1, 0]], [[1, 0, 0], [1, 1, 0]]]))


def square_grid(n, eps=1.0):
    f = np.zeros((n, n, 3))
    f[..., 0] = eps * np.arange(n)[:, None]
    f[..., 1] = eps * np.arange(n)[None, :]
    return QuadNet(f)


class TestBuildCheckerboard:
    def test_single_face_midpoints(self):
        cbp = build_checkerboard(unit_square_net())
        expected = np.array([[0.5, 0, 0], [1, 0.5, 0], [0.5, 1, 0], [0, 0.5, 0]])
        assert np.allclose(cbp.black_face(0, 0), expected, atol=0)

    def test_black_faces_are_exact_parallelograms(self, rng):
        net = random_net(5, 6, rng)
        faces = build_checkerboard(net).black_faces().reshape(-1, 4, 3)
        gap = (faces[:, 1] - faces[:, 0]) - (faces[:, 2] - faces[:, 3])
        diam = np.linalg.norm(faces[:, 2] - faces[:, 0], axis=1)
        assert (np.linalg.norm(gap, axis=1) <= 1e-14 * diam).all()

    def test_black_edges_parallel_to_diagonals(self):
        f = np.zeros((3, 3, 3))
        for k in range(3):
            for l in range(3):
                f[k, l] = (k, l, k * l)
        cbp = build_checkerboard(QuadNet(f))
        du, dv = face_edge_vectors(cbp, (0, 0))
        d1 = f[1, 1] - f[0, 0]   # (1, 1, 1)
        d2 = f[0, 1] - f[1, 0]   # (-1, 1, 1)... here: (0,1,0)-(1,0,0)
        assert np.linalg.norm(np.cross(du, d1)) < 1e-14
        assert np.linalg.norm(np.cross(dv, d2)) < 1e-14
        assert np.allclose(du * np.sqrt(2), d1)

    def test_grid_too_small(self):
        with pytest.raises(GridTooSmallError):
            QuadNet(np.zeros((1, 5, 3)))


class TestReconstructControl:
    def test_round_trip_with_original_seed(self, rng):
        net = random_net(5, 5, rng)
        cbp = build_checkerboard(net)
        back = reconstruct_control(cbp, seed=net.vertices[0, 0])
        scale = np.abs(net.vertices).max()
        assert np.abs(back.vertices - net.vertices).max() <= 1e-12 * scale

    def test_shifted_seed_gives_same_checkerboard(self, rng):
        net = random_net(5, 5, rng)
        cbp = build_checkerboard(net)
        other = reconstruct_control(cbp, seed=net.vertices[0, 0] + np.array([1.0, 2, 3]))
        assert np.abs(other.vertices - net.vertices).max() > 0.5
        cbp2 = build_checkerboard(other)
        assert np.allclose(cbp2.hmid, cbp.hmid, atol=1e-12)
        assert np.allclose(cbp2.vmid, cbp.vmid, atol=1e-12)

    def test_perturbed_pattern_reports_disagreement(self, rng):
        net = random_net(5, 5, rng)
        cbp = build_checkerboard(net)
        hm = cbp.hmid.copy()
        hm[2, 2] += 0.1
        from checkernet import Checkerboard
        bad = Checkerboard(hmid=hm, vmid=cbp.vmid)
        with pytest.raises(InconsistentCheckerboardError) as exc:
            reconstruct_control(bad, seed=net.vertices[0, 0])
        assert exc.value.max_disagreement > 0.05

    def test_smooth_seed_default(self, rng):
        net = random_net(6, 6, rng, amp=0.05)
        cbp = build_checkerboard(net)
        back = reconstruct_control(cbp)
        cbp2 = build_checkerboard(back)
        assert np.allclose(cbp2.hmid, cbp.hmid, atol=1e-12)


class TestFaceEdgeVectors:
    def test_unit_grid(self):
        cbp = build_checkerboard(square_grid(3))
        du, dv = face_edge_vectors(cbp, (0, 0))
        s = 1 / np.sqrt(2)
        assert np.allclose(du, [s, s, 0])
        assert np.allclose(dv, [-s, s, 0])

    def test_scaling(self):
        eps = 0.37
        cbp = build_checkerboard(square_grid(3, eps))
        du, _ = face_edge_vectors(cbp, (1, 1))
        assert np.isclose(np.linalg.norm(du), eps)

    def test_derivative_convergence_on_paraboloid(self):
        # du/eps approximates the diagonal directional derivative of
        # phi(x, y) = (x, y, (x^2+y^2)/2) at the face midpoint to second order
        def phi(x, y):
            return np.array([x, y, 0.5 * (x * x + y * y)])

        def d_u(x, y):
            # derivative along (1,1)/sqrt(2)
            return np.array([1, 1, x + y]) / np.sqrt(2)

        errs = []
        for eps in (0.1, 0.05):
            f = np.zeros((4, 4, 3))
            for k in range(4):
                for l in range(4):
                    f[k, l] = phi(eps * k, eps * l)
            cbp = build_checkerboard(QuadNet(f))
            du, _ = face_edge_vectors(cbp, (1, 1))
            mid = d_u(eps * 1.5, eps * 1.5)
            errs.append(np.linalg.norm(du / eps - mid))
        assert errs[0] <= 0.05 * 0.1 ** 2 * 100  # O(eps^2) headroom
        assert 2.5 <= errs[0] / errs[1] <= 6.0   # halves like eps^2


class TestClassify:
    def test_planar_square_grid_principal(self):
        cls = classify(build_checkerboard(square_grid(4)))
        assert cls.orthogonal and cls.conjugate and cls.principal
        assert cls.orthogonality_residual == 0.0
        assert cls.planarity_residual == 0.0

    def test_sheared_grid_conjugate_not_orthogonal(self):
        f = np.zeros((4, 4, 3))
        for k in range(4):
            for l in range(4):
                f[k, l] = (k + 0.3 * l, l, 0)
        cls = classify(build_checkerboard(QuadNet(f)))
        assert cls.conjugate and not cls.orthogonal
        # <du, dv> = ((1.3,1,0).(-0.7,1,0))/2 = 0.045 per face
        expected = 0.09 / (np.linalg.norm([1.3, 1, 0]) * np.linalg.norm([-0.7, 1, 0]))
        assert np.isclose(cls.orthogonality_residual, expected, rtol=1e-12)

    def test_cylinder_sample_nearly_principal(self):
        eps = 5e-5
        f = np.zeros((4, 4, 3))
        for k in range(4):
            for l in range(4):
                f[k, l] = (np.cos(eps * k), np.sin(eps * k), eps * l)
        cls = classify(build_checkerboard(QuadNet(f)), Tolerances(tol_orth=1e-9, tol_plan=1e-9))
        assert cls.principal
        # residuals shrink like eps^2
        eps2 = 2 * eps
        g = np.zeros((4, 4, 3))
        for k in range(4):
            for l in range(4):
                g[k, l] = (np.cos(eps2 * k), np.sin(eps2 * k), eps2 * l)
        cls2 = classify(build_checkerboard(QuadNet(g)))
        assert cls2.orthogonality_residual > 3.0 * cls.orthogonality_residual

    def test_rigid_motion_invariance(self, rng):
        from checkernet._geometry import random_rotation
        net = random_net(5, 5, rng)
        cls = classify(build_checkerboard(net))
        rot = random_rotation(rng)
        moved = QuadNet(net.vertices @ rot.T + np.array([3.0, -1.0, 2.0]))
        cls2 = classify(build_checkerboard(moved))
        assert abs(cls.orthogonality_residual - cls2.orthogonality_residual) <= 1e-12
        assert abs(cls.planarity_residual - cls2.planarity_residual) <= 1e-12

    def test_conjugacy_matches_diagonal_net_planarity(self, rng):
        for net in (random_net(5, 5, rng), random_conjugate_net(5, 5, rng)):
            cls = classify(build_checkerboard(net))
            v = net.vertices
            worst = 0.0
            for k in range(1, 4):
                for l in range(1, 4):
                    ring = np.stack([v[k + 1, l], v[k, l + 1], v[k - 1, l], v[k, l - 1]])
                    worst = max(worst, plane_deviation(ring) / np.linalg.norm(
                        ring.max(axis=0) - ring.min(axis=0)))
            assert (worst < 1e-12) == cls.conjugate

    def test_exact_conjugate_generator(self, rng):
        cls = classify(build_checkerboard(random_conjugate_net(7, 7, rng)))
        assert cls.conjugate
        assert cls.planarity_residual <= 1e-13

    def test_moebius_grid_exactly_principal(self, rng):
        net = moebius_grid_net(rng)
        cls = classify(build_checkerboard(net))
        assert cls.principal
        assert max(cls.orthogonality_residual, cls.planarity_residual) <= 1e-10

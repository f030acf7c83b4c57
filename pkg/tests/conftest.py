"""Shared net generators for the test suite.

Exactly conjugate nets come from plane-constrained propagation (a vertex's
four neighbors must be coplanar), exactly principal/isothermic nets from
Moebius transforms of square grids, exact Koenigs nets from commuting
projective maps, and exact on-sphere Gauss nets from transforming a planar
grid congruence by the inversion that carries the plane onto the unit sphere.
"""

from __future__ import annotations

import numpy as np
import pytest

from checkernet import (MoebiusTransform, QuadNet, SampleSpec, apply_moebius,
                        build_congruence, generate, koenigs_generator_2d)
from checkernet._geometry import random_rotation


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_net(rows, cols, rng, amp=0.25):
    base = np.zeros((rows, cols, 3))
    base[..., 0] = np.arange(rows)[:, None]
    base[..., 1] = np.arange(cols)[None, :]
    return QuadNet(base + rng.uniform(-amp, amp, base.shape))


def random_conjugate_net(rows, cols, rng, amp=0.25):
    """Exactly conjugate: each interior vertex's four neighbors are coplanar,
    enforced by projecting the new row's interior vertices onto the plane of
    the three already-known neighbors."""
    f = np.zeros((rows, cols, 3))
    f[..., 0] = np.arange(rows)[:, None]
    f[..., 1] = np.arange(cols)[None, :]
    f[0] += rng.uniform(-amp, amp, (cols, 3))
    f[1] += rng.uniform(-amp, amp, (cols, 3))
    for k in range(2, rows):
        for l in range(cols):
            guess = 2 * f[k - 1, l] - f[k - 2, l] + rng.uniform(-amp, amp, 3)
            if 1 <= l <= cols - 2:
                p0, p1, p2 = f[k - 2, l], f[k - 1, l - 1], f[k - 1, l + 1]
                n = np.cross(p1 - p0, p2 - p0)
                n /= np.linalg.norm(n)
                guess -= np.dot(guess - p0, n) * n
            f[k, l] = guess
    return QuadNet(f)


def safe_random_transform(rng, net: QuadNet, radii_sq=None) -> MoebiusTransform:
    """Random Moebius transform whose inversion center stays clear of the
    congruence spheres, so no member maps to a plane."""
    v = net.vertices.reshape(-1, 3)
    centroid = v.mean(axis=0)
    reach = np.linalg.norm(v - centroid, axis=1).max()
    if radii_sq is not None:
        reach += np.sqrt(np.abs(radii_sq)).max()
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    center = centroid + direction * reach * rng.uniform(1.5, 2.5)
    t = MoebiusTransform.sphere_inversion(center, rng.uniform(0.5, 2.0) * reach ** 2)
    t = t @ MoebiusTransform.translation(rng.uniform(-1, 1, 3))
    t = t @ MoebiusTransform.rotation(random_rotation(rng))
    t = t @ MoebiusTransform.scaling(rng.uniform(0.5, 2.0))
    return t


def moebius_grid_net(rng, rows=5, cols=5, eps=1.0):
    """Exactly isothermic (principal + Koenigs) net: random Moebius image of
    a square grid through its half-squared-edge congruence."""
    grid = generate(SampleSpec("square_grid", epsilon=eps, rows=rows, cols=cols))
    cong = build_congruence(grid, 0.5 * eps * eps)
    transform = safe_random_transform(rng, grid, cong.radii_sq)
    _, image = apply_moebius(transform, cong)
    return image


def commuting_map_net(rng, rows=5, cols=5):
    """Random Koenigs control net from two commuting projective maps sharing
    an eigenbasis."""
    while True:
        basis = np.eye(3) + rng.uniform(-0.2, 0.2, (3, 3))
        if abs(np.linalg.det(basis)) < 0.3:
            continue
        inv = np.linalg.inv(basis)
        m = basis @ np.diag(rng.uniform(0.75, 1.35, 3)) @ inv
        n = basis @ np.diag(rng.uniform(0.75, 1.35, 3)) @ inv
        p = np.array([rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), 1.0])
        try:
            net = koenigs_generator_2d(m, n, p, range(rows), range(cols))
        except Exception:
            continue
        edges = np.linalg.norm(net.vertices[1:] - net.vertices[:-1], axis=-1)
        if edges.min() > 1e-3 and edges.max() / edges.min() < 50:
            return net


def sphere_gauss_net(rng, rows=6, cols=6, eps=0.7):
    """Exactly isothermic net on the unit sphere (in the congruence sense):
    the inversion through (0,0,1) with power 2 maps the plane z=0 onto the
    unit sphere, carrying the planar grid congruence of half-squared-edge
    radius to one whose spheres all cut the unit sphere orthogonally."""
    grid = generate(SampleSpec("square_grid", epsilon=eps, rows=rows, cols=cols))
    shifted = grid.vertices.copy()
    shifted[..., 0] += rng.uniform(-0.3, 0.3) - eps * (rows - 1) / 2
    shifted[..., 1] += rng.uniform(-0.3, 0.3) - eps * (cols - 1) / 2
    cong = build_congruence(QuadNet(shifted), 0.5 * eps * eps)
    stereo = MoebiusTransform.sphere_inversion([0.0, 0.0, 1.0], 2.0)
    _, image = apply_moebius(stereo, cong)
    return image

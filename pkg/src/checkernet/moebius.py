"""Sphere congruences and Moebius transformations in the projective model.

Spheres (center c, signed squared radius r^2) embed into five-dimensional
Minkowski space of signature (4,1) via

    lift(c, r^2) = c + e0 + (|c|^2 - r^2) einf,

where e0 = (e5 - e4)/2 and einf = (e4 + e5)/2 are the isotropic basis
vectors. Two spheres intersect orthogonally iff their lifts are orthogonal
for the Minkowski product, which for finite spheres is the Euclidean
condition |c1 - c2|^2 = r1^2 + r2^2 (valid also for negative squared radii).
Moebius transformations of space are exactly the linear maps preserving the
Minkowski product up to positive scale, acting projectively on lifts.

An orthogonal checkerboard pattern carries a one-parameter family of sphere
congruences centered at the control vertices with orthogonally intersecting
neighbors; transforming the congruence and reading off the new centers
transports the net, and principality is preserved.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ._geometry import normalized
from .curvature import GaussNet
from .errors import (DegenerateGeometryError, NonOrthogonalPatternError,
                     PreconditionError, TransformDegeneracyError)
from .nets import DEFAULT_TOLERANCES, QuadNet, build_checkerboard

__all__ = [
    "MINKOWSKI_METRIC",
    "E0",
    "EINF",
    "minkowski_inner",
    "Sphere",
    "Plane",
    "PointAtInfinity",
    "lift",
    "unlift",
    "OrthogonalityCheck",
    "orthogonal",
    "SphereCongruence",
    "build_congruence",
    "lift_congruence",
    "MoebiusTransform",
    "apply_moebius",
    "PseudoPrincipalCheck",
    "is_pseudo_principal",
    "principal_gauss_image",
]

MINKOWSKI_METRIC = np.diag([1.0, 1.0, 1.0, 1.0, -1.0])
_J = MINKOWSKI_METRIC
E0 = np.array([0.0, 0.0, 0.0, -0.5, 0.5])     # (e5 - e4)/2
EINF = np.array([0.0, 0.0, 0.0, 0.5, 0.5])    # (e4 + e5)/2


def minkowski_inner(a: np.ndarray, b: np.ndarray) -> float | np.ndarray:
    """Inner product of signature (+,+,+,+,-); vectorized over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    prod = (a[..., :4] * b[..., :4]).sum(axis=-1) - a[..., 4] * b[..., 4]
    return float(prod) if prod.ndim == 0 else prod


@dataclass(frozen=True)
class Sphere:
    """Sphere with center c and signed squared radius; radius^2 < 0 is legal
    (imaginary radius), radius^2 = 0 is a point."""

    center: np.ndarray
    radius_sq: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(3)
        if not np.all(np.isfinite(c)) or not np.isfinite(self.radius_sq):
            raise ValueError("sphere data must be finite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius_sq", float(self.radius_sq))


@dataclass(frozen=True)
class Plane:
    """Plane <normal, x> = offset; a sphere of infinite radius."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(3)
        nn = np.linalg.norm(n)
        if not np.isfinite(nn) or nn == 0:
            raise ValueError("plane normal must be nonzero and finite")
        object.__setattr__(self, "normal", n / nn)
        object.__setattr__(self, "offset", float(self.offset) / nn)


class PointAtInfinity:
    """Image of the pure-einf projective point; has no Euclidean carrier."""

    def __repr__(self):
        return "PointAtInfinity()"

    def __eq__(self, other):
        return isinstance(other, PointAtInfinity)

    def __hash__(self):
        return hash(PointAtInfinity)


def lift(s: Sphere | Plane) -> np.ndarray:
    """Minkowski representative of a sphere or plane.

    Spheres are normalized to e0-coefficient 1, so the representative v
    satisfies <v, v> = r^2. Planes have e0-coefficient 0 and unit spatial
    part, so <v, einf> = 0.
    """
    if isinstance(s, Sphere):
        w = float(s.center @ s.center) - s.radius_sq
        return np.array([s.center[0], s.center[1], s.center[2],
                         0.5 * (w - 1.0), 0.5 * (w + 1.0)])
    if isinstance(s, Plane):
        d = s.offset
        return np.array([s.normal[0], s.normal[1], s.normal[2], d, d])
    raise TypeError(f"cannot lift {type(s).__name__}")


def unlift(p: np.ndarray) -> Sphere | Plane | PointAtInfinity:
    """Inverse of the lift, up to projective scale.

    The e0-coefficient is p5 - p4. If it is nonzero the point is a sphere;
    otherwise a plane when the spatial part survives, and the point at
    infinity when only einf is left.
    """
    p = np.asarray(p, dtype=float).reshape(5)
    scale = np.linalg.norm(p)
    if scale == 0:
        raise ValueError("zero vector has no projective class")
    e0_coeff = p[4] - p[3]
    einf_coeff = p[4] + p[3]
    spatial = p[:3]
    if abs(e0_coeff) > 1e-13 * scale:
        center = spatial / e0_coeff
        return Sphere(center, float(center @ center) - einf_coeff / e0_coeff)
    nn = np.linalg.norm(spatial)
    if nn <= 1e-13 * scale:
        return PointAtInfinity()
    return Plane(spatial, einf_coeff / 2.0)


@dataclass(frozen=True)
class OrthogonalityCheck:
    orthogonal: bool
    residual: float                 # scale-free, from unit-norm representatives
    euclidean_gap: float | None     # <c1-c2, c1-c2> - r1^2 - r2^2 (spheres only)
    lifted_gap: float               # -2 <lift(s1), lift(s2)>, e0-normalized reps


def orthogonal(s1: Sphere | Plane, s2: Sphere | Plane,
               tol: float = DEFAULT_TOLERANCES.tol_orth) -> OrthogonalityCheck:
    """Orthogonal-intersection test, computed both ways.

    For sphere pairs the Euclidean gap |c1-c2|^2 - r1^2 - r2^2 equals
    -2 <lift(s1), lift(s2)> exactly (with e0-normalized representatives); the
    flag uses the scale-free residual |<v1, v2>| / (|v1| |v2|).
    """
    v1, v2 = lift(s1), lift(s2)
    inner = minkowski_inner(v1, v2)
    lifted_gap = -2.0 * inner
    euclidean_gap = None
    if isinstance(s1, Sphere) and isinstance(s2, Sphere):
        d = s1.center - s2.center
        euclidean_gap = float(d @ d) - s1.radius_sq - s2.radius_sq
    residual = abs(inner) / (np.linalg.norm(v1) * np.linalg.norm(v2))
    return OrthogonalityCheck(orthogonal=residual <= tol, residual=float(residual),
                              euclidean_gap=euclidean_gap, lifted_gap=float(lifted_gap))


@dataclass(frozen=True)
class SphereCongruence:
    """Per-vertex spheres over a grid; centers are the control-net vertices."""

    centers: np.ndarray    # (rows, cols, 3)
    radii_sq: np.ndarray   # (rows, cols)

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.centers, dtype=float))
        r = np.ascontiguousarray(np.asarray(self.radii_sq, dtype=float))
        if c.ndim != 3 or c.shape[2] != 3 or r.shape != c.shape[:2]:
            raise ValueError("centers must be (rows, cols, 3) with matching radii_sq")
        c.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii_sq", r)

    @property
    def rows(self) -> int:
        return self.centers.shape[0]

    @property
    def cols(self) -> int:
        return self.centers.shape[1]

    def sphere(self, k: int, l: int) -> Sphere:
        return Sphere(self.centers[k, l], float(self.radii_sq[k, l]))

    def net(self) -> QuadNet:
        return QuadNet(self.centers)

    def max_orthogonality_gap(self) -> float:
        """Max |gap| of the Euclidean orthogonality condition over all edges,
        normalized by the squared local edge length."""
        worst = 0.0
        c, r = self.centers, self.radii_sq
        for dk, dl in ((1, 0), (0, 1)):
            d = c[dk:, dl:] - c[:c.shape[0] - dk, :c.shape[1] - dl]
            dist_sq = (d * d).sum(axis=-1)
            gap = np.abs(dist_sq - r[dk:, dl:] - r[:c.shape[0] - dk, :c.shape[1] - dl])
            worst = max(worst, float((gap / np.maximum(dist_sq, 1e-300)).max()))
        return worst


def build_congruence(net: QuadNet, r0_sq: float,
                     tol: float = DEFAULT_TOLERANCES.tol_orth) -> SphereCongruence:
    """Sphere congruence with orthogonally intersecting neighbors.

    The seed radius r0_sq at vertex (0,0) propagates along edges via
    r_i^2 = |f - f_i|^2 - r^2. The two propagation paths around a face agree
    iff <f - f12, f1 - f2> = 0, i.e. iff the pattern is orthogonal; the worst
    face mismatch (relative to the squared edge scale) must stay within tol.
    """
    v = net.vertices
    rows, cols = net.rows, net.cols
    r2 = np.empty((rows, cols))
    r2[0, 0] = r0_sq
    d = v[1:, 0] - v[:-1, 0]
    edge_k0 = (d * d).sum(axis=-1)
    for k in range(1, rows):
        r2[k, 0] = edge_k0[k - 1] - r2[k - 1, 0]
    d = v[:, 1:] - v[:, :-1]
    edge_l = (d * d).sum(axis=-1)
    for l in range(1, cols):
        r2[:, l] = edge_l[:, l - 1] - r2[:, l - 1]

    # closure on the unused k-edges; equals 2 <f - f12, f1 - f2> per face
    d = v[1:, 1:] - v[:-1, 1:]
    gap = np.abs((d * d).sum(axis=-1) - r2[:-1, 1:] - r2[1:, 1:])
    scale = np.maximum((d * d).sum(axis=-1), 1e-300)
    worst = float((gap / scale).max()) if gap.size else 0.0
    if worst > tol:
        raise NonOrthogonalPatternError(
            f"radius propagation does not close (max relative face residual "
            f"{worst:.3e}); the checkerboard pattern is not orthogonal",
            residual=worst)
    return SphereCongruence(centers=v, radii_sq=r2)


def lift_congruence(cong: SphereCongruence) -> np.ndarray:
    """Lifts of all congruence members, shape (rows, cols, 5)."""
    c = cong.centers
    w = (c * c).sum(axis=-1) - cong.radii_sq
    return np.concatenate([c, 0.5 * (w - 1.0)[..., None], 0.5 * (w + 1.0)[..., None]], axis=-1)


class MoebiusTransform:
    """Moebius transformation as a 5x5 matrix T with T^t J T = lambda J,
    lambda > 0, acting projectively on lifted spheres."""

    # coords (x, a, b) meaning x + a e0 + b einf; _C maps them to e-basis
    _C = np.array([
        [1.0, 0, 0, 0, 0],
        [0, 1.0, 0, 0, 0],
        [0, 0, 1.0, 0, 0],
        [0, 0, 0, -0.5, 0.5],
        [0, 0, 0, 0.5, 0.5],
    ])
    _C_INV = np.linalg.inv(_C)

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=float).reshape(5, 5).copy()
        g = m.T @ _J @ m
        lam = g[0, 0]
        if lam <= 0 or np.abs(g - lam * _J).max() > 1e-10 * abs(lam):
            raise ValueError("matrix is not Minkowski-orthogonal up to positive scale")
        m.setflags(write=False)
        self.matrix = m
        self._scale = float(lam)

    @classmethod
    def identity(cls) -> "MoebiusTransform":
        return cls(np.eye(5))

    @classmethod
    def rotation(cls, r: np.ndarray) -> "MoebiusTransform":
        r = np.asarray(r, dtype=float).reshape(3, 3)
        if np.abs(r.T @ r - np.eye(3)).max() > 1e-10:
            raise ValueError("rotation matrix must be orthogonal")
        m = np.eye(5)
        m[:3, :3] = r
        return cls(cls._C @ m @ cls._C_INV)

    @classmethod
    def translation(cls, t: np.ndarray) -> "MoebiusTransform":
        t = np.asarray(t, dtype=float).reshape(3)
        m = np.eye(5)
        m[:3, 3] = t                 # x' = x + a t
        m[4, :3] = 2.0 * t           # b' = 2 <t, x> + |t|^2 a + b
        m[4, 3] = float(t @ t)
        return cls(cls._C @ m @ cls._C_INV)

    @classmethod
    def scaling(cls, lam: float) -> "MoebiusTransform":
        if not lam > 0:
            raise ValueError("scaling factor must be positive")
        m = np.diag([lam, lam, lam, 1.0, lam * lam])
        return cls(cls._C @ m @ cls._C_INV)

    @classmethod
    def sphere_inversion(cls, center: np.ndarray, radius_sq: float) -> "MoebiusTransform":
        """Inversion x -> c + r^2 (x-c)/|x-c|^2, as the Minkowski reflection
        about the lifted sphere: v -> v - 2 <v, m>/<m, m> m."""
        if not radius_sq > 0:
            raise ValueError("inversion radius_sq must be positive")
        m = lift(Sphere(np.asarray(center, dtype=float), float(radius_sq)))
        mm = minkowski_inner(m, m)   # = radius_sq > 0
        return cls(np.eye(5) - (2.0 / mm) * np.outer(m, m @ _J))

    def __matmul__(self, other: "MoebiusTransform") -> "MoebiusTransform":
        return MoebiusTransform(self.matrix @ other.matrix)

    def inverse(self) -> "MoebiusTransform":
        return MoebiusTransform(np.linalg.inv(self.matrix))

    def transform_sphere(self, s: Sphere | Plane) -> Sphere | Plane | PointAtInfinity:
        return unlift(self.matrix @ lift(s))

    def transform_lifted(self, lifted: np.ndarray) -> np.ndarray:
        """Apply to an array of lifted vectors (..., 5)."""
        return np.einsum("ij,...j->...i", self.matrix, np.asarray(lifted, dtype=float))


def apply_moebius(transform: MoebiusTransform, cong: SphereCongruence,
                  tol: float = DEFAULT_TOLERANCES.tol_orth
                  ) -> tuple[SphereCongruence, QuadNet]:
    """Transform every congruence member and extract the image control net
    from the new sphere centers.

    Members that map to planes or to the point at infinity have no center, so
    the image net is undefined there and the offending vertex is reported.
    Pairwise orthogonality is preserved exactly up to rounding; it is
    re-verified against tol.
    """
    lifted = transform.transform_lifted(lift_congruence(cong))
    scale = np.linalg.norm(lifted, axis=-1)
    e0_coeff = lifted[..., 4] - lifted[..., 3]
    bad = np.abs(e0_coeff) <= 1e-13 * scale
    if bad.any():
        k, l = map(int, np.argwhere(bad)[0])
        raise TransformDegeneracyError(
            f"congruence member at vertex ({k}, {l}) maps to a plane or to "
            f"infinity; the transformed control net is undefined there")
    centers = lifted[..., :3] / e0_coeff[..., None]
    einf_coeff = lifted[..., 4] + lifted[..., 3]
    radii_sq = (centers * centers).sum(axis=-1) - einf_coeff / e0_coeff
    out = SphereCongruence(centers=centers, radii_sq=radii_sq)
    worst = out.max_orthogonality_gap()
    if worst > tol:
        raise PreconditionError(
            f"transformed congruence lost orthogonality (residual {worst:.3e})",
            residual=worst)
    return out, QuadNet(centers)


@dataclass(frozen=True)
class PseudoPrincipalCheck:
    pseudo_principal: bool
    orthogonality_residual: float
    conjugacy_residual: float


def is_pseudo_principal(lifted: np.ndarray,
                        tol: float = DEFAULT_TOLERANCES.tol_orth) -> PseudoPrincipalCheck:
    """Test a grid of projective points in Minkowski space for
    pseudo-principality: adjacent vertices orthogonal, and the white faces of
    the midpoint checkerboard (taken on e0-normalized representatives)
    projectively coplanar, i.e. the 4x5 matrix of their homogeneous vectors
    has rank <= 3.
    """
    lifted = np.asarray(lifted, dtype=float)
    if lifted.ndim != 3 or lifted.shape[2] != 5:
        raise ValueError("expected a grid of 5-vectors, shape (rows, cols, 5)")
    if lifted.shape[0] < 3 or lifted.shape[1] < 3:
        raise ValueError("need at least a 3x3 grid")
    unit = lifted / np.linalg.norm(lifted, axis=-1, keepdims=True)
    orth = 0.0
    for dk, dl in ((1, 0), (0, 1)):
        a = unit[dk:, dl:] if dk else unit[:, dl:]
        b = unit[:-1, :] if dk else unit[:, :-1]
        inner = np.abs(minkowski_inner(a, b))
        orth = max(orth, float(inner.max()))

    e0_coeff = lifted[..., 4] - lifted[..., 3]
    if np.any(np.abs(e0_coeff) <= 1e-13 * np.linalg.norm(lifted, axis=-1)):
        raise DegenerateGeometryError(
            "a vertex has vanishing e0-coefficient; normalize-to-sphere fails")
    affine = lifted / e0_coeff[..., None]
    hmid = 0.5 * (affine[:-1, :] + affine[1:, :])
    vmid = 0.5 * (affine[:, :-1] + affine[:, 1:])
    conj = 0.0
    for k in range(1, lifted.shape[0] - 1):
        for l in range(1, lifted.shape[1] - 1):
            quad = np.stack([hmid[k - 1, l], vmid[k, l - 1], hmid[k, l], vmid[k, l]])
            s = np.linalg.svd(quad - quad.mean(axis=0), compute_uv=False)
            conj = max(conj, float(s[2] / max(s[0], 1e-300)))
    return PseudoPrincipalCheck(
        pseudo_principal=(orth <= tol and conj <= tol),
        orthogonality_residual=orth,
        conjugacy_residual=conj,
    )


def principal_gauss_image(net: QuadNet, seed: np.ndarray, root: tuple[int, int] | None = None,
                          tol: float = DEFAULT_TOLERANCES.tol_orth
                          ) -> tuple[GaussNet, SphereCongruence]:
    """Adapted-length Gauss image of a principal net via polarity.

    The image net n runs edge-parallel to the checkerboard of `net` and its
    spheres (radius^2 = |n|^2 - 1, forced by unit-sphere orthogonality) cut
    both their neighbors and the unit sphere orthogonally, which reduces to
    the polar condition <n, n_i> = 1 on every edge. Each neighbor of a known
    vertex is then the intersection of the two polar lines of the diagonal
    lines through it: the solution of

        <x, n> = 1,  <x, d_a> = 0,  <x, d_b> = 0,

    where d_a, d_b are the diagonal directions of the two faces flanking the
    edge (known from `net` by parallelism). `seed` is the image vertex at
    `root` (default: the first interior vertex) and must lie on the line
    through the origin orthogonal to the white face there; the image is
    unique up to that choice. The four grid corners are not reachable by
    polar propagation (any point on the corner diagonal line satisfies every
    constraint); they are pinned by matching the length ratio of the face's
    other diagonal.

    Returns the non-unit Gauss net and its sphere congruence. Raises when
    propagation degenerates (planar nets make every polar step collapse) or
    when the propagated vertices violate the polar relations beyond tol.
    """
    net.require_min_size(3, 3, "principal Gauss image")
    rows, cols = net.rows, net.cols
    if root is None:
        root = (1, 1)
    rk, rl = root
    if not (1 <= rk <= rows - 2 and 1 <= rl <= cols - 2):
        raise ValueError("root must be an interior vertex")

    cbp = build_checkerboard(net)
    white = cbp.white_face(rk, rl)
    from ._geometry import fit_plane
    _, _, _, normal = fit_plane(white)
    seed = np.asarray(seed, dtype=float).reshape(3)
    off_line = np.linalg.norm(seed - (seed @ normal) * normal)
    if off_line > max(tol, 1e-10) * max(np.linalg.norm(seed), 1e-300):
        raise PreconditionError(
            "seed must lie on the line through the origin orthogonal to the "
            f"white face at the root vertex (off-line distance {off_line:.3e})",
            residual=float(off_line))

    v = net.vertices
    image = np.full((rows, cols, 3), np.nan)
    image[rk, rl] = seed
    edge_scale = float(np.linalg.norm(v[1:, :] - v[:-1, :], axis=-1).mean())

    def diag(k, l, dk, dl):
        return v[k + dk, l + dl] - v[k, l]

    queue = deque([(rk, rl)])
    while queue:
        k, l = queue.popleft()
        base = image[k, l]
        steps = []
        if k + 1 <= rows - 1 and 1 <= l <= cols - 2:
            steps.append(((k + 1, l), diag(k, l, 1, 1), diag(k, l, 1, -1)))
        if k - 1 >= 0 and 1 <= l <= cols - 2:
            steps.append(((k - 1, l), diag(k, l, -1, 1), diag(k, l, -1, -1)))
        if l + 1 <= cols - 1 and 1 <= k <= rows - 2:
            steps.append(((k, l + 1), diag(k, l, 1, 1), diag(k, l, -1, 1)))
        if l - 1 >= 0 and 1 <= k <= rows - 2:
            steps.append(((k, l - 1), diag(k, l, 1, -1), diag(k, l, -1, -1)))
        for (idx, d_a, d_b) in steps:
            if not np.isnan(image[idx]).any():
                continue
            mat = np.stack([base, d_a, d_b])
            if abs(np.linalg.det(mat)) <= 1e-14 * np.linalg.norm(base) * edge_scale ** 2:
                raise DegenerateGeometryError(
                    f"polar step to vertex {idx} is degenerate (parallel polar "
                    "directions); planar nets have no principal Gauss image")
            image[idx] = np.linalg.solve(mat, np.array([1.0, 0.0, 0.0]))
            queue.append(idx)

    # pin the four corners by the other-diagonal length ratio
    for (ck, cl, ik, il) in ((0, 0, 1, 1), (rows - 1, 0, rows - 2, 1),
                             (0, cols - 1, 1, cols - 2),
                             (rows - 1, cols - 1, rows - 2, cols - 2)):
        if np.isnan(image[ck, cl]).any():
            other_image = image[ck, il] - image[ik, cl]
            other_net = v[ck, il] - v[ik, cl]
            ratio = np.linalg.norm(other_image) / np.linalg.norm(other_net)
            image[ck, cl] = image[ik, il] + ratio * (v[ck, cl] - v[ik, il])

    # verify the polar relations on every edge (non-tree edges included)
    worst = 0.0
    for dk, dl in ((1, 0), (0, 1)):
        a = image[dk:, :] if dk else image[:, dl:]
        b = image[:-1, :] if dk else image[:, :-1]
        gap = np.abs((a * b).sum(axis=-1) - 1.0)
        norm = np.maximum(np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1), 1e-300)
        # corner edges carry the pinning freedom; exclude them from the abort test
        mask = np.ones(gap.shape, dtype=bool)
        for (ck, cl) in ((0, 0), (rows - 1, 0), (0, cols - 1), (rows - 1, cols - 1)):
            kk = slice(max(ck - dk, 0), ck + 1)
            ll = slice(max(cl - dl, 0), cl + 1)
            mask[kk, ll] = False
        if gap[mask].size:
            worst = max(worst, float((gap[mask] / norm[mask]).max()))
    if worst > max(tol, 1e-9):
        raise PreconditionError(
            f"polar propagation is inconsistent (residual {worst:.3e}); "
            "the net is not principal within tolerance", residual=worst)

    radii_sq = (image * image).sum(axis=-1) - 1.0
    return GaussNet(image, unit=False), SphereCongruence(centers=image, radii_sq=radii_sq)

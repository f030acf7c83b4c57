"""Discrete curvature theory on checkerboard patterns.

The Gauss image assigns a unit normal to every interior control vertex; its
checkerboard pattern runs parallel to the one of the net, and the shape
operator of a face is the linear map sending the net's black-face edge
vectors to the (projected) edge vectors of the Gauss image's black face.
Fundamental forms, principal curvatures, mixed areas and the offset-area
polynomial all derive from that map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._geometry import SQRT2, normalized
from .errors import DegenerateGeometryError
from .nets import QuadNet, build_checkerboard

__all__ = [
    "GaussNet",
    "FundamentalForms",
    "ShapeResult",
    "CurvatureTable",
    "vertex_normals",
    "face_normal_and_area",
    "fundamental_forms",
    "shape_operator",
    "principal_curvature_table",
    "mixed_area",
    "steiner_residual",
    "curvatures_via_mixed_area",
    "measurable_faces",
]


@dataclass(frozen=True)
class GaussNet:
    """Normal vectors per control vertex; NaN where undefined (boundary ring).

    unit=True is the ordinary Gauss image (vectors on the unit sphere);
    unit=False marks adapted-length variants such as the principal Gauss
    image, whose vertices only have to produce parallel black faces.
    """

    vectors: np.ndarray
    unit: bool = True

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vectors, dtype=float))
        if v.ndim != 3 or v.shape[2] != 3:
            raise ValueError("vectors must have shape (rows, cols, 3)")
        if self.unit:
            norms = np.linalg.norm(v, axis=-1)
            defined = ~np.isnan(norms)
            if defined.any() and np.abs(norms[defined] - 1.0).max() > 1e-12:
                raise ValueError("unit Gauss image has non-unit vectors")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def quad(self, k: int, l: int) -> np.ndarray:
        """Vectors at the four corners of control face (k, l)."""
        v = self.vectors
        q = np.stack([v[k, l], v[k + 1, l], v[k + 1, l + 1], v[k, l + 1]])
        if np.isnan(q).any():
            raise DegenerateGeometryError(
                f"Gauss image undefined at a corner of face ({k}, {l})")
        return q


@dataclass(frozen=True)
class FundamentalForms:
    first: np.ndarray   # 2x2, inner products of (du f, dv f)
    second: np.ndarray  # 2x2, inner products of (du f, dv f) with (du n, dv n)


@dataclass(frozen=True)
class ShapeResult:
    sigma: np.ndarray        # 2x2 matrix of the shape operator in basis (du f, dv f)
    kappa1: float            # principal curvatures, kappa1 >= kappa2
    kappa2: float
    dir1: np.ndarray         # eigenvectors in basis (du f, dv f), unit first-form norm
    dir2: np.ndarray
    face_normal: np.ndarray


def vertex_normals(net: QuadNet) -> GaussNet:
    """Unit vertex normals n = (f1 - fm1) x (f2 - fm2) / |...| per interior
    vertex. The same vector is the face normal of the white face at that
    vertex, since the white-face diagonals are half the one-ring differences.
    """
    net.require_min_size(3, 3, "vertex normals")
    v = net.vertices
    cr = np.cross(v[2:, 1:-1] - v[:-2, 1:-1], v[1:-1, 2:] - v[1:-1, :-2])
    norms = np.linalg.norm(cr, axis=-1)
    scale = float(np.linalg.norm(v[1:, :] - v[:-1, :], axis=-1).mean()) ** 2
    bad = np.argwhere(norms <= 1e-14 * scale)
    if len(bad):
        verts = [(int(k) + 1, int(l) + 1) for k, l in bad]
        raise DegenerateGeometryError(f"collinear one-ring at vertices {verts}")
    out = np.full_like(v, np.nan)
    out[1:-1, 1:-1] = cr / norms[..., None]
    return GaussNet(out, unit=True)


def _du_dv(quad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (quad[2] - quad[0]) / SQRT2, (quad[3] - quad[1]) / SQRT2


def face_normal_and_area(quad: np.ndarray) -> tuple[np.ndarray, float]:
    """Face normal N = (f12-f)x(f2-f1)/|...| and generalized area
    det(du, dv, N): the area of the projection of the face along N."""
    quad = np.asarray(quad, dtype=float)
    du, dv = _du_dv(quad)
    cr = np.cross(du, dv)
    n = np.linalg.norm(cr)
    if n <= 1e-14 * max(np.linalg.norm(du), np.linalg.norm(dv)) ** 2:
        raise DegenerateGeometryError("degenerate quad: diagonals are parallel")
    N = cr / n
    return N, float(n)


def fundamental_forms(net: QuadNet, gauss: GaussNet, face: tuple[int, int]) -> FundamentalForms:
    """First and second fundamental forms of a face in the basis (du f, dv f)."""
    k, l = face
    du, dv = _du_dv(net.face(k, l))
    dun, dvn = _du_dv(gauss.quad(k, l))
    first = np.array([[du @ du, du @ dv], [dv @ du, dv @ dv]])
    second = np.array([[du @ dun, du @ dvn], [dv @ dun, dv @ dvn]])
    return FundamentalForms(first=first, second=second)


def _canonical_direction(d: np.ndarray, first: np.ndarray) -> np.ndarray:
    d = d / np.sqrt(d @ first @ d)
    lead = d[0] if abs(d[0]) > 1e-12 * abs(d[1]) else d[1]
    return -d if lead < 0 else d


def shape_operator(net: QuadNet, gauss: GaussNet, face: tuple[int, int],
                   symmetry_tol: float = 1e-8) -> ShapeResult:
    """Shape operator of a face: Sigma = I^-1 II, with eigenvalues sorted
    kappa1 >= kappa2 and eigenvectors of unit first-form norm whose first
    nonzero coordinate is positive.

    When II is symmetric to within symmetry_tol (always the case on conjugate
    patterns, where II is diagonal) the symmetric generalized problem
    II d = kappa I d is solved instead of diagonalizing Sigma directly, which
    preserves the symmetry numerically.
    """
    forms = fundamental_forms(net, gauss, face)
    first, second = forms.first, forms.second
    det_first = np.linalg.det(first)
    if det_first <= 1e-28 * max(first[0, 0], first[1, 1]) ** 2:
        raise DegenerateGeometryError(f"singular first fundamental form at face {face}")
    sigma = np.linalg.solve(first, second)
    N, _ = face_normal_and_area(net.face(*face))

    skew = abs(second[0, 1] - second[1, 0])
    if skew <= symmetry_tol * max(1.0, float(np.abs(second).max())):
        sym = 0.5 * (second + second.T)
        vals, vecs = scipy.linalg.eigh(sym, first)
        kappa2, kappa1 = float(vals[0]), float(vals[1])
        d2, d1 = vecs[:, 0], vecs[:, 1]
    else:
        vals, vecs = np.linalg.eig(sigma)
        if np.abs(vals.imag).max() > 1e-9 * (1.0 + np.abs(vals.real).max()):
            raise DegenerateGeometryError(
                f"complex principal curvatures at face {face}; "
                "the pattern is far from conjugate")
        order = np.argsort(vals.real)
        kappa2, kappa1 = (float(vals.real[i]) for i in order)
        d2, d1 = vecs.real[:, order[0]], vecs.real[:, order[1]]

    return ShapeResult(
        sigma=sigma,
        kappa1=kappa1,
        kappa2=kappa2,
        dir1=_canonical_direction(d1, first),
        dir2=_canonical_direction(d2, first),
        face_normal=N,
    )


def measurable_faces(net: QuadNet) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays (ks, ls) of faces whose four corner normals exist."""
    net.require_min_size(4, 4, "per-face curvature")
    return np.arange(1, net.rows - 2), np.arange(1, net.cols - 2)


@dataclass(frozen=True)
class CurvatureTable:
    """Vectorized per-face curvature data for faces (ks[i], ls[j])."""

    ks: np.ndarray
    ls: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    mean: np.ndarray
    gauss: np.ndarray
    dir1: np.ndarray  # (..., 2) in the (du, dv) basis
    dir2: np.ndarray


def principal_curvature_table(net: QuadNet, gauss: GaussNet | None = None) -> CurvatureTable:
    """Batched curvatures over all measurable faces (closed-form 2x2 algebra).

    Equivalent to shape_operator face by face; kept vectorized because the
    convergence studies sweep thousands of faces.
    """
    if gauss is None:
        gauss = vertex_normals(net)
    ks, ls = measurable_faces(net)
    v = net.vertices[1:-1, 1:-1]
    n = gauss.vectors[1:-1, 1:-1]
    quad = lambda a: np.stack([a[:-1, :-1], a[1:, :-1], a[1:, 1:], a[:-1, 1:]], axis=2)
    fq, nq = quad(v), quad(n)
    du = (fq[..., 2, :] - fq[..., 0, :]) / SQRT2
    dv = (fq[..., 3, :] - fq[..., 1, :]) / SQRT2
    dun = (nq[..., 2, :] - nq[..., 0, :]) / SQRT2
    dvn = (nq[..., 3, :] - nq[..., 1, :]) / SQRT2

    e = np.stack([du, dv], axis=-2)
    en = np.stack([dun, dvn], axis=-2)
    first = np.einsum("...ax,...bx->...ab", e, e)
    second = np.einsum("...ax,...bx->...ab", e, en)
    det_first = first[..., 0, 0] * first[..., 1, 1] - first[..., 0, 1] * first[..., 1, 0]
    inv = np.empty_like(first)
    inv[..., 0, 0] = first[..., 1, 1]
    inv[..., 1, 1] = first[..., 0, 0]
    inv[..., 0, 1] = -first[..., 0, 1]
    inv[..., 1, 0] = -first[..., 1, 0]
    sigma = inv @ second / det_first[..., None, None]

    mean = 0.5 * (sigma[..., 0, 0] + sigma[..., 1, 1])
    gausscurv = sigma[..., 0, 0] * sigma[..., 1, 1] - sigma[..., 0, 1] * sigma[..., 1, 0]
    disc = np.sqrt(np.maximum(mean * mean - gausscurv, 0.0))
    kappa1 = mean + disc
    kappa2 = mean - disc

    def eigdir(kappa):
        c1 = np.stack([sigma[..., 0, 1], kappa - sigma[..., 0, 0]], axis=-1)
        c2 = np.stack([kappa - sigma[..., 1, 1], sigma[..., 1, 0]], axis=-1)
        pick = (np.linalg.norm(c2, axis=-1) > np.linalg.norm(c1, axis=-1))[..., None]
        d = np.where(pick, c2, c1)
        umbilic = np.linalg.norm(d, axis=-1)[..., None] <= 1e-14
        d = np.where(umbilic, np.array([1.0, 0.0]), d)
        qn = np.einsum("...a,...ab,...b->...", d, first, d)
        d = d / np.sqrt(qn)[..., None]
        lead = np.where(np.abs(d[..., :1]) > 1e-12 * np.abs(d[..., 1:]), d[..., :1], d[..., 1:])
        return d * np.sign(np.where(lead == 0, 1.0, lead))

    d1 = eigdir(kappa1)
    d2 = eigdir(kappa2)
    # umbilic faces: fall back to the basis directions
    umb = (disc <= 1e-12 * (1.0 + np.abs(mean)))[..., None]
    d1 = np.where(umb, np.array([1.0, 0.0]), d1)
    d2 = np.where(umb, np.array([0.0, 1.0]), d2)
    return CurvatureTable(ks=ks, ls=ls, kappa1=kappa1, kappa2=kappa2,
                          mean=mean, gauss=gausscurv, dir1=d1, dir2=d2)


def mixed_area(quad_a: np.ndarray, quad_b: np.ndarray, normal: np.ndarray | None = None,
               tol: float = 1e-8) -> float:
    """Mixed area A(Qa, Qb) = (det(du_a, dv_b, N) + det(du_b, dv_a, N)) / 2.

    The two quads must be parallel: unless quad_b is degenerate, its own face
    normal has to agree with N (the face normal of quad_a, or the explicit
    `normal`) up to sign within tol. A(Q, Q) is the generalized area of Q.
    """
    quad_a = np.asarray(quad_a, dtype=float)
    quad_b = np.asarray(quad_b, dtype=float)
    dua, dva = _du_dv(quad_a)
    dub, dvb = _du_dv(quad_b)
    if normal is None:
        normal, _ = face_normal_and_area(quad_a)
    else:
        normal = normalized(np.asarray(normal, dtype=float))
    crb = np.cross(dub, dvb)
    nb = np.linalg.norm(crb)
    scale_b = max(np.linalg.norm(dub), np.linalg.norm(dvb)) ** 2
    if nb > 1e-13 * max(scale_b, 1e-300):
        sine = np.linalg.norm(np.cross(crb / nb, normal))
        if sine > tol:
            raise DegenerateGeometryError(
                f"quads are not parallel: normals differ by sin(angle) = {sine:.3e}")
    return 0.5 * float(np.linalg.det(np.stack([dua, dvb, normal]))
                       + np.linalg.det(np.stack([dub, dva, normal])))


def steiner_residual(net: QuadNet, gauss: GaussNet, face: tuple[int, int], t: float) -> float:
    """Deviation of the offset-face area from the quadratic offset polynomial
    (1 + t trace(Sigma) + t^2 det(Sigma)) area, relative to |area|.

    The offset face has vertices f_i + t n_i on the vertex-normal lines, and
    its generalized area is measured against the base face normal N. When the
    Gauss image's black face is parallel to the net's (adapted normals on
    principal nets) this is literally the intersection of the normal lines
    with the plane parallel to the black face at distance t. A normal line
    parallel to the black-face plane makes the offset construction degenerate
    and raises.
    """
    k, l = face
    quad = net.face(k, l)
    nq = gauss.quad(k, l)
    N, area = face_normal_and_area(quad)
    axial = nq @ N
    if np.any(np.abs(axial) <= 1e-12 * np.linalg.norm(nq, axis=-1)):
        raise DegenerateGeometryError(
            f"a vertex-normal line at face {face} is parallel to the black-face plane")
    du, dv = _du_dv(quad)
    area0 = float(np.linalg.det(np.stack([du, dv, N])))
    offset = quad + t * nq
    dut, dvt = _du_dv(offset)
    area_t = float(np.linalg.det(np.stack([dut, dvt, N])))
    forms = fundamental_forms(net, gauss, face)
    sigma = np.linalg.solve(forms.first, forms.second)
    poly = (1.0 + t * np.trace(sigma) + t * t * np.linalg.det(sigma)) * area0
    return abs(area_t - poly) / abs(area0)


def curvatures_via_mixed_area(net: QuadNet, gauss: GaussNet,
                              face: tuple[int, int]) -> tuple[float, float]:
    """Mean and Gauss curvature of a face from mixed areas:
    H = A(Qf, nt) / A(Qf, Qf), K = A(nt, nt) / A(Qf, Qf), with nt the Gauss
    quad projected onto the black-face plane. Independent of the eigenvalue
    route through the shape operator."""
    k, l = face
    quad = net.face(k, l)
    nq = gauss.quad(k, l)
    N, _ = face_normal_and_area(quad)
    base = quad.mean(axis=0)
    nt = nq - np.outer((nq - base) @ N, N)
    area = mixed_area(quad, quad, normal=N)
    if abs(area) <= 1e-28:
        raise DegenerateGeometryError(f"zero generalized area at face {face}")
    h = mixed_area(quad, nt, normal=N) / area
    kk = mixed_area(nt, nt, normal=N) / area
    return float(h), float(kk)


def white_face_normal_check(net: QuadNet) -> float:
    """Max angle (radians) between vertex normals and the formula normals of
    the corresponding white faces; an algebraic identity, so ~1e-16."""
    gauss = vertex_normals(net)
    cbp = build_checkerboard(net)
    worst = 0.0
    for k in range(1, net.rows - 1):
        for l in range(1, net.cols - 1):
            w = cbp.white_face(k, l)
            nw, _ = face_normal_and_area(w)
            worst = max(worst, float(np.linalg.norm(np.cross(nw, gauss.vectors[k, l]))))
    return worst

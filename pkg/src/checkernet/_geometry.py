"""Small geometric helpers shared across modules."""

from __future__ import annotations

import numpy as np

SQRT2 = float(np.sqrt(2.0))


def normalized(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ZeroDivisionError("cannot normalize the zero vector")
    return v / n


def quad_diameter(quad: np.ndarray) -> float:
    """Largest pairwise distance among the four vertices."""
    d = quad[:, None, :] - quad[None, :, :]
    return float(np.sqrt((d * d).sum(axis=-1)).max())


def fit_plane(points: np.ndarray):
    """Least-squares plane of points (n,3).

    Returns (origin, u1, u2, normal): origin is the centroid, (u1, u2) an
    orthonormal in-plane basis, normal the unit normal.
    """
    origin = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - origin)
    return origin, vt[0], vt[1], vt[2]


def plane_deviation(points: np.ndarray) -> float:
    """Max distance of the points from their least-squares plane."""
    origin, _, _, normal = fit_plane(points)
    return float(np.abs((points - origin) @ normal).max())


def to_chart(points: np.ndarray, origin: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """2D coordinates of 3D points in the chart spanned by (u1, u2) at origin."""
    d = points - origin
    return np.stack([d @ u1, d @ u2], axis=-1)


def cross2(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def intersect_on_line(a2, b2, g2, h2):
    """Intersection of line(a2,b2) with line(g2,h2) in 2D, as a homogeneous
    coefficient pair (lam, mu) with respect to the basis (a2, b2).

    The point is lam*a + mu*b in homogeneous terms: parameter t along a->b
    satisfies t*cross2(b-a, h-g) = cross2(g-a, h-g); (lam, mu) = (den-num, num)
    stays finite for parallel lines, where it degenerates to the ideal point
    (1, -1) of the direction b-a.
    """
    d = b2 - a2
    e = h2 - g2
    w = g2 - a2
    num = cross2(w, e)
    den = cross2(d, e)
    return den - num, num


IDEAL_PAIR = (1.0, -1.0)


def cross_ratio_pairs(p, q) -> float:
    """cr(a, b, P, Q) for P, Q given as homogeneous pairs w.r.t. (a, b).

    With a = (1,0) and b = (0,1) the 2x2 determinants reduce to
    cr = (mu_P * lam_Q) / (lam_P * mu_Q).
    """
    lam_p, mu_p = p
    lam_q, mu_q = q
    return (mu_p * lam_q) / (lam_p * mu_q)


def procrustes_similarity(source: np.ndarray, target: np.ndarray, allow_reflection: bool = False):
    """Best similarity s*R@x + t mapping source onto target (n,3 each).

    Returns (aligned_source, scale, rotation, translation). With
    allow_reflection the orthogonal factor may have determinant -1.
    """
    mx = source.mean(axis=0)
    my = target.mean(axis=0)
    xc = source - mx
    yc = target - my
    cov = yc.T @ xc / len(source)
    u, d, vt = np.linalg.svd(cov)
    sgn = np.eye(3)
    if not allow_reflection and np.linalg.det(u @ vt) < 0:
        sgn[2, 2] = -1.0
    rot = u @ sgn @ vt
    var = (xc * xc).sum() / len(source)
    scale = float(np.trace(np.diag(d) @ sgn) / var)
    trans = my - scale * (rot @ mx)
    aligned = scale * (source @ rot.T) + trans
    return aligned, scale, rot, trans


def rms_after_alignment(source: np.ndarray, target: np.ndarray, allow_reflection: bool = False,
                        relative: bool = True) -> float:
    """RMS vertex distance after Procrustes alignment, optionally divided by
    the target's RMS spread about its centroid."""
    aligned, _, _, _ = procrustes_similarity(source, target, allow_reflection)
    rms = float(np.sqrt(((aligned - target) ** 2).sum(axis=1).mean()))
    if relative:
        spread = float(np.sqrt(((target - target.mean(axis=0)) ** 2).sum(axis=1).mean()))
        return rms / spread
    return rms


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish random rotation matrix from a QR decomposition."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q

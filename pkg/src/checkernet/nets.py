"""Control nets and their inscribed checkerboard patterns.

A control net is a rectangular grid of 3D vertices f(k, l). Connecting the
midpoints of its edges yields the checkerboard pattern: one "black" face
inscribed in every control face (always a parallelogram whose edges are
parallel to the face diagonals) and one "white" face around every interior
control vertex (the midpoints of its four emanating edges).

Black-face edges act as discrete partial derivatives along the two diagonal
directions; white faces carry second-order information. A pattern is
orthogonal when the black faces are rectangles, conjugate when the white
faces are planar, and principal when it is both.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._geometry import SQRT2, fit_plane, quad_diameter
from .errors import GridTooSmallError, InconsistentCheckerboardError

__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "QuadNet",
    "Checkerboard",
    "Classification",
    "build_checkerboard",
    "reconstruct_control",
    "face_edge_vectors",
    "classify",
]


@dataclass(frozen=True)
class Tolerances:
    """Dimensionless tolerances, relative to local edge lengths."""

    tol_par: float = 1e-8
    tol_orth: float = 1e-8
    tol_plan: float = 1e-8
    tol_koenigs: float = 1e-8
    tol_eq: float = 1e-9

    def __post_init__(self):
        for name in ("tol_par", "tol_orth", "tol_plan", "tol_koenigs", "tol_eq"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class QuadNet:
    """Rectangular grid of 3D vertices; vertices[k, l] is the point f(k, l)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        if v.ndim != 3 or v.shape[2] != 3:
            raise ValueError(f"vertices must have shape (rows, cols, 3), got {v.shape}")
        if v.shape[0] < 2 or v.shape[1] < 2:
            raise GridTooSmallError(f"need at least a 2x2 grid, got {v.shape[0]}x{v.shape[1]}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices contain non-finite coordinates")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def rows(self) -> int:
        return self.vertices.shape[0]

    @property
    def cols(self) -> int:
        return self.vertices.shape[1]

    def vertex(self, k: int, l: int) -> np.ndarray:
        return self.vertices[k, l]

    def face(self, k: int, l: int) -> np.ndarray:
        """Control face (f, f1, f12, f2) at (k, l), shape (4, 3)."""
        v = self.vertices
        return np.stack([v[k, l], v[k + 1, l], v[k + 1, l + 1], v[k, l + 1]])

    def require_min_size(self, rows: int, cols: int, what: str) -> None:
        if self.rows < rows or self.cols < cols:
            raise GridTooSmallError(
                f"{what} needs at least a {rows}x{cols} grid, got {self.rows}x{self.cols}")


@dataclass(frozen=True)
class Checkerboard:
    """Checkerboard pattern stored through its vertices (the edge midpoints).

    hmid[k, l] is the midpoint of the k-direction edge (f(k,l), f(k+1,l)),
    shape (rows-1, cols, 3); vmid[k, l] the midpoint of (f(k,l), f(k,l+1)),
    shape (rows, cols-1, 3). Black/white faces are assembled by index, so the
    black/white labeling is fixed by provenance rather than a parity flag.
    """

    hmid: np.ndarray
    vmid: np.ndarray
    control: QuadNet | None = field(default=None, compare=False)

    def __post_init__(self):
        hm = np.ascontiguousarray(np.asarray(self.hmid, dtype=float))
        vm = np.ascontiguousarray(np.asarray(self.vmid, dtype=float))
        if hm.ndim != 3 or vm.ndim != 3 or hm.shape[2] != 3 or vm.shape[2] != 3:
            raise ValueError("hmid/vmid must have shape (*, *, 3)")
        if hm.shape[0] + 1 != vm.shape[0] or vm.shape[1] + 1 != hm.shape[1]:
            raise ValueError(
                f"inconsistent midpoint grids: hmid {hm.shape}, vmid {vm.shape}")
        hm.setflags(write=False)
        vm.setflags(write=False)
        object.__setattr__(self, "hmid", hm)
        object.__setattr__(self, "vmid", vm)

    @property
    def rows(self) -> int:
        """Row count of the (possibly implicit) control net."""
        return self.vmid.shape[0]

    @property
    def cols(self) -> int:
        return self.hmid.shape[1]

    def black_face(self, k: int, l: int) -> np.ndarray:
        """Black face inscribed in control face (k, l), vertices in cyclic
        order (midpoints of edges (f,f1), (f1,f12), (f12,f2), (f2,f))."""
        return np.stack([self.hmid[k, l], self.vmid[k + 1, l],
                         self.hmid[k, l + 1], self.vmid[k, l]])

    def white_face(self, k: int, l: int) -> np.ndarray:
        """White face around interior control vertex (k, l), in cyclic order
        (left, down, right, up) = midpoints of the edges towards
        f(k-1,l), f(k,l-1), f(k+1,l), f(k,l+1)."""
        if not (1 <= k <= self.rows - 2 and 1 <= l <= self.cols - 2):
            raise IndexError(f"({k}, {l}) is not an interior vertex")
        return np.stack([self.hmid[k - 1, l], self.vmid[k, l - 1],
                         self.hmid[k, l], self.vmid[k, l]])

    def black_faces(self) -> np.ndarray:
        """All black faces, shape (rows-1, cols-1, 4, 3)."""
        return np.stack([self.hmid[:, :-1], self.vmid[1:, :],
                         self.hmid[:, 1:], self.vmid[:-1, :]], axis=2)

    def white_faces(self) -> np.ndarray:
        """All white faces, shape (rows-2, cols-2, 4, 3); entry (i, j) belongs
        to control vertex (i+1, j+1)."""
        return np.stack([self.hmid[:-1, 1:-1], self.vmid[1:-1, :-1],
                         self.hmid[1:, 1:-1], self.vmid[1:-1, 1:]], axis=2)

    def vertex_array(self) -> np.ndarray:
        """All checkerboard vertices as one (n, 3) array (hmid then vmid)."""
        return np.concatenate([self.hmid.reshape(-1, 3), self.vmid.reshape(-1, 3)])


@dataclass(frozen=True)
class Classification:
    orthogonal: bool
    conjugate: bool
    principal: bool
    orthogonality_residual: float
    planarity_residual: float
    degenerate_black: tuple = ()
    degenerate_white: tuple = ()


def build_checkerboard(net: QuadNet) -> Checkerboard:
    """Checkerboard pattern of a control net by midpoint subdivision.

    Black faces are exact parallelograms by construction: with midpoints
    m0..m3 in cyclic order, m1 - m0 = m2 - m3 = (f12 - f)/2.
    """
    v = net.vertices
    hmid = 0.5 * (v[:-1, :] + v[1:, :])
    vmid = 0.5 * (v[:, :-1] + v[:, 1:])
    return Checkerboard(hmid=hmid, vmid=vmid, control=net)


def reconstruct_control(cbp: Checkerboard, seed: np.ndarray | None = None,
                        tol: float | None = None) -> QuadNet:
    """Control net of a checkerboard pattern by iterated point reflection.

    Each control vertex is the reflection of its predecessor through the
    connecting checkerboard vertex, so the result is determined by the choice
    of f(0,0) = seed (a three-parameter family). seed=None picks the member
    that minimizes the summed squared edge lengths, which is the smooth
    representative for patterns sampled from surfaces.

    Raises InconsistentCheckerboardError when reflection paths disagree by
    more than tol (relative to the mean edge length): that happens exactly
    when some black face fails the parallelogram identity.
    """
    hm, vm = cbp.hmid, cbp.vmid
    rows, cols = cbp.rows, cbp.cols
    f = np.zeros((rows, cols, 3))
    for l in range(1, cols):
        f[0, l] = 2.0 * vm[0, l - 1] - f[0, l - 1]
    for k in range(1, rows):
        f[k, :] = 2.0 * hm[k - 1, :] - f[k - 1, :]

    # non-tree edges check: every vmid must be the midpoint it claims to be
    gap = 2.0 * vm[1:, :] - f[1:, :-1] - f[1:, 1:]
    max_gap = float(np.linalg.norm(gap, axis=-1).max()) if gap.size else 0.0
    edge_scale = float(np.linalg.norm(f[1:, :] - f[:-1, :], axis=-1).mean())
    if tol is None:
        tol = DEFAULT_TOLERANCES.tol_par
    if max_gap > tol * max(edge_scale, 1e-300):
        raise InconsistentCheckerboardError(
            f"reflection paths disagree by {max_gap:.3e} (relative "
            f"{max_gap / edge_scale:.3e}); the pattern has no control net",
            max_disagreement=max_gap)

    if seed is None:
        # f_s(k,l) = f(k,l) + (-1)^(k+l) d; pick d minimizing sum of squared edges
        sgn = (-1.0) ** (np.add.outer(np.arange(rows), np.arange(cols)))
        num = np.zeros(3)
        cnt = 0
        for df, sg in ((f[1:, :] - f[:-1, :], sgn[:-1, :]),
                       (f[:, 1:] - f[:, :-1], sgn[:, :-1])):
            num += (sg[..., None] * df).sum(axis=(0, 1))
            cnt += sg.size
        d = num / (2.0 * cnt)
        f = f + ((-1.0) ** (np.add.outer(np.arange(rows), np.arange(cols))))[..., None] * d
    else:
        seed = np.asarray(seed, dtype=float)
        sgn = (-1.0) ** (np.add.outer(np.arange(rows), np.arange(cols)))
        f = f + sgn[..., None] * (seed - f[0, 0])
    return QuadNet(f)


def face_edge_vectors(cbp: Checkerboard, face: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Edge vectors (du, dv) of the black parallelogram at `face`, scaled by
    sqrt(2) so that du = (f12 - f)/sqrt(2) and dv = (f2 - f1)/sqrt(2) in terms
    of the control face. These approximate the directional derivatives along
    the two diagonal directions of the parameter grid."""
    k, l = face
    b = cbp.black_face(k, l)
    return SQRT2 * (b[1] - b[0]), SQRT2 * (b[2] - b[1])


def _black_edge_vectors(cbp: Checkerboard) -> tuple[np.ndarray, np.ndarray]:
    b = cbp.black_faces()
    return SQRT2 * (b[..., 1, :] - b[..., 0, :]), SQRT2 * (b[..., 2, :] - b[..., 1, :])


def classify(cbp: Checkerboard, tol: Tolerances = DEFAULT_TOLERANCES) -> Classification:
    """Classify a pattern as orthogonal / conjugate / principal.

    Orthogonality residual: max over black faces of |<du, dv>| / (|du| |dv|).
    Planarity residual: max over white faces of the distance of any vertex to
    the face's least-squares plane, divided by the face diameter. Degenerate
    faces (a vanishing edge or diameter) are excluded from the maxima and
    reported with a warning.
    """
    du, dv = _black_edge_vectors(cbp)
    nu = np.linalg.norm(du, axis=-1)
    nv = np.linalg.norm(dv, axis=-1)
    scale = max(float(nu.max(initial=0.0)), float(nv.max(initial=0.0)), 1e-300)
    ok = (nu > 1e-14 * scale) & (nv > 1e-14 * scale)
    degenerate_black = tuple(map(tuple, np.argwhere(~ok)))
    inner = np.abs(np.einsum("klx,klx->kl", du, dv))
    orth_res = float((inner[ok] / (nu[ok] * nv[ok])).max(initial=0.0))

    whites = cbp.white_faces()
    degenerate_white = []
    plan_res = 0.0
    for i in range(whites.shape[0]):
        for j in range(whites.shape[1]):
            quad = whites[i, j]
            diam = quad_diameter(quad)
            if diam <= 1e-14 * scale:
                degenerate_white.append((i + 1, j + 1))
                continue
            origin, _, _, normal = fit_plane(quad)
            plan_res = max(plan_res, float(np.abs((quad - origin) @ normal).max()) / diam)

    if degenerate_black or degenerate_white:
        warnings.warn(
            f"excluded degenerate faces from classification: "
            f"{len(degenerate_black)} black, {len(degenerate_white)} white",
            stacklevel=2)

    orthogonal = orth_res <= tol.tol_orth
    conjugate = plan_res <= tol.tol_plan
    return Classification(
        orthogonal=orthogonal,
        conjugate=conjugate,
        principal=orthogonal and conjugate,
        orthogonality_residual=orth_res,
        planarity_residual=plan_res,
        degenerate_black=degenerate_black,
        degenerate_white=tuple(degenerate_white),
    )

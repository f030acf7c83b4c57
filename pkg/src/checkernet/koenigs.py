"""Koenigs checkerboard patterns: conic criterion, multiplicative one-form,
Laplace invariants, sine-ratio condition, and dualization.

Around every interior black face the supporting lines of neighboring edges
meet in six points: two ideal ones from the parallelogram's own edge pairs
and four from the adjacent white faces. The pattern is Koenigs when those six
points lie on a common conic (necessarily a hyperbola). Equivalently: the
cross-ratio one-form on the edges closes multiplicatively around black faces
(it always closes around white faces, by Menelaus), the two Laplace
invariants of every control face agree, a sine/length product equals one, and
an edge-parallel dual pattern with reversed-orientation similar black faces
exists. All cross-ratios are computed through homogeneous coefficient pairs
so points at infinity need no special cases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._geometry import (IDEAL_PAIR, SQRT2, cross_ratio_pairs, fit_plane,
                        intersect_on_line, to_chart)
from .errors import (DegenerateGeometryError, GridTooSmallError,
                     NonConjugatePatternError, NonKoenigsPatternError)
from .nets import (Checkerboard, DEFAULT_TOLERANCES, QuadNet, classify,
                   reconstruct_control)

__all__ = [
    "SixPoints",
    "six_points",
    "conic_residual",
    "one_form",
    "one_form_closure",
    "laplace_invariants",
    "KoenigsVerdict",
    "is_koenigs",
    "sine_ratio_product",
    "DualizationResult",
    "dualize",
    "koenigs_generator_2d",
    "hyperbola_inscribed_residual",
    "koenigs_face_range",
]


def koenigs_face_range(cbp_or_net) -> tuple[range, range]:
    """Black faces with the full two-ring neighborhood needed by the Koenigs
    machinery: k in [1, rows-3], l in [1, cols-3]."""
    rows, cols = cbp_or_net.rows, cbp_or_net.cols
    if rows < 4 or cols < 4:
        raise GridTooSmallError(
            f"Koenigs queries need at least a 4x4 control grid, got {rows}x{cols}")
    return range(1, rows - 2), range(1, cols - 2)


def _edge_and_far(cbp: Checkerboard, k: int, l: int, side: int):
    """Directed edge (a, b) = side of black face (k, l) in ccw order, plus the
    far edge (g, h) of the white face to the right of the edge."""
    hm, vm = cbp.hmid, cbp.vmid
    b0, b1, b2, b3 = cbp.black_face(k, l)
    if side == 0:
        return b0, b1, vm[k + 1, l - 1], hm[k + 1, l]
    if side == 1:
        return b1, b2, hm[k + 1, l + 1], vm[k + 1, l + 1]
    if side == 2:
        return b2, b3, vm[k, l + 1], hm[k - 1, l + 1]
    if side == 3:
        return b3, b0, hm[k - 1, l], vm[k, l - 1]
    raise ValueError("side must be in 0..3")


def _pair_on_line(a, b, g, h):
    """Homogeneous pair of line(a,b) ^ line(g,h) w.r.t. (a, b), computed in
    the least-squares plane of the four points; also returns the out-of-plane
    deviation (skewness of the line pair)."""
    pts = np.stack([a, b, g, h])
    origin, u1, u2, normal = fit_plane(pts)
    skew = float(np.abs((pts - origin) @ normal).max())
    a2, b2, g2, h2 = to_chart(pts, origin, u1, u2)
    return intersect_on_line(a2, b2, g2, h2), skew


@dataclass(frozen=True)
class SixPoints:
    """The six intersection points around a black face, as homogeneous
    (x, y, z) triples in an orthonormal chart of the black-face plane; the
    first two are the ideal points of the parallelogram's edge directions."""

    points: np.ndarray               # (6, 3)
    origin: np.ndarray               # chart origin (black-face centroid)
    basis_u: np.ndarray
    basis_v: np.ndarray
    coplanarity_residual: float      # max line-pair skew / mean edge length
    ideal_far: tuple                 # indices (0-based) of far points at infinity
    coincident_pairs: tuple          # projectively coinciding point pairs

    def affine(self, i: int) -> np.ndarray:
        """Affine chart coordinates of point i (fails for ideal points)."""
        x, y, z = self.points[i]
        if abs(z) <= 1e-14 * max(abs(x), abs(y)):
            raise DegenerateGeometryError(f"point {i} is at infinity")
        return np.array([x / z, y / z])

    def to_world(self, i: int) -> np.ndarray:
        """3D position of a finite point i in the black-face plane."""
        x, y = self.affine(i)
        return self.origin + x * self.basis_u + y * self.basis_v


def six_points(cbp: Checkerboard, face: tuple[int, int]) -> SixPoints:
    """Intersection points of the supporting lines of neighboring edges
    around a black face.

    Point order: [p1, p2] ideal points of the black face's two edge
    directions, then [p3, p4, p5, p6] from the white faces below, above, left
    and right of the face (near edge of the black face against the far edge
    of that white face). Parallel near/far pairs yield ideal points and are
    flagged; the conic criterion is not meaningful for coinciding points.
    """
    k, l = face
    ks, ls = koenigs_face_range(cbp)
    if k not in ks or l not in ls:
        raise GridTooSmallError(f"face {face} lacks the two-ring neighborhood")

    quad = cbp.black_face(k, l)
    origin, _, _, _ = fit_plane(quad)
    du = quad[1] - quad[0]
    dv = quad[2] - quad[1]
    u1 = du / np.linalg.norm(du)
    v_perp = dv - (dv @ u1) * u1
    u2 = v_perp / np.linalg.norm(v_perp)
    edge_scale = 0.5 * (np.linalg.norm(du) + np.linalg.norm(dv))

    def chart_h(point3):
        d = point3 - origin
        return np.array([d @ u1, d @ u2, 1.0])

    def chart_ideal(direction3):
        return np.array([direction3 @ u1, direction3 @ u2, 0.0])

    points = np.zeros((6, 3))
    points[0] = chart_ideal(du)
    points[1] = chart_ideal(dv)

    ideal_far = []
    worst_skew = 0.0
    # sides 0,2,3,1 host p3, p4, p5, p6 respectively
    for dest, side in ((2, 0), (3, 2), (4, 3), (5, 1)):
        a, b, g, h = _edge_and_far(cbp, k, l, side)
        d1 = b - a
        d2 = h - g
        cr = np.cross(d1, d2)
        if np.linalg.norm(cr) <= 1e-12 * np.linalg.norm(d1) * np.linalg.norm(d2):
            points[dest] = chart_ideal(d1)
            ideal_far.append(dest)
            continue
        # closest points of the two (possibly skew) lines; midpoint as intersection
        w = g - a
        denom = cr @ cr
        t = np.linalg.det(np.stack([w, d2, cr])) / denom
        s = np.linalg.det(np.stack([w, d1, cr])) / denom
        p_near = a + t * d1
        p_far = g + s * d2
        worst_skew = max(worst_skew, float(np.linalg.norm(p_near - p_far)))
        points[dest] = chart_h(0.5 * (p_near + p_far))

    unit = points / np.linalg.norm(points, axis=1, keepdims=True)
    coincident = []
    for i in range(6):
        for j in range(i + 1, 6):
            if np.linalg.norm(np.cross(unit[i], unit[j])) <= 1e-9:
                coincident.append((i, j))
    return SixPoints(points=points, origin=origin, basis_u=u1, basis_v=u2,
                     coplanarity_residual=worst_skew / edge_scale,
                     ideal_far=tuple(ideal_far), coincident_pairs=tuple(coincident))


def conic_residual(points: np.ndarray) -> float:
    """|det| of the 6x6 conic-incidence system A x^2 + B xy + C y^2 + D xz +
    E yz + F z^2 = 0 through six homogeneous points, with every monomial row
    scaled to unit max magnitude; zero iff the points lie on a common conic."""
    points = np.asarray(points, dtype=float).reshape(6, 3)
    rows = np.empty((6, 6))
    for i, (x, y, z) in enumerate(points):
        rows[i] = (x * x, x * y, y * y, x * z, y * z, z * z)
        m = np.abs(rows[i]).max()
        if m > 0:
            rows[i] /= m
    return abs(float(np.linalg.det(rows)))


def one_form(cbp: Checkerboard, face: tuple[int, int], side: int) -> float:
    """Multiplicative one-form on a directed black-face edge (ccw side 0..3,
    black face on the left): the cross-ratio of the edge endpoints against the
    intersections with the opposite edges of the two adjacent faces. The black
    side contributes its ideal point (parallel opposite edge); the white side
    the intersection with its far edge."""
    k, l = face
    a, b, g, h = _edge_and_far(cbp, k, l, side)
    pair_white, _ = _pair_on_line(a, b, g, h)
    return cross_ratio_pairs(IDEAL_PAIR, pair_white)


def one_form_closure(cbp: Checkerboard, face_ref: tuple[str, int, int]) -> float:
    """Product of the one-form around a face's boundary in ccw order.

    White faces close to 1 unconditionally (Menelaus); black faces close to 1
    iff the pattern is Koenigs there.
    """
    kind, k, l = face_ref
    if kind == "black":
        prod = 1.0
        for side in range(4):
            prod *= one_form(cbp, (k, l), side)
        return prod
    if kind == "white":
        cyc = cbp.white_face(k, l)
        prod = 1.0
        for i in range(4):
            a, b = cyc[i], cyc[(i + 1) % 4]
            g, h = cyc[(i + 2) % 4], cyc[(i + 3) % 4]
            pair_own, _ = _pair_on_line(a, b, g, h)
            prod *= cross_ratio_pairs(pair_own, IDEAL_PAIR)
        return prod
    raise ValueError("face_ref kind must be 'black' or 'white'")


def _invariant_on_line(p_from: np.ndarray, p_to: np.ndarray,
                       g1: np.ndarray, g2: np.ndarray,
                       h1: np.ndarray, h2: np.ndarray,
                       skew_tol: float) -> float:
    """cr(p_from, p_to, P, Q) with P = line(g1,g2) ^ line(p_from,p_to) and
    Q = line(h1,h2) ^ line(p_from,p_to); each intersection is evaluated in the
    least-squares plane of its own four points."""
    pair_p, skew_p = _pair_on_line(p_from, p_to, g1, g2)
    pair_q, skew_q = _pair_on_line(p_from, p_to, h1, h2)
    scale = np.linalg.norm(p_to - p_from)
    if max(skew_p, skew_q) > skew_tol * max(scale, 1e-300):
        raise NonConjugatePatternError(
            f"supporting line pairs are skew beyond tolerance "
            f"({max(skew_p, skew_q) / scale:.3e} relative)",
            residual=max(skew_p, skew_q) / scale)
    return cross_ratio_pairs(pair_p, pair_q)


def laplace_invariants(net: QuadNet, face: tuple[int, int],
                       skew_tol: float = 1e-6) -> tuple[float, float]:
    """The two Laplace invariants of a control face: cross-ratios of the face
    diagonals' endpoints against the intersections with the one-ring and
    two-ring diagonal lines. Both are projective invariants of the control
    net; they agree on every face iff the checkerboard pattern is Koenigs.
    """
    k, l = face
    ks, ls = koenigs_face_range(net)
    if k not in ks or l not in ls:
        raise GridTooSmallError(f"face {face} lacks the two-ring neighborhood")
    v = net.vertices
    inv1 = _invariant_on_line(v[k + 1, l], v[k, l + 1],
                              v[k - 1, l], v[k, l - 1],
                              v[k + 2, l + 1], v[k + 1, l + 2], skew_tol)
    inv2 = _invariant_on_line(v[k, l], v[k + 1, l + 1],
                              v[k + 2, l], v[k + 1, l - 1],
                              v[k - 1, l + 1], v[k, l + 2], skew_tol)
    return inv1, inv2


@dataclass(frozen=True)
class KoenigsVerdict:
    is_koenigs: bool
    laplace_residual: float          # max over faces, |inv1 - inv2| normalized
    laplace_residuals: np.ndarray    # per face, (rows-3, cols-3)
    conic_residuals: np.ndarray      # per face; NaN where degenerate
    one_form_residuals: np.ndarray   # per face, |closure - 1|
    degenerate_faces: tuple          # faces with coinciding six-points


def is_koenigs(cbp: Checkerboard, tol: float = DEFAULT_TOLERANCES.tol_koenigs,
               conjugacy_tol: float = 1e-6) -> KoenigsVerdict:
    """Koenigs test for a conjugate checkerboard pattern.

    The primary criterion is equality of the Laplace invariants on every
    measurable control face (valid also when six-points coincide); the conic
    determinant and one-form closure are evaluated as corroborating
    diagnostics. The control net is reconstructed when the pattern carries
    none; the invariants do not depend on that choice.
    """
    cls = classify(cbp)
    if cls.planarity_residual > conjugacy_tol:
        raise NonConjugatePatternError(
            f"pattern is not conjugate (planarity residual "
            f"{cls.planarity_residual:.3e} > {conjugacy_tol:.1e})",
            residual=cls.planarity_residual)
    net = cbp.control if cbp.control is not None else reconstruct_control(cbp)
    ks, ls = koenigs_face_range(cbp)
    shape = (len(ks), len(ls))
    lap = np.zeros(shape)
    con = np.full(shape, np.nan)
    ofr = np.zeros(shape)
    degenerate = []
    for i, k in enumerate(ks):
        for j, l in enumerate(ls):
            inv1, inv2 = laplace_invariants(net, (k, l), skew_tol=max(conjugacy_tol, 1e-9))
            lap[i, j] = abs(inv1 - inv2) / max(abs(inv1), abs(inv2), 1e-300)
            ofr[i, j] = abs(one_form_closure(cbp, ("black", k, l)) - 1.0)
            sp = six_points(cbp, (k, l))
            if sp.coincident_pairs:
                degenerate.append((k, l))
            else:
                con[i, j] = conic_residual(sp.points)
    worst = float(lap.max()) if lap.size else 0.0
    return KoenigsVerdict(
        is_koenigs=worst <= tol,
        laplace_residual=worst,
        laplace_residuals=lap,
        conic_residuals=con,
        one_form_residuals=ofr,
        degenerate_faces=tuple(degenerate),
    )


def sine_ratio_product(cbp: Checkerboard, face: tuple[int, int]) -> float:
    """Angle/length product around a black face.

    Every directed edge contributes (|b - e_b| sin t_b) / (|a - e_a| sin t_a),
    where e_a, e_b are the far vertices of the right-hand white face adjacent
    to a resp. b and t_a, t_b its interior angles there. Grouping the factors
    per white face and per exterior black face turns the product into the
    classical sine-quotient times alternating edge-length-ratio condition; it
    equals |one-form closure| and is 1 iff the face is Koenigs (six points
    distinct). Computed purely from angles and lengths, with no intersections,
    so it is an independent route."""
    k, l = face
    hm, vm = cbp.hmid, cbp.vmid

    def white_cycle(wk, wl):
        return np.stack([hm[wk - 1, wl], vm[wk, wl - 1], hm[wk, wl], vm[wk, wl]])

    # (white face, index of a, index of b) in the white cycle [L, D, R, U]
    layout = {
        0: ((k + 1, l), 0, 3),      # a = L, b = U
        1: ((k + 1, l + 1), 1, 0),  # a = D, b = L
        2: ((k, l + 1), 2, 1),      # a = R, b = D
        3: ((k, l), 3, 2),          # a = U, b = R
    }

    def interior_sin(cyc, i):
        u = cyc[(i + 1) % 4] - cyc[i]
        w = cyc[(i - 1) % 4] - cyc[i]
        nu, nw = np.linalg.norm(u), np.linalg.norm(w)
        if nu == 0 or nw == 0:
            raise DegenerateGeometryError("zero-length white-face edge")
        s = np.linalg.norm(np.cross(u, w)) / (nu * nw)
        if s == 0:
            raise DegenerateGeometryError("vanishing sine in white face")
        return s

    prod = 1.0
    for side in range(4):
        (wk, wl), ia, ib = layout[side]
        cyc = white_cycle(wk, wl)
        ie_a = (2 * ia - ib) % 4
        ie_b = (2 * ib - ia) % 4
        len_a = np.linalg.norm(cyc[ia] - cyc[ie_a])
        len_b = np.linalg.norm(cyc[ib] - cyc[ie_b])
        if len_a == 0 or len_b == 0:
            raise DegenerateGeometryError("zero-length edge in white face")
        prod *= (len_b * interior_sin(cyc, ie_b)) / (len_a * interior_sin(cyc, ie_a))
    return prod


@dataclass(frozen=True)
class DualizationResult:
    dual: Checkerboard
    scales: np.ndarray           # per black face, (rows-1, cols-1)
    closure_residual: float      # max white-face closure gap / local edge length
    closure_gaps: np.ndarray     # per white face, (rows-2, cols-2)
    orientation: str


def dualize(cbp: Checkerboard, alpha0: float = 1.0, alpha1: float = 1.0,
            orientation: str = "reversing",
            tol: float = DEFAULT_TOLERANCES.tol_koenigs) -> DualizationResult:
    """Edge-parallel companion pattern with similar black faces.

    Each black face is copied at scale alpha (orientation "reversing" flips
    the dv-direction edges, giving the dual; "preserving" keeps both, giving a
    conformal Combescure transform). The scales of the two seed faces (0,0)
    and (1,0) are alpha0, alpha1; around every white face the scaled edges
    must close, which propagates all other scales (least-squares along the
    face plane) and is obstructed exactly by the Koenigs condition. Closure is
    re-measured on all white faces; a gap beyond tol raises
    NonKoenigsPatternError with the full result attached.
    """
    if orientation not in ("reversing", "preserving"):
        raise ValueError("orientation must be 'reversing' or 'preserving'")
    rows, cols = cbp.rows, cbp.cols
    if rows < 3 or cols < 3:
        raise GridTooSmallError("dualization needs at least a 3x3 control grid")
    hm, vm = cbp.hmid, cbp.vmid
    nfk, nfl = rows - 1, cols - 1
    alpha = np.full((nfk, nfl), np.nan)
    alpha[0, 0] = alpha0
    alpha[1, 0] = alpha1

    sgn = np.array([-1.0, 1.0, -1.0, 1.0]) if orientation == "reversing" \
        else np.array([1.0, 1.0, 1.0, 1.0])

    def white_edges(k, l):
        left, down, right, up = cbp.white_face(k, l)
        return np.stack([down - left, right - down, up - right, left - up])

    def black_idx(k, l):
        return ((k - 1, l - 1), (k, l - 1), (k, l), (k - 1, l))

    for l in range(1, cols - 1):
        for k in range(1, rows - 1):
            edges = white_edges(k, l)
            idx = black_idx(k, l)
            known = [i for i in range(4) if not np.isnan(alpha[idx[i]])]
            unknown = [i for i in range(4) if np.isnan(alpha[idx[i]])]
            if not unknown:
                continue
            rhs = -sum(sgn[i] * alpha[idx[i]] * edges[i] for i in known)
            mat = np.stack([sgn[i] * edges[i] for i in unknown], axis=1)
            sol, _, rank, _ = np.linalg.lstsq(mat, rhs, rcond=None)
            if rank < len(unknown):
                raise DegenerateGeometryError(
                    f"degenerate white face at vertex ({k}, {l}): "
                    "propagation directions are parallel")
            for j, i in enumerate(unknown):
                alpha[idx[i]] = sol[j]

    gaps = np.zeros((rows - 2, cols - 2))
    for l in range(1, cols - 1):
        for k in range(1, rows - 1):
            edges = white_edges(k, l)
            idx = black_idx(k, l)
            gap = sum(sgn[i] * alpha[idx[i]] * edges[i] for i in range(4))
            scale = max(np.linalg.norm(e) * abs(alpha[idx[i]])
                        for i, e in enumerate(edges))
            gaps[k - 1, l - 1] = np.linalg.norm(gap) / max(scale, 1e-300)
    closure_residual = float(gaps.max()) if gaps.size else 0.0

    # assemble the dual vertices: within each black face the corner offsets are
    # the original edges scaled by alpha, with dv-direction edges flipped when
    # reversing; faces in scan order always touch an already placed corner
    s_dv = -1.0 if orientation == "reversing" else 1.0
    hm2 = np.full_like(hm, np.nan)
    vm2 = np.full_like(vm, np.nan)
    hm2[0, 0] = hm[0, 0]

    def corner_slots(k, l):
        return (("h", k, l), ("v", k + 1, l), ("h", k, l + 1), ("v", k, l))

    def get(slot):
        t, i, j = slot
        return hm2[i, j] if t == "h" else vm2[i, j]

    def put(slot, val):
        t, i, j = slot
        if t == "h":
            hm2[i, j] = val
        else:
            vm2[i, j] = val

    for l in range(nfl):
        for k in range(nfk):
            quad = cbp.black_face(k, l)
            slots = corner_slots(k, l)
            a = alpha[k, l]
            steps = [a * (quad[1] - quad[0]),          # du-direction
                     s_dv * a * (quad[2] - quad[1]),   # dv-direction
                     a * (quad[3] - quad[2]),
                     s_dv * a * (quad[0] - quad[3])]
            anchor = next(i for i in range(4) if not np.isnan(get(slots[i])).any())
            pos = get(slots[anchor])
            for step in range(1, 4):
                i_prev = (anchor + step - 1) % 4
                i_cur = (anchor + step) % 4
                pos = pos + steps[i_prev]
                if np.isnan(get(slots[i_cur])).any():
                    put(slots[i_cur], pos)

    dual = Checkerboard(hmid=hm2, vmid=vm2, control=None)
    result = DualizationResult(dual=dual, scales=alpha,
                               closure_residual=closure_residual,
                               closure_gaps=gaps, orientation=orientation)
    if closure_residual > tol:
        err = NonKoenigsPatternError(
            f"dual edges do not close (max white-face gap {closure_residual:.3e}); "
            "the pattern is not Koenigs within tolerance",
            residual=closure_residual)
        err.result = result
        raise err
    if np.nanmin(alpha) <= 0:
        err = NonKoenigsPatternError(
            f"propagated similarity ratios are not positive "
            f"(min {float(np.nanmin(alpha)):.3e})",
            residual=closure_residual)
        err.result = result
        raise err
    return result


def koenigs_generator_2d(m: np.ndarray, n: np.ndarray, p: np.ndarray,
                         k_range, l_range) -> QuadNet:
    """Planar control net f(k, l) = M^k N^l P from two commuting projective
    maps of the plane, dehomogenized into z = 0. Such nets are always Koenigs.
    """
    m = np.asarray(m, dtype=float).reshape(3, 3)
    n = np.asarray(n, dtype=float).reshape(3, 3)
    p = np.asarray(p, dtype=float).reshape(3)
    comm = np.linalg.norm(m @ n - n @ m) / max(np.linalg.norm(m @ n), 1e-300)
    if comm > 1e-12:
        raise ValueError(f"maps do not commute (relative residual {comm:.3e})")
    ks = list(k_range)
    ls = list(l_range)
    if len(ks) < 2 or len(ls) < 2:
        raise GridTooSmallError("need at least two parameter values per direction")
    mk = {k: np.linalg.matrix_power(m, k) for k in ks}
    nl = {l: np.linalg.matrix_power(n, l) for l in ls}
    f = np.zeros((len(ks), len(ls), 3))
    for i, k in enumerate(ks):
        for j, l in enumerate(ls):
            hom = mk[k] @ (nl[l] @ p)
            if abs(hom[2]) <= 1e-12 * np.linalg.norm(hom):
                raise DegenerateGeometryError(
                    f"generated point at (k={k}, l={l}) is at infinity")
            f[i, j, 0] = hom[0] / hom[2]
            f[i, j, 1] = hom[1] / hom[2]
    return QuadNet(f)


def hyperbola_inscribed_residual(p1, p2, p3, p4) -> float:
    """Difference of the two slope quotients in the inscribed-angle relation
    for rectangular hyperbolas y = c/x: zero iff the four points (in
    asymptote-aligned coordinates) lie on one such hyperbola. Serves as an
    independent oracle for the conic criterion."""
    pts = []
    for p in (p1, p2, p3, p4):
        p = np.asarray(p, dtype=float).ravel()
        if p.size == 3:
            if abs(p[2]) <= 1e-14 * max(abs(p[0]), abs(p[1])):
                raise DegenerateGeometryError("point at infinity has no chart position")
            p = p[:2] / p[2]
        pts.append(p)
    (x1, y1), (x2, y2), (x3, y3), (x4, y4) = pts
    for d in (x4 - x1, y4 - y2, x3 - x1, y3 - y2):
        if d == 0:
            raise DegenerateGeometryError(
                "vanishing coordinate difference; the slope quotients are undefined")
    lhs = (y4 - y1) * (x4 - x2) / ((x4 - x1) * (y4 - y2))
    rhs = (y3 - y1) * (x3 - x2) / ((x3 - x1) * (y3 - y2))
    return float(lhs - rhs)

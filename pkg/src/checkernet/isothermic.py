"""Isothermic patterns, unit-sphere congruence fitting, minimal surfaces and
their Moebius-induced (Goursat) transforms.

A pattern is isothermic when it is principal and Koenigs; the class is closed
under dualization and Moebius transformations. An isothermic net whose sphere
congruence family contains a member orthogonal to the unit sphere acts as a
Gauss image: its dual is a minimal net (the per-face principal curvatures sum
to zero), and transforming the Gauss congruence by a sphere-preserving
Moebius map before dualizing produces the Goursat relatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import principal_curvature_table
from .errors import NotIsothermicError, NotOnUnitSphereError
from .koenigs import DualizationResult, KoenigsVerdict, dualize, is_koenigs
from .moebius import MoebiusTransform, SphereCongruence, apply_moebius, build_congruence
from .nets import (Checkerboard, Classification, DEFAULT_TOLERANCES, QuadNet,
                   Tolerances, build_checkerboard, classify, reconstruct_control)

__all__ = [
    "IsothermicVerdict",
    "is_isothermic",
    "UnitSphereFit",
    "on_unit_sphere",
    "MinimalResult",
    "minimal_from_gauss",
    "goursat",
]


@dataclass(frozen=True)
class IsothermicVerdict:
    classification: Classification
    koenigs: KoenigsVerdict | None   # None when the pattern is not conjugate
    is_isothermic: bool

    @property
    def residual(self) -> float:
        """Worst of the principal and Koenigs residuals."""
        r = max(self.classification.orthogonality_residual,
                self.classification.planarity_residual)
        if self.koenigs is not None:
            r = max(r, self.koenigs.laplace_residual)
        return r


def is_isothermic(cbp: Checkerboard, tol: Tolerances = DEFAULT_TOLERANCES) -> IsothermicVerdict:
    """Isothermic = principal and Koenigs. The Koenigs test is skipped (and
    the verdict is negative) when the pattern is not even conjugate."""
    cls = classify(cbp, tol)
    if not cls.conjugate:
        return IsothermicVerdict(classification=cls, koenigs=None, is_isothermic=False)
    verdict = is_koenigs(cbp, tol=tol.tol_koenigs, conjugacy_tol=float("inf"))
    return IsothermicVerdict(
        classification=cls,
        koenigs=verdict,
        is_isothermic=cls.principal and verdict.is_koenigs,
    )


@dataclass(frozen=True)
class UnitSphereFit:
    on_sphere: bool
    residual: float   # max over vertices of | |f|^2 - r^2 - 1 | at r0_sq
    r0_sq: float


def on_unit_sphere(net: QuadNet, r0_sq: float | None = None,
                   tol: float = DEFAULT_TOLERANCES.tol_orth,
                   orthogonality_tol: float = DEFAULT_TOLERANCES.tol_orth) -> UnitSphereFit:
    """Search the one-parameter congruence family for the member whose spheres
    all cut the unit sphere orthogonally.

    Unit-sphere orthogonality of the sphere at vertex v reads
    |f_v|^2 = r_v^2 + 1. Along the family, r_v^2 depends on the seed radius x
    as sigma_v x + c_v with sigma_v = (-1)^(k+l), so the per-vertex deviation
    is |x - d_v| with d_v = sigma_v (|f_v|^2 - c_v - 1): the minimizing seed
    is the midrange of the d_v and the min-max residual their half-range,
    both exact. Pass r0_sq to evaluate a fixed family member instead.

    Requires an orthogonal pattern (the family must exist).
    """
    base = build_congruence(net, 0.0, tol=orthogonality_tol)
    parity = (-1.0) ** (np.add.outer(np.arange(net.rows), np.arange(net.cols)))
    targets = parity * ((net.vertices ** 2).sum(axis=-1) - base.radii_sq - 1.0)
    if r0_sq is None:
        best = 0.5 * float(targets.max() + targets.min())
        residual = 0.5 * float(targets.max() - targets.min())
    else:
        best = float(r0_sq)
        residual = float(np.abs(targets - best).max())
    return UnitSphereFit(on_sphere=residual <= tol, residual=residual, r0_sq=best)


@dataclass(frozen=True)
class MinimalResult:
    surface: QuadNet                 # control net of the dual pattern
    gauss: QuadNet                   # the input Gauss net
    congruence: SphereCongruence     # unit-sphere-orthogonal family member
    dual: DualizationResult
    kappa1: np.ndarray               # per measurable face of the surface
    kappa2: np.ndarray
    mean_curvature_residual: float   # max |k1 + k2| / max(|k1|, |k2|)
    isothermic_residual: float       # input residuals, for error budgets
    sphere_residual: float


def _default_seed(cbp: Checkerboard, k: int, l: int) -> float:
    quad = cbp.black_face(k, l)
    du = (quad[2] - quad[0]) / np.sqrt(2)
    dv = (quad[3] - quad[1]) / np.sqrt(2)
    return 1.0 / float(np.linalg.norm(np.cross(du, dv)))


def minimal_from_gauss(gauss_net: QuadNet, alpha0: float | None = None,
                       alpha1: float | None = None,
                       tol: float = 1e-2) -> MinimalResult:
    """Minimal net dual to an isothermic Gauss net on the unit sphere.

    The input must be isothermic and on the unit sphere within tol (sampled
    smooth data carries O(eps^2) residuals, so the default gate is loose;
    tighten it for exact inputs). Default dual seeds are the inverse
    generalized areas of the first two black faces, the discrete inverse
    conformal factor; that family member converges to the smooth dual.
    Per-face curvatures of the reconstructed surface are measured with its
    own unit vertex normals, an independent route, so the reported
    mean-curvature residual is bounded by the input residuals rather than
    zero by construction.
    """
    cbp = build_checkerboard(gauss_net)
    gate = Tolerances(tol_par=tol, tol_orth=tol, tol_plan=tol, tol_koenigs=tol)
    verdict = is_isothermic(cbp, gate)
    if not verdict.is_isothermic:
        raise NotIsothermicError(
            f"Gauss net is not isothermic within {tol:.1e} "
            f"(residual {verdict.residual:.3e})", residual=verdict.residual)
    fit = on_unit_sphere(gauss_net, tol=tol, orthogonality_tol=tol)
    if not fit.on_sphere:
        raise NotOnUnitSphereError(
            f"no congruence member is orthogonal to the unit sphere within "
            f"{tol:.1e} (residual {fit.residual:.3e})", residual=fit.residual)

    if alpha0 is None:
        alpha0 = _default_seed(cbp, 0, 0)
    if alpha1 is None:
        alpha1 = _default_seed(cbp, 1, 0)
    dual = dualize(cbp, alpha0, alpha1, orientation="reversing", tol=tol)
    surface = reconstruct_control(dual.dual, seed=None, tol=tol)

    table = principal_curvature_table(surface)
    denom = np.maximum(np.maximum(np.abs(table.kappa1), np.abs(table.kappa2)), 1e-300)
    mh = float((np.abs(table.kappa1 + table.kappa2) / denom).max())
    return MinimalResult(
        surface=surface,
        gauss=gauss_net,
        congruence=build_congruence(gauss_net, fit.r0_sq, tol=tol),
        dual=dual,
        kappa1=table.kappa1,
        kappa2=table.kappa2,
        mean_curvature_residual=mh,
        isothermic_residual=verdict.residual,
        sphere_residual=fit.residual,
    )


def goursat(result: MinimalResult, transform: MoebiusTransform,
            alpha0: float | None = None, alpha1: float | None = None,
            tol: float = 1e-2) -> MinimalResult:
    """Goursat transform: apply a Moebius transformation to the Gauss
    congruence, re-verify the unit-sphere and isothermic gates, and dualize.

    Only transforms preserving the unit sphere's orthogonality class keep the
    Gauss family on the sphere; others fail the gate and raise."""
    new_cong, new_gauss = apply_moebius(transform, result.congruence, tol=tol)
    fit = on_unit_sphere(new_gauss, tol=tol, orthogonality_tol=tol)
    if not fit.on_sphere:
        raise NotOnUnitSphereError(
            "transformed Gauss congruence is no longer orthogonal to the unit "
            f"sphere (residual {fit.residual:.3e}); the transform does not fix "
            "the unit sphere", residual=fit.residual)
    return minimal_from_gauss(new_gauss, alpha0=alpha0, alpha1=alpha1, tol=tol)

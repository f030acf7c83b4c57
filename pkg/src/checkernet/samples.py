"""Analytic sample nets: planar grids, smooth-surface samples, and the Gauss
nets whose duals reconstruct the two bundled minimal surfaces.

Smooth surfaces are sampled as f(k, l) = phi(eps*k, eps*l). Because the
discrete principal directions live on the control-net diagonals, the Gauss
generators sample the parameter plane on the 45-degree rotated lattice

    w(k, l) = exp(i pi/4) * eps * ((k + xi) + i (l + eta)),

so that the diagonals follow the curvature lines of the target surface:

  * enneper_gauss: sigma(w), the inverse stereographic image of the lattice,
    whose dual converges to x = Re(w - w^3/3), y = -Im(w + w^3/3),
    z = Re(w^2) up to a global similarity;
  * catenoid_gauss: sigma(exp(w)) on the exponential (annular) lattice, whose
    dual converges to (cosh s cos t, cosh s sin t, s) with s + i t = w.

The grid offsets (xi, eta) default to (1/2, 1/2), keeping the lattice off the
projection pole's preimage at w = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nets import QuadNet

__all__ = ["SampleSpec", "generate", "inverse_stereographic", "SAMPLE_KINDS"]

SAMPLE_KINDS = ("square_grid", "paraboloid", "sphere_graticule", "cylinder",
                "enneper_gauss", "catenoid_gauss")

_ROT45 = np.exp(1j * np.pi / 4)


def inverse_stereographic(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Map plane points to the unit sphere through the north pole:
    (x, y) -> (2x, 2y, x^2 + y^2 - 1) / (x^2 + y^2 + 1)."""
    d = x * x + y * y + 1.0
    return np.stack([2.0 * x / d, 2.0 * y / d, (x * x + y * y - 1.0) / d], axis=-1)


@dataclass(frozen=True)
class SampleSpec:
    """Deterministic sample description.

    epsilon is the parameter step, rows/cols the grid extent, radius the
    sphere/cylinder radius, offsets the lattice offsets (xi, eta) used by the
    Gauss-net kinds. Grids are centered on the parameter origin except for
    square grids, which start at it.
    """

    kind: str
    epsilon: float = 0.1
    rows: int = 5
    cols: int = 5
    radius: float = 1.0
    offsets: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        if self.kind not in SAMPLE_KINDS:
            raise ValueError(f"unknown sample kind {self.kind!r}; choose from {SAMPLE_KINDS}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.rows < 2 or self.cols < 2:
            raise ValueError("need at least a 2x2 grid")


def _param_grid(spec: SampleSpec, centered: bool) -> tuple[np.ndarray, np.ndarray]:
    ks = np.arange(spec.rows, dtype=float)
    ls = np.arange(spec.cols, dtype=float)
    if centered:
        ks -= (spec.rows - 1) / 2.0
        ls -= (spec.cols - 1) / 2.0
    return spec.epsilon * ks, spec.epsilon * ls


def generate(spec: SampleSpec) -> QuadNet:
    eps = spec.epsilon
    if spec.kind == "square_grid":
        u, v = _param_grid(spec, centered=False)
        f = np.zeros((spec.rows, spec.cols, 3))
        f[..., 0] = u[:, None]
        f[..., 1] = v[None, :]
        return QuadNet(f)

    if spec.kind == "paraboloid":
        u, v = _param_grid(spec, centered=True)
        f = np.zeros((spec.rows, spec.cols, 3))
        f[..., 0] = u[:, None]
        f[..., 1] = v[None, :]
        f[..., 2] = 0.5 * (u[:, None] ** 2 + v[None, :] ** 2)
        return QuadNet(f)

    if spec.kind == "sphere_graticule":
        u, v = _param_grid(spec, centered=True)
        if np.abs(v).max() >= np.pi / 2:
            raise ValueError("latitude range reaches the poles; shrink eps or cols")
        r = spec.radius
        cu, su = np.cos(u)[:, None], np.sin(u)[:, None]
        cv, sv = np.cos(v)[None, :], np.sin(v)[None, :]
        f = np.stack([r * cu * cv, r * su * cv,
                      r * sv * np.ones_like(cu)], axis=-1)
        return QuadNet(f)

    if spec.kind == "cylinder":
        u, v = _param_grid(spec, centered=True)
        if u.max() - u.min() >= 2 * np.pi:
            raise ValueError("angular range wraps around; shrink eps or rows")
        r = spec.radius
        f = np.stack([r * np.cos(u)[:, None] * np.ones_like(v)[None, :],
                      r * np.sin(u)[:, None] * np.ones_like(v)[None, :],
                      np.ones_like(u)[:, None] * v[None, :]], axis=-1)
        return QuadNet(f)

    xi, eta = spec.offsets
    ks = np.arange(spec.rows, dtype=float) - (spec.rows - 1) / 2.0 + (xi - 0.5)
    ls = np.arange(spec.cols, dtype=float) - (spec.cols - 1) / 2.0 + (eta - 0.5)
    w = _ROT45 * eps * ((ks[:, None] + 0.5) + 1j * (ls[None, :] + 0.5))
    if spec.kind == "enneper_gauss":
        return QuadNet(inverse_stereographic(w.real, w.imag))
    if spec.kind == "catenoid_gauss":
        if eps * max(spec.rows, spec.cols) / np.sqrt(2) >= 2 * np.pi:
            raise ValueError("angular extent wraps around; shrink eps or the grid")
        z = np.exp(w)
        return QuadNet(inverse_stereographic(z.real, z.imag))
    raise AssertionError("unreachable")


def enneper_surface(spec: SampleSpec) -> QuadNet:
    """Closed-form minimal surface matching the lattice of an enneper_gauss
    spec: vertices (Re(w - w^3/3), -Im(w + w^3/3), Re(w^2))."""
    if spec.kind != "enneper_gauss":
        raise ValueError("spec.kind must be 'enneper_gauss'")
    xi, eta = spec.offsets
    ks = np.arange(spec.rows, dtype=float) - (spec.rows - 1) / 2.0 + (xi - 0.5)
    ls = np.arange(spec.cols, dtype=float) - (spec.cols - 1) / 2.0 + (eta - 0.5)
    w = _ROT45 * spec.epsilon * ((ks[:, None] + 0.5) + 1j * (ls[None, :] + 0.5))
    return QuadNet(np.stack([np.real(w - w ** 3 / 3.0),
                             -np.imag(w + w ** 3 / 3.0),
                             np.real(w ** 2)], axis=-1))


def catenoid_surface(spec: SampleSpec) -> QuadNet:
    """Closed-form catenoid matching the lattice of a catenoid_gauss spec:
    vertices (cosh s cos t, cosh s sin t, s) at s + i t = w."""
    if spec.kind != "catenoid_gauss":
        raise ValueError("spec.kind must be 'catenoid_gauss'")
    xi, eta = spec.offsets
    ks = np.arange(spec.rows, dtype=float) - (spec.rows - 1) / 2.0 + (xi - 0.5)
    ls = np.arange(spec.cols, dtype=float) - (spec.cols - 1) / 2.0 + (eta - 0.5)
    w = _ROT45 * spec.epsilon * ((ks[:, None] + 0.5) + 1j * (ls[None, :] + 0.5))
    return QuadNet(np.stack([np.cosh(w.real) * np.cos(w.imag),
                             np.cosh(w.real) * np.sin(w.imag),
                             w.real], axis=-1))

"""Weighted Lebesgue norms and weighted Gagliardo seminorms."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import RearrangementOnlyFunction
from .functions import Field, TestFunction, as_field, gradient_field
from .params import Params
from .quadrature import (Estimate, Importance, McConfig, default_config, gagliardo_mc,
                         integrate_mc, integrate_radial)

VECTOR_NORMS = ("euclidean", "componentwise")


def _field(f) -> Field:
    return f if isinstance(f, Field) else as_field(f)


def _cfg(cfg: Optional[McConfig], N: int) -> McConfig:
    return cfg if cfg is not None else default_config(N)


def _magnitude(values):
    if values.ndim == 1:
        return np.abs(values)
    return np.sqrt(np.einsum("ij,ij->i", values, values))


def weighted_integral(f, q: float, beta: float, cfg: Optional[McConfig] = None, *,
                      method: str = "auto") -> Estimate:
    """``int |f(x)|^q |x|^-beta dx``; vector fields use the Euclidean length.

    ``method`` is ``"auto"`` (radial when possible), ``"radial"`` or ``"mc"``.
    """
    fld = _field(f)
    if q < 1:
        raise ValueError("q must be >= 1")
    if fld.support_radius == 0:
        return Estimate(0.0, 0.0, 0, "radial")
    use_radial = fld.radial_magnitude is not None and method in ("auto", "radial")
    if method == "radial" and fld.radial_magnitude is None:
        raise ValueError(f"{fld.name} has no radial profile")
    if use_radial:
        mag = fld.radial_magnitude
        return integrate_radial(lambda r: mag(r) ** q, beta, fld.N, fld.support_radius,
                                length_scale=fld.length_scale)

    cfg = _cfg(cfg, fld.N)
    radius = fld.support_radius
    if not math.isfinite(radius):
        radius = cfg.truncation_radius * fld.length_scale

    def integrand(x):
        r = np.sqrt(np.einsum("ij,ij->i", x, x))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _magnitude(fld.values(x)) ** q * r ** (-beta)
        return np.where(r < radius, out, 0.0)

    imp = Importance(radius=radius, power=float(np.clip(beta, 0.0, fld.N - 0.5)))
    return integrate_mc(integrand, fld.N, cfg, imp, length_scale=fld.length_scale)


def weighted_lp(f, q: float, beta: float, cfg: Optional[McConfig] = None, *,
                method: str = "auto") -> Estimate:
    """``(int |f|^q |x|^-beta dx)^(1/q)``."""
    est = weighted_integral(f, q, beta, cfg, method=method).power(1.0 / q)
    return est


def pair_integrand(fld: Field, p: float, a: float, vector_norm: str = "euclidean"):
    """Symmetrised Gagliardo integrand ``F(x, z)`` for :func:`gagliardo_mc`.

    Uses ``I = 2 * int_{|x| < |x+z|}``, so only x inside the support of
    the field contributes.
    """
    if vector_norm not in VECTOR_NORMS:
        raise ValueError(f"vector_norm must be one of {VECTOR_NORMS}")

    def F(x, z):
        y = x + z
        nx = np.sqrt(np.einsum("ij,ij->i", x, x))
        ny = np.sqrt(np.einsum("ij,ij->i", y, y))
        keep = np.flatnonzero(ny > nx)
        out = np.zeros(len(x))
        if keep.size == 0:
            return out
        d = fld.values(y[keep]) - fld.values(x[keep])
        if d.ndim == 1:
            mag = np.abs(d) ** p
        elif vector_norm == "euclidean":
            mag = np.einsum("ij,ij->i", d, d) ** (0.5 * p)
        else:
            mag = np.sum(np.abs(d) ** p, axis=1)
        if a:
            mag = mag * (nx[keep] * ny[keep]) ** (-a)
        out[keep] = 2.0 * mag
        return out

    return F


def gagliardo_integral(f, t: float, p: float, a: float, cfg: Optional[McConfig] = None, *,
                       vector_norm: str = "euclidean") -> Estimate:
    """``iint |f(x) - f(y)|^p / |x-y|^(N + t p) dx/|x|^a dy/|y|^a`` for 0 < t < 1."""
    fld = _field(f)
    if not fld.admissible:
        raise RearrangementOnlyFunction(f"{fld.name} is flagged for rearrangement use only")
    if not 0.0 < t < 1.0:
        raise ValueError("the fractional order t must lie in (0, 1)")
    if fld.support_radius == 0:
        return Estimate(0.0, 0.0, 0, "mc2n")
    cfg = _cfg(cfg, fld.N)
    radius = fld.support_radius
    if not math.isfinite(radius):
        radius = cfg.truncation_radius * fld.length_scale
    return gagliardo_mc(pair_integrand(fld, p, a, vector_norm), fld.N + t * p, cfg, N=fld.N,
                        x_radius=radius, holder_power=p, x_weight=2.0 * a,
                        length_scale=fld.length_scale)


def gagliardo(f, t: float, p: float, a: float, cfg: Optional[McConfig] = None, *,
              vector_norm: str = "euclidean") -> Estimate:
    """The weighted order-t seminorm, i.e. :func:`gagliardo_integral` to the power 1/p."""
    return gagliardo_integral(f, t, p, a, cfg, vector_norm=vector_norm).power(1.0 / p)


def seminorm(u: TestFunction, params: Params, cfg: Optional[McConfig] = None) -> Estimate:
    """``[u]_{s,p,a}``: the order-sigma seminorm of the gradient."""
    return gagliardo(gradient_field(u), params.sigma, params.p, params.a, cfg)


def homogeneous_norm(u: TestFunction, params: Params, cfg: Optional[McConfig] = None) -> Estimate:
    """Gradient norm in the critical weighted space plus the seminorm."""
    g = gradient_field(u)
    q = params.p_star_sigma
    lp = weighted_lp(g, q, 2.0 * params.a * q / params.p, cfg)
    sem = gagliardo(g, params.sigma, params.p, params.a, cfg)
    total = lp.plus(sem)
    return Estimate(lp.value + sem.value, total.uncertainty, total.samples_used, total.method,
                    {"gradient_lp": lp.to_dict(), "seminorm": sem.to_dict()})


# -- piecewise-constant grid surrogate ------------------------------------

class GridSurrogate:
    """Nearest-node piecewise-constant surrogate of ``u`` on ``[-W, W]^N``.

    Cells are cubes of side ``h`` centred at the nodes; outside the grid
    the surrogate is absent (pairs involving such points are dropped).
    """

    def __init__(self, u: TestFunction, h: float = 0.1, half_width: float = 2.0):
        self.N = u.N
        self.h = float(h)
        self.half_width = float(half_width)
        self.n = int(round(2 * half_width / h)) + 1
        axes = [np.linspace(-half_width, half_width, self.n)] * self.N
        mesh = np.meshgrid(*axes, indexing="ij")
        self.nodes = np.stack([m.ravel() for m in mesh], axis=1)
        self.values = u.eval(self.nodes)
        nz = self.nodes[self.values != 0]
        self.reach = (float(np.max(np.linalg.norm(nz, axis=1))) if len(nz) else 0.0) \
            + 0.5 * self.h * math.sqrt(self.N)

    def cell(self, x):
        k = np.rint((x + self.half_width) / self.h).astype(np.int64)
        inside = np.all((k >= 0) & (k < self.n), axis=1)
        flat = np.zeros(len(x), dtype=np.int64)
        kk = np.clip(k, 0, self.n - 1)
        for j in range(self.N):
            flat = flat * self.n + kk[:, j]
        return flat, inside


def grid_surrogate_integral(u: TestFunction, t: float, p: float, cfg: McConfig, *,
                            h: float = 0.1, half_width: float = 2.0) -> Estimate:
    """Unweighted order-t Gagliardo integral of the grid surrogate, by :func:`gagliardo_mc`.

    Within a pair of distinct cells the kernel is frozen at the node
    distance; pairs in the same cell are excluded. This is the continuous
    counterpart of the discrete double sum over node pairs.
    """
    g = GridSurrogate(u, h, half_width)
    kexp = g.N + t * p

    def F(x, z):
        y = x + z
        nx = np.einsum("ij,ij->i", x, x)
        ny = np.einsum("ij,ij->i", y, y)
        cx, inx = g.cell(x)
        cy, iny = g.cell(y)
        keep = (ny > nx) & inx & iny & (cx != cy)
        out = np.zeros(len(x))
        if not keep.any():
            return out
        cxk, cyk = cx[keep], cy[keep]
        dist = np.linalg.norm(g.nodes[cxk] - g.nodes[cyk], axis=1)
        rz = np.linalg.norm(z[keep], axis=1)
        out[keep] = 2.0 * np.abs(g.values[cxk] - g.values[cyk]) ** p * (rz / dist) ** kexp
        return out

    return gagliardo_mc(F, kexp, cfg, N=g.N, x_radius=g.reach, holder_power=kexp,
                        length_scale=1.0)

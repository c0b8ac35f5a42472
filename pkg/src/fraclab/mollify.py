"""Mollifiers, smooth cutoffs, pointwise convolution and the smooth compactly
supported approximation ``(u * rho_n) zeta_n`` of a function."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import RearrangementOnlyFunction
from .functions import (Smoothness, TestFunction, bump_profile, field_difference,
                        gradient_field, smooth_step, smooth_step_derivative,
                        smooth_step_second_derivative)
from .norms import gagliardo
from .params import Params
from .quadrature import Estimate, McConfig, integrate_radial

_RADIAL_NODES = 24
_BLOCK = 2048
_MEMO_MAX_BATCH = 64


@lru_cache(maxsize=None)
def bump_mass(N: int) -> float:
    """``int_{B_1} exp(-1/(1-|x|^2)) dx``, computed once per dimension."""
    return integrate_radial(bump_profile, 0.0, N, 1.0, rtol=1e-12).value


def _norm(x):
    return np.sqrt(np.einsum("ij,ij->i", x, x))


@dataclass(frozen=True)
class Mollifier:
    """``rho_n(x) = n^N rho(n x)`` with ``rho`` the normalised standard bump."""

    n: int
    N: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def support_radius(self) -> float:
        return 1.0 / self.n

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        return self.n ** self.N * bump_profile(self.n * r) / bump_mass(self.N)

    def eval(self, x):
        return self.profile(_norm(np.atleast_2d(x)))

    def mass(self) -> float:
        """``int rho_n`` by an independent radial quadrature on ``[0, 1/n]``."""
        return integrate_radial(self.profile, 0.0, self.N, 1.0 / self.n, rtol=1e-12,
                                length_scale=1.0 / self.n).value

    @lru_cache(maxsize=None)
    def rule(self):
        """Positive nodes and weights for ``int g(z) rho_n(z) dz``.

        Polar product rules in N = 2, 3 and a tensor Gauss rule on the
        cube otherwise; weights are renormalised to total mass one, so
        constants are reproduced exactly.
        """
        h = 1.0 / self.n
        N = self.N
        if N in (2, 3):
            xr, wr = np.polynomial.legendre.leggauss(_RADIAL_NODES)
            r = 0.5 * h * (xr + 1.0)
            wr = 0.5 * h * wr * r ** (N - 1) * self.profile(r)
            if N == 2:
                m = 32
                th = 2.0 * np.pi * np.arange(m) / m
                dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
                wd = np.full(m, 2.0 * np.pi / m)
            else:
                xc, wc = np.polynomial.legendre.leggauss(12)
                m = 24
                ph = 2.0 * np.pi * np.arange(m) / m
                ct, p = np.meshgrid(xc, ph, indexing="ij")
                st = np.sqrt(1.0 - ct ** 2)
                dirs = np.stack([st * np.cos(p), st * np.sin(p), ct], axis=-1).reshape(-1, 3)
                wd = (wc[:, None] * np.full(m, 2.0 * np.pi / m)[None, :]).ravel()
            nodes = (r[:, None, None] * dirs[None, :, :]).reshape(-1, N)
            weights = (wr[:, None] * wd[None, :]).ravel()
        else:
            xg, wg = np.polynomial.legendre.leggauss(10)
            grids = np.meshgrid(*([h * xg] * N), indexing="ij")
            nodes = np.stack([g.ravel() for g in grids], axis=1)
            wmesh = np.meshgrid(*([h * wg] * N), indexing="ij")
            weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=1), axis=1)
            weights = weights * self.eval(nodes)
        keep = weights > 0
        nodes, weights = nodes[keep], weights[keep]
        raw = float(np.sum(weights))
        return nodes, weights / raw, raw

    def rule_mass_defect(self) -> float:
        """``|discrete mass - 1|`` before renormalisation."""
        return abs(self.rule()[2] - 1.0)


def mollifier(n: int, N: int) -> Mollifier:
    return Mollifier(int(n), int(N))


@dataclass(frozen=True)
class Cutoff:
    """``zeta_n(x) = T(|x| / n)``: equal to 1 on ``B_n`` and 0 outside ``B_2n``."""

    n: int
    N: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def support_radius(self) -> float:
        return 2.0 * self.n

    def eval(self, x):
        return smooth_step(_norm(np.atleast_2d(x)) / self.n)

    def grad(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = _norm(x)
        out = np.zeros_like(x)
        m = r > self.n
        out[m] = (smooth_step_derivative(r[m] / self.n) / (self.n * r[m]))[:, None] * x[m]
        return out

    def hessian(self, x):
        """``phi'' e e^T + (phi'/r)(I - e e^T)`` for ``phi(r) = T(r/n)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = _norm(x)
        out = np.zeros((len(x), self.N, self.N))
        m = r > self.n
        if m.any():
            rm = r[m]
            e = x[m] / rm[:, None]
            d1 = smooth_step_derivative(rm / self.n) / self.n
            d2 = smooth_step_second_derivative(rm / self.n) / self.n ** 2
            ee = e[:, :, None] * e[:, None, :]
            out[m] = d2[:, None, None] * ee + (d1 / rm)[:, None, None] * (np.eye(self.N) - ee)
        return out

    def as_function(self) -> TestFunction:
        n = self.n
        return TestFunction(
            f"cutoff({n})", self.N, self.eval, self.grad, support_radius=2.0 * n, radial=True,
            profile=lambda r: smooth_step(np.asarray(r, dtype=float) / n),
            dprofile=lambda r: smooth_step_derivative(np.asarray(r, dtype=float) / n) / n,
            smoothness=Smoothness.CC_INF, length_scale=2.0 * n, decreasing=True,
        )

    def sup_bounds(self, points: int = 20001):
        """Sampled ``(n max|grad|, n^2 max|hessian|)`` on a radial grid scaled with n."""
        r = self.n * np.linspace(0.0, 2.5, points)
        x = np.zeros((points, self.N))
        x[:, 0] = r
        g = np.linalg.norm(self.grad(x), axis=1)
        h = np.linalg.norm(self.hessian(x), ord=2, axis=(1, 2))
        return float(np.max(g)) * self.n, float(np.max(h)) * self.n ** 2


def cutoff(n: int, N: int) -> Cutoff:
    return Cutoff(int(n), int(N))


class _Memo:
    """Thread-safe insert-if-absent table keyed by the bytes of a point."""

    def __init__(self):
        self._lock = threading.Lock()
        self._table = {}

    def get_or_compute(self, x, compute):
        keys = [row.tobytes() for row in x]
        with self._lock:
            hits = [self._table.get(k) for k in keys]
        missing = [i for i, h in enumerate(hits) if h is None]
        if missing:
            fresh = compute(x[missing])
            with self._lock:
                for i, v in zip(missing, fresh):
                    hits[i] = self._table.setdefault(keys[i], v)
        return np.array(hits)

    def __len__(self):
        return len(self._table)


def _convolve_points(fun, x, nodes, weights, reach):
    """``sum_k w_k fun(x - z_k)`` for points within ``reach`` of the origin."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    M, N = x.shape
    sample = fun(x[:1] - nodes[:1])
    tail = sample.shape[1:]
    out = np.zeros((M,) + tail)
    live = np.flatnonzero(_norm(x) < reach)
    K = len(nodes)
    block = max(1, _BLOCK * 64 // K)
    for start in range(0, live.size, block):
        idx = live[start:start + block]
        pts = (x[idx, None, :] - nodes[None, :, :]).reshape(-1, N)
        vals = fun(pts).reshape((len(idx), K) + tail)
        out[idx] = np.tensordot(weights, vals, axes=([0], [1]))
    return out


def convolve(u: TestFunction, m: Mollifier, cfg: Optional[McConfig] = None) -> TestFunction:
    """``u * rho_n`` with gradient ``(grad u) * rho_n``, both by pointwise quadrature.

    Small batches go through a per-function memo table; large Monte Carlo
    batches are evaluated directly since their points never repeat.
    """
    if not u.smooth:
        raise RearrangementOnlyFunction(f"{u.name} is not smooth")
    if u.N != m.N:
        raise ValueError("dimension mismatch")
    nodes, weights, _ = m.rule()
    reach = u.support_radius + m.support_radius
    memo_v, memo_g = _Memo(), _Memo()

    def ev(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        compute = lambda y: _convolve_points(u.eval, y, nodes, weights, reach)  # noqa: E731
        return memo_v.get_or_compute(x, compute) if len(x) <= _MEMO_MAX_BATCH else compute(x)

    grad = None
    if u.grad is not None:
        def grad(x):
            x = np.atleast_2d(np.asarray(x, dtype=float))
            compute = lambda y: _convolve_points(u.grad, y, nodes, weights, reach)  # noqa: E731
            return memo_g.get_or_compute(x, compute) if len(x) <= _MEMO_MAX_BATCH else compute(x)

    f = TestFunction(f"{u.name}*rho_{m.n}", u.N, ev, grad, support_radius=reach, radial=False,
                     smoothness=u.smoothness, length_scale=u.length_scale,
                     meta={"memo": (memo_v, memo_g), "mollifier_n": m.n})
    return f


def approximation(u: TestFunction, n: int, cfg: Optional[McConfig] = None) -> TestFunction:
    """``v_n = (u * rho_n) zeta_n`` with the product-rule gradient."""
    conv = convolve(u, mollifier(n, u.N), cfg)
    zeta = cutoff(n, u.N)

    def ev(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return conv.eval(x) * zeta.eval(x)

    def grad(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return conv.grad(x) * zeta.eval(x)[:, None] + conv.eval(x)[:, None] * zeta.grad(x)

    support = min(conv.support_radius, zeta.support_radius)
    return TestFunction(f"v_{n}[{u.name}]", u.N, ev, grad, support_radius=support, radial=False,
                        smoothness=Smoothness.CC_INF, length_scale=u.length_scale,
                        meta={"n": n, "convolution": conv, "cutoff": zeta})


def approximation_sequence(u: TestFunction, n: int, params: Params,
                           cfg: Optional[McConfig] = None):
    """Return ``(v_n, [u - v_n]_{s,p,a})``."""
    v = approximation(u, n, cfg)
    if u.support_radius == 0:
        return v, Estimate(0.0, 0.0, 0, "mc2n")
    residual = field_difference(gradient_field(u), gradient_field(v))
    return v, gagliardo(residual, params.sigma, params.p, params.a, cfg)


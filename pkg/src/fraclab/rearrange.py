"""Distribution functions, decreasing rearrangements and Lorentz quasinorms.

Everything here works with the 1-D curves ``mu(t) = |{|f| > t}|`` and
``f*(tau) = inf{t > 0 : mu(t) < tau}`` on the whole space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .errors import DivergentQuasinorm, NonMonotoneProfile
from .functions import TestFunction
from .norms import weighted_integral
from .params import Params, unit_ball_volume
from .quadrature import Estimate, McConfig, chunk_generator, default_config, _sample_ball

METHODS = ("profile_inversion", "mc_estimate")
_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)
_BISECT_RTOL = 1e-13
_MONOTONE_GRID = 4097
_LOG_SPAN = 60.0  # natural-log decades scanned when a range is unbounded


@dataclass(frozen=True)
class RearrangementProfile:
    """The pair ``(mu, f*)`` of a function on R^N.

    ``t_max`` is ``sup |f|`` (possibly infinite) and ``tau_max`` is the
    measure of the support, ``mu(0+)``. ``mu_se`` gives binomial standard
    errors for sampled curves and is ``None`` for deterministic ones.
    ``fstar_direct`` optionally evaluates ``f*`` without root finding.
    """

    mu: Callable
    source: str
    t_max: float
    tau_max: float
    mu_se: Optional[Callable] = None
    fstar_direct: Optional[Callable] = None
    meta: dict = field(default_factory=dict, compare=False)

    def fstar(self, tau):
        """``f*(tau)``; uses the profile shortcut when one is attached."""
        if self.fstar_direct is not None:
            return np.asarray(self.fstar_direct(np.atleast_1d(np.asarray(tau, dtype=float))))
        return self.fstar_by_definition(tau)

    def fstar_by_definition(self, tau):
        """``inf{t > 0 : mu(t) < tau}``, by vectorised bisection in log t."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.zeros_like(tau)
        live = self.mu(np.zeros(1))[0] >= tau
        if not live.any() or self.t_max == 0:
            return out
        tv = tau[live]
        if math.isfinite(self.t_max):
            hi = np.full_like(tv, self.t_max)
        else:
            hi = np.ones_like(tv)
            for _ in range(200):
                grow = self.mu(hi) >= tv
                if not grow.any():
                    break
                hi[grow] *= 1e4
        at_top = self.mu(hi) >= tv
        lo = hi.copy()
        for _ in range(200):
            shrink = (self.mu(lo) < tv) & (lo > 1e-300)
            if not shrink.any():
                break
            lo[shrink] *= 1e-8
        vanish = self.mu(lo) < tv
        # invariant: mu(lo) >= tau > mu(hi); bisect in log t
        llo, lhi = np.log(np.maximum(lo, 1e-320)), np.log(hi)
        for _ in range(200):
            if np.all(lhi - llo <= _BISECT_RTOL):
                break
            mid = 0.5 * (llo + lhi)
            below = self.mu(np.exp(mid)) < tv
            lhi = np.where(below, mid, lhi)
            llo = np.where(below, llo, mid)
        res = np.exp(lhi)
        res[vanish] = 0.0
        res[at_top] = self.t_max
        out[live] = res
        return out


def _check_monotone(f: TestFunction, rmax: float):
    r = np.linspace(0.0, rmax, _MONOTONE_GRID)[1:]
    g = np.abs(f.profile(r))
    if np.any(np.diff(g) > 1e-14 * max(float(np.max(g)), 1e-300)):
        raise NonMonotoneProfile(f"|profile| of {f.name} is not nonincreasing")


def _radius_by_bisection(f: TestFunction):
    """``r(t) = sup{r : |g(r)| > t}`` for a nonincreasing radial profile ``g``.

    Bracketed Newton iteration on the exact derivative, falling back to
    bisection whenever a step leaves the bracket.
    """
    L = f.length_scale
    g0 = abs(float(f.profile(np.zeros(1))[0]))

    def radius(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        out[t <= 0] = f.support_radius
        live = (t > 0) & (g0 > t)
        tv = t[live]
        lo = np.zeros_like(tv)
        hi = np.full_like(tv, L)
        for _ in range(60):
            grow = np.abs(f.profile(hi)) > tv
            if not grow.any():
                break
            lo[grow] = hi[grow]
            hi[grow] *= 2.0
        else:
            raise NonMonotoneProfile(f"{f.name} does not decay")
        x = 0.5 * (lo + hi)
        for _ in range(200):
            gx = f.profile(x)
            resid = np.abs(gx) - tv
            up = resid > 0
            lo = np.where(up, x, lo)
            hi = np.where(up, hi, x)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = resid / (np.sign(gx) * f.dprofile(x))
                nxt = x - step
            bad = ~np.isfinite(nxt) | (nxt <= lo) | (nxt >= hi)
            nxt = np.where(bad, 0.5 * (lo + hi), nxt)
            done = np.abs(nxt - x) <= _BISECT_RTOL * hi
            x = nxt
            if np.all(done | (hi - lo <= _BISECT_RTOL * hi)):
                break
        out[live] = x
        return out

    return radius


def distribution(f: TestFunction, method: str = "profile_inversion",
                 cfg: Optional[McConfig] = None) -> RearrangementProfile:
    """Distribution function of ``|f|``.

    ``profile_inversion`` needs a radial profile with nonincreasing
    modulus and gives ``mu(t) = omega_N r(t)^N``; ``mc_estimate`` counts
    hits of ``{|f| > t}`` on one fixed sample, for any ``f``.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    N = f.N
    omega = unit_ball_volume(N)
    tau_max = omega * f.support_radius ** N if math.isfinite(f.support_radius) else math.inf

    if method == "profile_inversion":
        if not f.radial or f.profile is None:
            raise NonMonotoneProfile(f"{f.name} is not radial")
        if f.support_radius == 0:
            return RearrangementProfile(lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                                        "closed_form", 0.0, 0.0)
        if f.profile_inverse is not None:
            radius, source = f.profile_inverse, "closed_form"
        elif f.dprofile is None:
            raise NonMonotoneProfile(f"{f.name} has neither an inverse nor a derivative")
        else:
            rmax = f.support_radius if math.isfinite(f.support_radius) else 50.0 * f.length_scale
            _check_monotone(f, rmax)
            radius, source = _radius_by_bisection(f), "profile_inversion"
        t_max = float(abs(f.profile(np.array([0.0]))[0]))

        def mu(t):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            return omega * np.asarray(radius(t), dtype=float) ** N

        direct = None
        if source == "profile_inversion":
            # for nonincreasing |g| the inf-definition reduces to |g| at
            # radius (tau/omega)^(1/N); avoids nesting two root finders
            def direct(tau):
                return np.abs(f.profile((np.maximum(tau, 0.0) / omega) ** (1.0 / N)))

        return RearrangementProfile(mu, source, t_max, tau_max, fstar_direct=direct,
                                    meta={"function": f.name})

    cfg = cfg if cfg is not None else default_config(N)
    R = f.support_radius if math.isfinite(f.support_radius) else cfg.truncation_radius * f.length_scale
    n = cfg.sample_count
    rng = chunk_generator(cfg.seed, 20, 0)
    x, _, _ = _sample_ball(rng, n, N, R, 0.0)
    vals = np.sort(np.abs(f.eval(x)))
    vol = omega * R ** N

    def frac(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return (n - np.searchsorted(vals, t, side="right")) / n

    def mu(t):
        return vol * frac(t)

    def mu_se(t):
        q = frac(t)
        return vol * np.sqrt(q * (1.0 - q) / n)

    return RearrangementProfile(mu, "mc_estimate", float(vals[-1]), vol, mu_se,
                                meta={"function": f.name, "samples": n, "sorted_values": vals})


def _as_profile(f, cfg) -> RearrangementProfile:
    if isinstance(f, RearrangementProfile):
        return f
    method = "profile_inversion" if (f.radial and f.profile is not None) else "mc_estimate"
    return distribution(f, method, cfg)


def _log_t_range(prof: RearrangementProfile, q: float):
    """Window in log t outside which ``t^q mu(t)^(q/p)`` is negligible or diverges."""
    if math.isfinite(prof.t_max):
        hi = math.log(prof.t_max)
        return hi - 45.0 / min(q, 1.0) - 5.0, hi
    return -_LOG_SPAN, _LOG_SPAN


def _local_exponent(g, u0, u1):
    g0, g1 = g(u0), g(u1)
    if g0 <= 0 or g1 <= 0:
        return None
    return (math.log(g1) - math.log(g0)) / (u1 - u0)


def lorentz_quasinorm(f, p: float, q: float, cfg: Optional[McConfig] = None) -> Estimate:
    """``|f|_{p,q} = (p int_0^inf t^(q-1) mu(t)^(q/p) dt)^(1/q)``; ``q = inf`` gives ``sup t mu^(1/p)``.

    ``f`` may be a :class:`TestFunction` or a precomputed profile.
    """
    if not p > 0 or not q > 0:
        raise ValueError("Lorentz indices must be positive")
    prof = _as_profile(f, cfg)
    if prof.t_max == 0 or prof.tau_max == 0:
        return Estimate(0.0, 0.0, 0, "radial")
    if math.isinf(q):
        return _weak_norm(prof, p)
    if prof.source == "mc_estimate":
        return _lorentz_sampled(prof, p, q)
    if prof.source == "profile_inversion":
        return _lorentz_by_fstar(prof, p, q)

    def g(u):
        # integrand in u = log t: t^q mu(t)^(q/p)
        t = math.exp(u)
        m = prof.mu(np.array([t]))[0]
        return t ** q * m ** (q / p) if m > 0 else 0.0

    lo, hi = _log_t_range(prof, q)
    if not math.isfinite(prof.tau_max):
        e = _local_exponent(g, lo, lo + 1.0)
        if e is not None and e <= 1e-3:
            raise DivergentQuasinorm(f"t-integral diverges as t -> 0 (local exponent {e:.3g})")
    if not math.isfinite(prof.t_max):
        e = _local_exponent(g, hi - 1.0, hi)
        if e is not None and e >= -1e-3:
            raise DivergentQuasinorm(f"t-integral diverges as t -> inf (local exponent {e:.3g})")

    edges = np.linspace(lo, hi, 25)
    total, err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(g, a, b, epsabs=0.0, epsrel=1e-11, limit=200)
        total += v
        err += e
    if not (math.isfinite(total) and err <= 1e-8 * max(total, 1e-300)):
        raise DivergentQuasinorm(f"t-integral did not converge (error bound {err:.3g})")
    value = (p * total) ** (1.0 / q)
    return Estimate(value, 0.0, 0, "radial", {"integral": p * total, "error_bound": p * err})


def _gl_log_integral(fun, lo, hi, panels=48):
    """Gauss-Legendre panels on [lo, hi]; returns (value, |value - half-panel value|)."""
    def rule(n):
        edges = np.linspace(lo, hi, n + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        u = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        w = (half[:, None] * _GL_W[None, :]).ravel()
        return math.fsum(w * fun(u))

    coarse, fine = rule(panels), rule(2 * panels)
    return fine, abs(fine - coarse)


def _lorentz_by_fstar(prof: RearrangementProfile, p: float, q: float) -> Estimate:
    """Equivalent form ``int_0^inf (tau^(1/p) f*(tau))^q d tau / tau``, in log tau."""
    def fun(u):
        tau = np.exp(u)
        return tau ** (q / p) * prof.fstar(tau) ** q

    f0 = prof.t_max
    lo = (p / q) * (math.log(1e-20) - q * math.log(f0))
    if math.isfinite(prof.tau_max):
        hi = math.log(prof.tau_max)
    else:
        hi = 0.0
        while fun(np.array([hi]))[0] > 1e-20 * f0 ** q:
            hi += 1.0
            if hi > 700:
                raise DivergentQuasinorm("rearranged integrand does not decay")
    total, err = _gl_log_integral(fun, lo, hi)
    return Estimate(total ** (1.0 / q), 0.0, 0, "radial", {"integral": total, "error_bound": err})


def _lorentz_sampled(prof: RearrangementProfile, p: float, q: float) -> Estimate:
    """Exact t-integral of the empirical (step) distribution function.

    Between consecutive sorted sample values the empirical ``mu`` is
    constant, so ``p int t^(q-1) mu^(q/p) dt`` is a finite sum.
    """
    vals = prof.meta["sorted_values"]
    n = len(vals)
    pos = vals[vals > 0]
    edges = np.concatenate([[0.0], pos])
    frac = (len(pos) - np.arange(len(pos))) / n  # share of samples above each interval
    m = prof.tau_max * frac
    se = prof.tau_max * np.sqrt(frac * (1.0 - frac) / n)
    dtq = np.diff(edges ** q)
    total = (p / q) * math.fsum(m ** (q / p) * dtq)
    # errors in mu are strongly correlated across t; add linearly
    err = math.fsum(m ** (q / p - 1.0) * se * dtq)
    value = total ** (1.0 / q)
    unc = value / q * err / total if total > 0 else 0.0
    return Estimate(value, unc, n, "mc", {"integral": total})


def _weak_norm(prof: RearrangementProfile, p: float) -> Estimate:
    """``sup_t t mu(t)^(1/p)``: log-grid scan, Brent refinement, endpoint analysis."""
    def h(u):
        t = math.exp(u)
        return t * prof.mu(np.array([t]))[0] ** (1.0 / p)

    lo, hi = _log_t_range(prof, 1.0)
    if math.isfinite(prof.t_max):
        hi = math.log(prof.t_max)
    grid = np.linspace(lo, hi, 601)
    vals = np.array([h(u) for u in grid])
    k = int(np.argmax(vals))
    top = vals[k]
    if top == 0:
        return Estimate(0.0, 0.0, 0, "radial")
    # an unbounded end of the window where the curve is still rising means divergence
    ends = [(0, 1, math.isfinite(prof.tau_max)), (-1, -2, math.isfinite(prof.t_max))]
    for edge, inner, bounded in ends:
        if not bounded and vals[edge] >= top * (1 - 1e-9) and vals[edge] > vals[inner] * (1 + 1e-9):
            raise DivergentQuasinorm("weak quasinorm grows without bound at an endpoint")
    if 0 < k < len(grid) - 1:
        res = optimize.minimize_scalar(lambda u: -h(u), bounds=(grid[k - 1], grid[k + 1]),
                                       method="bounded", options={"xatol": 1e-12})
        top = max(top, -res.fun)
    return Estimate(float(top), 0.0, 0, "radial", {"argmax_t": float(math.exp(grid[k]))})


# -- identities ------------------------------------------------------------

@dataclass(frozen=True)
class IdentityReport:
    name: str
    lhs: Estimate
    rhs: Estimate
    gap: float
    combined_uncertainty: float
    tolerance: float
    holds: bool
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name, "lhs": self.lhs.to_dict(), "rhs": self.rhs.to_dict(),
            "gap": self.gap, "combined_uncertainty": self.combined_uncertainty,
            "tolerance": self.tolerance, "holds": self.holds, "metadata": self.metadata,
        }


def _identity(name, lhs: Estimate, rhs: Estimate, tol: float, meta: dict) -> IdentityReport:
    scale = max(abs(lhs.value), abs(rhs.value))
    gap = abs(lhs.value - rhs.value) / scale if scale > 0 else 0.0
    comb = math.hypot(lhs.uncertainty, rhs.uncertainty) / scale if scale > 0 else 0.0
    holds = gap <= max(tol, 3.0 * comb)
    return IdentityReport(name, lhs, rhs, gap, comb, tol, holds, meta)


def rearranged_integral(prof: RearrangementProfile, panels: int = 48) -> Estimate:
    """``int_0^inf f*(tau) d tau`` with ``f*`` from the inf-definition.

    Gauss-Legendre panels in log tau; the panel count is doubled once and
    the difference is reported as the error bound.
    """
    if prof.t_max == 0 or prof.tau_max == 0:
        return Estimate(0.0, 0.0, 0, "radial")
    f0 = prof.t_max
    lo = math.log(1e-18 / f0) if math.isfinite(f0) else -_LOG_SPAN
    if math.isfinite(prof.tau_max):
        hi = math.log(prof.tau_max)
    else:
        hi = 0.0
        while math.exp(hi) * prof.fstar(math.exp(hi))[0] > 1e-20 * max(f0, 1.0):
            hi += 1.0

    def fun(u):
        tau = np.exp(u)
        return tau * prof.fstar(tau)

    total, err = _gl_log_integral(fun, lo, hi, panels)
    return Estimate(total, 0.0, 0, "radial", {"error_bound": err})


def layer_cake_check(f: TestFunction, cfg: Optional[McConfig] = None, *,
                     tolerance: float = 1e-6) -> IdentityReport:
    """Compare ``int f dx`` with ``int_0^inf f*(tau) d tau`` for ``f >= 0``."""
    lhs = weighted_integral(f, 1.0, 0.0, cfg)
    rhs = rearranged_integral(_as_profile(f, cfg))
    return _identity("layer_cake", lhs, rhs, tolerance, {"function": f.name})


def hardy_layercake_identity(u: TestFunction, params: Params, cfg: Optional[McConfig] = None, *,
                             tolerance: float = 0.02) -> IdentityReport:
    """``int |u|^p |x|^-(sp+2a) = omega_N^((sp+2a)/N) |u|_{p_lorentz, p}^p``."""
    N, p = params.N, params.p
    beta = params.s * p + 2.0 * params.a
    lhs = weighted_integral(u, p, beta, cfg)
    ln = lorentz_quasinorm(u, params.p_lorentz, p, cfg).power(p)
    rhs = ln.scaled(unit_ball_volume(N) ** (beta / N))
    return _identity("hardy_layercake", lhs, rhs, tolerance,
                     {"function": u.name, "params": params.as_dict()})


def sobolev_layercake_identity(u: TestFunction, params: Params, cfg: Optional[McConfig] = None, *,
                               tolerance: float = 0.02) -> IdentityReport:
    """``int |u|^{p*_s} |x|^-(2a p*_s/p) = omega_N^(2a/(N-sp)) |u|_{p_lorentz, p*_s}^{p*_s}``."""
    N, p, q = params.N, params.p, params.p_star_s
    beta = 2.0 * params.a * q / p
    lhs = weighted_integral(u, q, beta, cfg)
    ln = lorentz_quasinorm(u, params.p_lorentz, q, cfg).power(q)
    rhs = ln.scaled(unit_ball_volume(N) ** (2.0 * params.a / (N - params.s * p)))
    return _identity("sobolev_layercake", lhs, rhs, tolerance,
                     {"function": u.name, "params": params.as_dict()})

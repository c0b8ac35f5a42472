"""Integration engines.

* :func:`integrate_radial` -- deterministic adaptive quadrature of radial
  integrands ``int g(|x|) |x|^-beta dx`` on a mesh graded towards r = 0.
* :func:`integrate_mc` -- importance-sampled Monte Carlo over R^N.
* :func:`gagliardo_mc` -- stratified Monte Carlo over R^N x R^N for
  kernels ``|z|^-k`` that are singular on the diagonal, after the
  substitution ``y = x + z``.

Random numbers come from counter-based Philox streams keyed by
``(seed, stream)`` with the chunk index in the counter, so every result is
a pure function of the configuration regardless of worker count.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import NoConvergence, NonIntegrableSingularity, ZeroDensityRegion
from .params import sphere_area

RADIAL_RTOL = 1e-9
_PANELS = 40
_U_FLOOR = 1e-300


@dataclass(frozen=True)
class Estimate:
    """A value with one standard error (zero for deterministic quadrature)."""

    value: float
    uncertainty: float = 0.0
    samples_used: int = 0
    method: str = "exact"
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.uncertainty >= 0:
            raise ValueError("uncertainty must be non-negative")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "uncertainty": self.uncertainty,
            "samples": self.samples_used,
            "method": self.method,
        }

    @property
    def relative_uncertainty(self) -> float:
        if self.value == 0:
            return 0.0 if self.uncertainty == 0 else math.inf
        return self.uncertainty / abs(self.value)

    def scaled(self, c: float) -> "Estimate":
        return replace(self, value=c * self.value, uncertainty=abs(c) * self.uncertainty)

    def power(self, q: float) -> "Estimate":
        """``value**q`` with first-order (delta method) error propagation."""
        v = self.value
        if v == 0:
            return replace(self, value=0.0, uncertainty=0.0 if q > 0 else math.inf)
        return replace(self, value=v ** q,
                       uncertainty=abs(q) * abs(v) ** (q - 1.0) * self.uncertainty)

    def plus(self, other: "Estimate") -> "Estimate":
        """Sum of independent estimates; uncertainties add in quadrature."""
        method = self.method if self.method == other.method else f"{self.method}+{other.method}"
        return Estimate(self.value + other.value, math.hypot(self.uncertainty, other.uncertainty),
                        self.samples_used + other.samples_used, method)


def combine(estimates) -> Estimate:
    """Average k independent estimates: uncertainty is RMS / sqrt(k)."""
    estimates = list(estimates)
    k = len(estimates)
    if k == 0:
        raise ValueError("nothing to combine")
    value = math.fsum(e.value for e in estimates) / k
    rms = math.sqrt(math.fsum(e.uncertainty ** 2 for e in estimates) / k)
    return Estimate(value, rms / math.sqrt(k), sum(e.samples_used for e in estimates),
                    estimates[0].method)


def ratio(num: Estimate, den: Estimate) -> tuple[float, float]:
    """Ratio of two independent estimates and its propagated standard error."""
    if den.value == 0:
        return (math.nan if num.value == 0 else math.inf), math.inf
    r = num.value / den.value
    rel = math.hypot(num.relative_uncertainty if num.value else 0.0, den.relative_uncertainty)
    if num.value == 0:
        return 0.0, num.uncertainty / abs(den.value)
    return r, abs(r) * rel


@dataclass(frozen=True)
class McConfig:
    """Sampling configuration.

    ``truncation_radius`` and ``singular_split_radius`` are measured in
    units of the integrand's length scale, which makes the estimators
    covariant under dilations.
    """

    seed: int = 20240601
    sample_count: int = 200_000
    truncation_radius: float = 6.0
    singular_split_radius: float = 0.25
    inner_fraction: float = 0.5
    chunk_size: int = 1 << 15
    workers: int = 1
    method: str = "pseudo"

    def __post_init__(self):
        if self.sample_count < 1000:
            raise ValueError("sample_count must be >= 1000")
        if not self.truncation_radius > self.singular_split_radius > 0:
            raise ValueError("need truncation_radius > singular_split_radius > 0")
        if not 0 < self.inner_fraction < 1:
            raise ValueError("inner_fraction must lie in (0, 1)")
        if self.method != "pseudo":
            raise ValueError("only pseudo-random sampling is implemented")

    def with_seed(self, seed: int) -> "McConfig":
        return replace(self, seed=seed)


def default_config(N: int, **overrides) -> McConfig:
    count = 200_000 if N <= 2 else 1_000_000
    return McConfig(**{"sample_count": count, **overrides})


def chunk_generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    """Generator for one chunk of one stream; independent of evaluation order."""
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF) | ((int(stream) & 0xFFFFFFFFFFFFFFFF) << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, int(chunk)]))


def _reduce_chunks(chunk_fn, n: int, cfg: McConfig):
    """Run ``chunk_fn(chunk_index, size)`` over fixed-size chunks and reduce exactly.

    Returns ``(n, sum, sum_of_squares)``; partial sums are combined with
    ``math.fsum`` so the result does not depend on completion order.
    """
    sizes = [min(cfg.chunk_size, n - start) for start in range(0, n, cfg.chunk_size)]

    def run(i):
        w = chunk_fn(i, sizes[i])
        return float(np.sum(w)), float(np.sum(w * w))

    if cfg.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    return n, math.fsum(p[0] for p in parts), math.fsum(p[1] for p in parts)


def _mean_and_error(n, s1, s2):
    mean = s1 / n
    var = max(s2 - s1 * mean, 0.0) / (n - 1)
    return mean, math.sqrt(var / n)


def _uniform_open(rng, size):
    return np.maximum(1.0 - rng.random(size), _U_FLOOR)


def _directions(rng, size, N):
    g = rng.standard_normal((size, N))
    return g / np.linalg.norm(g, axis=1)[:, None]


def _sample_ball(rng, size, N, radius, power):
    """Points of B_radius with density proportional to |x|^-power (power < N)."""
    k = N - power
    r = radius * _uniform_open(rng, size) ** (1.0 / k)
    x = r[:, None] * _directions(rng, size, N)
    with np.errstate(divide="ignore"):
        q = k / (sphere_area(N) * radius ** k) * r ** (-power)
    return x, r, q


# -- deterministic radial path -------------------------------------------

def _local_exponent(profile, r0, r1):
    g0 = abs(float(profile(np.array([r0]))[0]))
    g1 = abs(float(profile(np.array([r1]))[0]))
    if g0 == 0 and g1 == 0:
        return None
    if g0 == 0 or g1 == 0 or not (math.isfinite(g0) and math.isfinite(g1)):
        return math.inf if g0 == 0 else -math.inf
    return math.log(g1 / g0) / math.log(r1 / r0)


def integrate_radial(profile: Callable, beta: float, N: int, rmax: float = math.inf, *,
                     length_scale: float = 1.0, rtol: float = RADIAL_RTOL) -> Estimate:
    """``int_{|x|<rmax} g(|x|) |x|^-beta dx = |S^{N-1}| int_0^rmax g(r) r^(N-1-beta) dr``.

    The mesh is graded geometrically towards r = 0; the innermost panel
    absorbs the algebraic factor (and any power-law behaviour of g) into a
    QUADPACK algebraic weight.
    """
    L = length_scale if math.isfinite(length_scale) and length_scale > 0 else 1.0
    top = rmax if math.isfinite(rmax) else L
    if top <= 0:
        return Estimate(0.0, 0.0, 0, "radial")

    e0 = _local_exponent(profile, 1e-12 * top, 1e-9 * top)
    if e0 is not None and e0 + N - beta <= 1e-9:
        raise NonIntegrableSingularity(
            f"integrand ~ r^{e0 + N - 1 - beta:.6g} near 0 is not integrable")
    fold = 0.0 if e0 is None or e0 >= -1e-6 else e0
    if e0 is not None and e0 == -math.inf:
        raise NonIntegrableSingularity("profile is infinite near r = 0")

    if not math.isfinite(rmax):
        einf = _local_exponent(profile, 1e6 * L, 1e8 * L)
        if einf is not None and einf + N - beta >= -1e-9:
            raise NonIntegrableSingularity("radial integrand does not decay at infinity")

    alg = N - 1.0 - beta + fold

    def g(r):
        return float(profile(np.array([r]))[0])

    tiny = 1e-300 * top

    def folded(r):
        r = max(r, tiny)
        return g(r) * r ** (-fold) if fold else g(r)

    def plain(r):
        return g(r) * r ** (N - 1.0 - beta)

    pieces = []
    breaks = [top * 0.5 ** k for k in range(_PANELS, -1, -1)]
    pieces.append(_quad(folded, 0.0, breaks[0], rtol, weight="alg", wvar=(alg, 0.0)))
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        pieces.append(_quad(plain, lo, hi, rtol))
    if not math.isfinite(rmax):
        pieces.append(_quad(plain, top, 8.0 * top, rtol))
        pieces.append(_quad(plain, 8.0 * top, math.inf, rtol))

    total = math.fsum(v for v, _, _ in pieces)
    err = math.fsum(e for _, e, _ in pieces)
    evals = sum(n for _, _, n in pieces)
    if not math.isfinite(total):
        raise NoConvergence("radial quadrature produced a non-finite value")
    if err > rtol * abs(total) + 1e-14:
        raise NoConvergence(f"radial quadrature error {err:.3g} exceeds target")
    area = sphere_area(N)
    return Estimate(area * total, 0.0, evals, "radial",
                    {"error_bound": area * err, "near_origin_exponent": e0})


def _quad(fn, lo, hi, rtol, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(fn, lo, hi, epsabs=1e-15, epsrel=min(rtol * 1e-2, 1e-10),
                             limit=400, full_output=1, **kw)
    value, abserr, info = out[0], out[1], out[2]
    return value, abserr, int(info.get("neval", 0)) if isinstance(info, dict) else 0


# -- Monte Carlo over R^N -------------------------------------------------

@dataclass(frozen=True)
class Importance:
    """Density proportional to ``|x|^-power`` on the ball of radius ``radius``.

    ``radius=None`` means the truncation radius (in length-scale units).
    """

    radius: Optional[float] = None
    power: float = 0.0


def integrate_mc(f: Callable, N: int, cfg: McConfig, importance: Optional[Importance] = None,
                 *, length_scale: float = 1.0, stream: int = 0) -> Estimate:
    """Unbiased importance-sampling estimate of ``int f`` over the importance ball."""
    importance = importance or Importance()
    radius = importance.radius
    if radius is None:
        radius = cfg.truncation_radius * length_scale
    power = min(importance.power, N - 0.5)

    def chunk(i, size):
        rng = chunk_generator(cfg.seed, stream, i)
        x, _, q = _sample_ball(rng, size, N, radius, power)
        fx = np.asarray(f(x), dtype=float)
        return np.where(fx == 0.0, 0.0, fx / q)

    n, s1, s2 = _reduce_chunks(chunk, cfg.sample_count, cfg)
    mean, err = _mean_and_error(n, s1, s2)

    # density vanishes outside the ball: probe a shell just beyond it
    rng = chunk_generator(cfg.seed, stream + 1_000_003, 0)
    m = 4096
    shell_r = radius * (1.0 + 0.5 * rng.random(m))
    shell = shell_r[:, None] * _directions(rng, m, N)
    inside = _sample_ball(rng, m, N, radius, 0.0)[0]
    tail = float(np.max(np.abs(f(shell))))
    scale_ref = float(np.max(np.abs(f(inside))))
    if tail > 1e-9 * max(scale_ref, 1e-300) and tail > 0:
        raise ZeroDensityRegion(
            f"integrand reaches {tail:.3g} outside the sampling ball of radius {radius:g}")
    return Estimate(mean, err, n, "mc", {"radius": radius, "power": power, "tail_max": tail})


# -- Monte Carlo over R^N x R^N -------------------------------------------

def gagliardo_mc(F: Callable, kernel_exponent: float, cfg: McConfig, *, N: int,
                 x_radius: float, holder_power: float, x_weight: float = 0.0,
                 length_scale: float = 1.0, stream: int = 10) -> Estimate:
    """Estimate ``int_{|x|<x_radius} int_{R^N} F(x, z) |z|^-kernel_exponent dz dx``.

    ``F`` must vanish unless ``|x| < x_radius`` and behave like
    ``|z|^holder_power`` as z -> 0. The z-radius is stratified at the
    split radius: the inner stratum samples a density proportional to
    ``r^(g-1)`` with ``g = (holder_power - (kernel_exponent - N)) / 2``,
    the outer stratum samples the Pareto law that matches the kernel tail.
    ``x`` is drawn with density proportional to ``|x|^-x_weight``.
    """
    delta = kernel_exponent - N
    if not delta > 0:
        raise NonIntegrableSingularity("kernel tail |z|^-k needs k > N")
    g = 0.5 * (holder_power - delta)
    if not g > 0:
        raise NonIntegrableSingularity(
            f"near-diagonal exponent {holder_power - kernel_exponent + N - 1:.6g} "
            "is not integrable against dr")
    eps = cfg.singular_split_radius * length_scale
    area = sphere_area(N)
    n_in = int(round(cfg.sample_count * cfg.inner_fraction))
    n_out = cfg.sample_count - n_in

    def stratum(inner):
        def chunk(i, size):
            rng = chunk_generator(cfg.seed, stream + (0 if inner else 1), i)
            x, _, qx = _sample_ball(rng, size, N, x_radius, x_weight)
            u = _uniform_open(rng, size)
            if inner:
                r = eps * u ** (1.0 / g)
                r = np.maximum(r, 1e-150 * eps)
                factor = area * eps ** g / g * r ** (N - kernel_exponent - g)
            else:
                r = np.minimum(eps * u ** (-1.0 / delta), 1e100 * eps)
                factor = np.full(size, area / (delta * eps ** delta))
            z = r[:, None] * _directions(rng, size, N)
            val = np.asarray(F(x, z), dtype=float)
            return np.where(val == 0.0, 0.0, val * factor / qx)

        n = n_in if inner else n_out
        return _mean_and_error(*_reduce_chunks(chunk, n, cfg))

    m_in, e_in = stratum(True)
    m_out, e_out = stratum(False)
    return Estimate(m_in + m_out, math.hypot(e_in, e_out), cfg.sample_count, "mc2n",
                    {"inner": m_in, "inner_se": e_in, "outer": m_out, "outer_se": e_out,
                     "split_radius": eps, "x_radius": x_radius})

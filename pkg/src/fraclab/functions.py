"""Closed-form test functions on R^N with exact gradients.

Every callable takes points of shape ``(M, N)`` and returns values of
shape ``(M,)`` (``eval``) or ``(M, N)`` (``grad``).
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import UnknownName

# exp(-1/d) underflows to 0 for d below this; cutting here avoids inf * 0
_BUMP_FLOOR = 1.0 / 740.0

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


class Smoothness(str, enum.Enum):
    CC_INF = "C_c^inf"
    DECAY = "smooth_with_decay"
    NONSMOOTH = "non_smooth"


def _norm(x):
    return np.sqrt(np.einsum("...i,...i->...", x, x))


def bump_profile(r):
    r = np.asarray(r, dtype=float)
    d = 1.0 - r * r
    out = np.zeros_like(d)
    m = d > _BUMP_FLOOR
    out[m] = np.exp(-1.0 / d[m])
    return out


def bump_dprofile_over_r(r):
    """``b'(r) / r`` for the standard bump, finite at r = 0."""
    r = np.asarray(r, dtype=float)
    d = 1.0 - r * r
    out = np.zeros_like(d)
    m = d > _BUMP_FLOOR
    dm = d[m]
    out[m] = -2.0 * np.exp(-1.0 / dm) / (dm * dm)
    return out


def bump_dprofile(r):
    return np.asarray(r, dtype=float) * bump_dprofile_over_r(r)


def _transition_density(t):
    """The bump rescaled to (1, 2), integrated to build the smooth step."""
    t = np.asarray(t, dtype=float)
    d = (t - 1.0) * (2.0 - t)
    out = np.zeros_like(d)
    m = d > _BUMP_FLOOR / 4.0
    out[m] = np.exp(-1.0 / d[m])
    return out


def _transition_density_derivative(t):
    t = np.asarray(t, dtype=float)
    d = (t - 1.0) * (2.0 - t)
    out = np.zeros_like(d)
    m = d > _BUMP_FLOOR / 4.0
    dm = d[m]
    out[m] = np.exp(-1.0 / dm) * (3.0 - 2.0 * t[m]) / (dm * dm)
    return out


def _transition_integral(r):
    """Integral of the transition density over (1, r), 64-point Gauss-Legendre."""
    r = np.clip(np.asarray(r, dtype=float), 1.0, 2.0)
    half = 0.5 * (r - 1.0)
    nodes = 1.0 + half[..., None] * (_GL_X + 1.0)
    return (half[..., None] * _GL_W * _transition_density(nodes)).sum(axis=-1)


_TRANSITION_MASS = float(_transition_integral(np.array(2.0)))


def smooth_step(r):
    """C^inf monotone T with T = 1 on [0, 1] and T = 0 on [2, inf)."""
    r = np.asarray(r, dtype=float)
    out = np.where(r <= 1.0, 1.0, 0.0)
    m = (r > 1.0) & (r < 2.0)
    out[m] = 1.0 - _transition_integral(r[m]) / _TRANSITION_MASS
    return out


def smooth_step_derivative(r):
    return -_transition_density(r) / _TRANSITION_MASS


def smooth_step_second_derivative(r):
    return -_transition_density_derivative(r) / _TRANSITION_MASS


@dataclass(frozen=True)
class TestFunction:
    """An analytically defined ``u: R^N -> R`` with metadata used by the integrators.

    ``length_scale`` is the natural unit of length of the function; the
    Monte Carlo integrators express their truncation and split radii in
    this unit, so they transform covariantly under :func:`scale`.
    """

    __test__ = False  # not a pytest class

    name: str
    N: int
    eval: Callable
    grad: Optional[Callable] = None
    support_radius: float = math.inf
    radial: bool = False
    profile: Optional[Callable] = None
    dprofile: Optional[Callable] = None
    smoothness: Smoothness = Smoothness.CC_INF
    length_scale: float = 1.0
    profile_inverse: Optional[Callable] = None
    decreasing: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def smooth(self) -> bool:
        return self.smoothness is not Smoothness.NONSMOOTH

    def __call__(self, x):
        return self.eval(np.atleast_2d(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class ScaledFunction(TestFunction):
    """``u_lam(x) = lam**kappa * u(lam x)``."""

    base: Optional[TestFunction] = None
    lam: float = 1.0
    kappa: float = 0.0


def _radial(name, N, profile, dprofile_over_r, *, support, smoothness, inverse=None,
            length_scale=1.0, decreasing=True, meta=None):
    def ev(x):
        return profile(_norm(x))

    grad = None
    if dprofile_over_r is not None:
        def grad(x):
            return dprofile_over_r(_norm(x))[:, None] * x

    def dprofile(r):
        r = np.asarray(r, dtype=float)
        return r * dprofile_over_r(r)

    return TestFunction(
        name=name, N=N, eval=ev, grad=grad, support_radius=support, radial=True,
        profile=profile, dprofile=dprofile if dprofile_over_r is not None else None,
        smoothness=smoothness, length_scale=length_scale, profile_inverse=inverse,
        decreasing=decreasing, meta=dict(meta or {}),
    )


def bump(N: int) -> TestFunction:
    def inverse(t):
        # exp(-1/(1-r^2)) = t  <=>  r = sqrt(1 + 1/ln t), valid for t < 1/e
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        m = (t > 0) & (t < math.exp(-1.0))
        out[m] = np.sqrt(1.0 + 1.0 / np.log(t[m]))
        out[t <= 0] = 1.0
        return out

    return _radial("bump", N, bump_profile, bump_dprofile_over_r, support=1.0,
                   smoothness=Smoothness.CC_INF, inverse=inverse)


def _step_over_r(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    m = (r > 1.0) & (r < 2.0)
    out[m] = smooth_step_derivative(r[m]) / r[m]
    return out


def plateau_bump(N: int) -> TestFunction:
    return _radial("plateau_bump", N, smooth_step, _step_over_r, support=2.0,
                   smoothness=Smoothness.CC_INF, length_scale=2.0)


def gaussian(N: int) -> TestFunction:
    def profile(r):
        r = np.asarray(r, dtype=float)
        return np.exp(-r * r)

    def dpr(r):
        r = np.asarray(r, dtype=float)
        return -2.0 * np.exp(-r * r)

    def inverse(t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, np.inf)
        m = t > 0
        out[m] = np.sqrt(np.maximum(-np.log(np.minimum(t[m], 1.0)), 0.0))
        return out

    return _radial("gaussian", N, profile, dpr, support=math.inf,
                   smoothness=Smoothness.DECAY, inverse=inverse)


def poly_bump(N: int) -> TestFunction:
    def ev(x):
        return x[:, 0] * bump_profile(_norm(x))

    def grad(x):
        r = _norm(x)
        g = (x[:, 0] * bump_dprofile_over_r(r))[:, None] * x
        g[:, 0] += bump_profile(r)
        return g

    return TestFunction("poly_bump", N, ev, grad, support_radius=1.0, radial=False,
                        smoothness=Smoothness.CC_INF)


def power_singular(N: int, d: float) -> TestFunction:
    """``|x|**-d``; rearrangement use only."""
    d = float(d)

    def profile(r):
        with np.errstate(divide="ignore"):
            return np.asarray(r, dtype=float) ** (-d)

    def dpr(r):
        with np.errstate(divide="ignore"):
            return -d * np.asarray(r, dtype=float) ** (-d - 2.0)

    def inverse(t):
        with np.errstate(divide="ignore"):
            return np.asarray(t, dtype=float) ** (-1.0 / d)

    return _radial(f"power_singular({d:g})", N, profile, dpr, support=math.inf,
                   smoothness=Smoothness.NONSMOOTH, inverse=inverse, meta={"d": d})


def ball_indicator(N: int, R: float = 1.0) -> TestFunction:
    """Indicator of the closed ball of radius ``R``; rearrangement use only."""
    R = float(R)

    def profile(r):
        return np.where(np.asarray(r, dtype=float) <= R, 1.0, 0.0)

    def inverse(t):
        t = np.asarray(t, dtype=float)
        return np.where(t < 1.0, R, 0.0)

    f = _radial(f"ball_indicator({R:g})", N, profile, None, support=R,
                smoothness=Smoothness.NONSMOOTH, inverse=inverse, length_scale=R,
                meta={"R": R})
    return f


def zero(N: int) -> TestFunction:
    return _radial("zero", N, lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                   lambda r: np.zeros_like(np.asarray(r, dtype=float)), support=0.0,
                   smoothness=Smoothness.CC_INF, decreasing=True)


def constant(N: int, c: float = 1.0) -> TestFunction:
    c = float(c)
    return _radial(f"constant({c:g})", N, lambda r: np.full_like(np.asarray(r, dtype=float), c),
                   lambda r: np.zeros_like(np.asarray(r, dtype=float)), support=math.inf,
                   smoothness=Smoothness.DECAY, decreasing=False)


_CATALOG = {
    "bump": bump,
    "plateau_bump": plateau_bump,
    "gaussian": gaussian,
    "poly_bump": poly_bump,
    "power_singular": power_singular,
    "ball_indicator": ball_indicator,
    "zero": zero,
}

SMOOTH_CATALOG = ("bump", "plateau_bump", "gaussian", "poly_bump")

_CALL_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


def catalog(name: str, N: int, *args) -> TestFunction:
    """Look up a catalog entry; ``"power_singular(1)"`` style names are accepted."""
    m = _CALL_RE.match(name)
    if not m or m.group(1) not in _CATALOG:
        raise UnknownName(name)
    key, arg = m.group(1), m.group(2)
    if arg:
        args = tuple(float(v) for v in arg.split(",")) + tuple(args)
    if key == "power_singular" and not args:
        raise UnknownName("power_singular needs an exponent d")
    return _CATALOG[key](N, *args)


def scale(u: TestFunction, lam: float, kappa: float = 0.0) -> ScaledFunction:
    """Return ``u_lam(x) = lam**kappa u(lam x)`` with gradient ``lam**(kappa+1) (grad u)(lam x)``."""
    lam = float(lam)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    amp = lam ** kappa
    damp = lam ** (kappa + 1.0)

    def ev(x):
        return amp * u.eval(lam * x)

    grad = None
    if u.grad is not None:
        def grad(x):
            return damp * u.grad(lam * x)

    profile = dprofile = inverse = None
    if u.profile is not None:
        def profile(r):
            return amp * u.profile(lam * np.asarray(r, dtype=float))
    if u.dprofile is not None:
        def dprofile(r):
            return damp * u.dprofile(lam * np.asarray(r, dtype=float))
    if u.profile_inverse is not None and amp > 0:
        def inverse(t):
            return u.profile_inverse(np.asarray(t, dtype=float) / amp) / lam

    return ScaledFunction(
        name=f"{u.name}@lam={lam:g},kappa={kappa:g}", N=u.N, eval=ev, grad=grad,
        support_radius=u.support_radius / lam, radial=u.radial, profile=profile,
        dprofile=dprofile, smoothness=u.smoothness, length_scale=u.length_scale / lam,
        profile_inverse=inverse, decreasing=u.decreasing, meta=dict(u.meta),
        base=u, lam=lam, kappa=float(kappa),
    )


def multiply(u: TestFunction, c: float) -> TestFunction:
    c = float(c)
    grad = None if u.grad is None else (lambda x: c * u.grad(x))
    profile = None if u.profile is None else (lambda r: c * u.profile(r))
    dprofile = None if u.dprofile is None else (lambda r: c * u.dprofile(r))
    return replace(u, name=f"{c:g}*{u.name}", eval=lambda x: c * u.eval(x), grad=grad,
                   profile=profile, dprofile=dprofile, profile_inverse=None,
                   decreasing=u.decreasing and c > 0)


def add(u: TestFunction, v: TestFunction) -> TestFunction:
    if u.N != v.N:
        raise ValueError("dimension mismatch")
    grad = None
    if u.grad is not None and v.grad is not None:
        grad = lambda x: u.grad(x) + v.grad(x)  # noqa: E731
    radial = u.radial and v.radial
    smoothness = max(u.smoothness, v.smoothness,
                     key=[Smoothness.CC_INF, Smoothness.DECAY, Smoothness.NONSMOOTH].index)
    return TestFunction(
        name=f"({u.name}+{v.name})", N=u.N, eval=lambda x: u.eval(x) + v.eval(x), grad=grad,
        support_radius=max(u.support_radius, v.support_radius), radial=radial,
        profile=(lambda r: u.profile(r) + v.profile(r)) if radial else None,
        dprofile=(lambda r: u.dprofile(r) + v.dprofile(r))
        if radial and u.dprofile and v.dprofile else None,
        smoothness=smoothness, length_scale=max(u.length_scale, v.length_scale),
    )


def translate(u: TestFunction, shift) -> TestFunction:
    """``x -> u(x - shift)``; the result is not radial."""
    shift = np.asarray(shift, dtype=float)
    grad = None if u.grad is None else (lambda x: u.grad(x - shift))
    return TestFunction(
        name=f"{u.name}@shift", N=u.N, eval=lambda x: u.eval(x - shift), grad=grad,
        support_radius=u.support_radius + float(np.linalg.norm(shift)), radial=False,
        smoothness=u.smoothness, length_scale=u.length_scale,
    )


# vector/scalar fields consumed by the norms

@dataclass(frozen=True)
class Field:
    """A scalar (``components == 1``) or vector field built from test functions.

    ``radial_magnitude`` maps r to ``|F|`` when the magnitude is radial,
    enabling the 1-D quadrature path.
    """

    name: str
    N: int
    values: Callable
    components: int
    support_radius: float
    length_scale: float
    radial_magnitude: Optional[Callable] = None
    admissible: bool = True


def as_field(u: TestFunction) -> Field:
    if isinstance(u, Field):
        return u
    mag = None
    if u.radial and u.profile is not None:
        mag = lambda r: np.abs(u.profile(r))  # noqa: E731
    return Field(u.name, u.N, u.eval, 1, u.support_radius, u.length_scale, mag, u.smooth)


def gradient_field(u: TestFunction) -> Field:
    if u.grad is None:
        raise ValueError(f"{u.name} has no gradient")
    mag = None
    if u.radial and u.dprofile is not None:
        mag = lambda r: np.abs(u.dprofile(r))  # noqa: E731
    return Field(f"grad {u.name}", u.N, u.grad, u.N, u.support_radius, u.length_scale, mag,
                 u.smooth)


def field_difference(f: Field, g: Field) -> Field:
    if f.N != g.N or f.components != g.components:
        raise ValueError("field shapes differ")
    return Field(
        f"({f.name})-({g.name})", f.N, lambda x: f.values(x) - g.values(x), f.components,
        max(f.support_radius, g.support_radius), max(f.length_scale, g.length_scale),
        None, f.admissible and g.admissible,
    )

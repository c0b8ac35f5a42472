"""Exponent algebra, parameter validation and the CKN admissibility predicate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Integral

from .errors import ConstraintViolation, DegenerateExponent

CKN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Params:
    """Exponent bundle ``(N, s, p, a)`` with ``sigma = s - 1``.

    Construction does not validate; use :func:`validate` for the open
    parameter windows. Unvalidated bundles are still useful for pure
    exponent arithmetic at the window boundaries.
    """

    N: int
    s: float
    p: float
    a: float

    @property
    def sigma(self) -> float:
        return self.s - 1.0

    @property
    def p_star_sigma(self) -> float:
        return critical_exponent(self, self.sigma)

    @property
    def p_star_s(self) -> float:
        return critical_exponent(self, self.s)

    @property
    def p_lorentz(self) -> float:
        return lorentz_target(self)

    @property
    def homogeneity_kappa(self) -> float:
        """Exponent kappa making ``lambda**kappa * u(lambda x)`` norm preserving."""
        return (self.N - self.s * self.p - 2.0 * self.a) / self.p

    def as_dict(self) -> dict:
        return {"N": self.N, "s": self.s, "sigma": self.sigma, "p": self.p, "a": self.a}


def validate(N, s=None, p=None, a=None) -> Params:
    """Check the open parameter windows and return a :class:`Params`.

    Accepts either four raw values or an existing :class:`Params`.
    Raises :class:`ConstraintViolation` naming the first violated window,
    checked in the order dimension, s, p, a.
    """
    if isinstance(N, Params):
        N, s, p, a = N.N, N.s, N.p, N.a
    if isinstance(N, bool) or not isinstance(N, Integral) or N < 2:
        raise ConstraintViolation("dimension", N, "integer N >= 2")
    N = int(N)
    s, p, a = float(s), float(p), float(a)
    if not (1.0 < s < 2.0):
        raise ConstraintViolation("s-window", s, "(1, 2)")
    if not (1.0 < p < N / s):
        raise ConstraintViolation("p-window", p, f"(1, N/s) = (1, {N / s!r})")
    a_max = (N - s * p) / 2.0
    if not (0.0 <= a < a_max):
        raise ConstraintViolation("a-window", a, f"[0, (N - s p)/2) = [0, {a_max!r})")
    return Params(N, s, p, a)


def critical_exponent(params: Params, alpha: float) -> float:
    """Return ``N p / (N - alpha p)``."""
    denom = params.N - alpha * params.p
    if not denom > 0:
        raise DegenerateExponent(f"N - alpha*p = {denom!r} <= 0")
    return params.N * params.p / denom


def lorentz_target(params: Params) -> float:
    """Return the first Lorentz index ``N p / (N - s p - 2 a)``."""
    denom = params.N - params.s * params.p - 2.0 * params.a
    if not denom > 0:
        raise DegenerateExponent(f"N - s*p - 2a = {denom!r} <= 0")
    return params.N * params.p / denom


def unit_ball_volume(N: int) -> float:
    """Lebesgue measure of the unit ball in R^N, via log-gamma."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return math.exp(0.5 * N * math.log(math.pi) - math.lgamma(0.5 * N + 1.0))


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere S^{N-1}, equal to N * omega_N."""
    return N * unit_ball_volume(N)


# scaling exponents under u_lam(x) = lam**kappa * u(lam x)

def weighted_scaling_exponent(N, q, beta, kappa=0.0, derivatives=0) -> float:
    """Exponent e with ``int |D^k u_lam|^q |x|^-beta = lam**e * (same for u)``."""
    return (kappa + derivatives) * q + beta - N


def gagliardo_scaling_exponent(N, t, p, a, kappa=0.0, derivatives=0) -> float:
    """Exponent e of the p-th power of the weighted order-t seminorm of ``D^k u_lam``."""
    return (kappa + derivatives) * p + t * p + 2.0 * a - N


def lorentz_scaling_exponent(N, p_index, q_index, kappa=0.0) -> float:
    """Exponent e with ``|u_lam|_{p,q}^q = lam**e |u|_{p,q}^q``."""
    return kappa * q_index - N * q_index / p_index


@dataclass(frozen=True)
class CknParams:
    """Exponents of the Caffarelli-Kohn-Nirenberg interpolation inequality.

    ``m`` is derived from ``(l, gamma, beta)`` and never stored.
    """

    N: int
    p: float
    q: float
    r: float
    alpha: float
    beta: float
    gamma: float
    l: float

    @property
    def m(self) -> float:
        return self.l * self.gamma + (1.0 - self.l) * self.beta

    @classmethod
    def from_params(cls, params: Params, q=None, beta=0.0) -> "CknParams":
        """The first-order Hardy choice: r = p, l = 1, alpha = -(sigma p + 2a)/p, gamma = -(s p + 2a)/p.

        With ``l = 1`` the ``(q, beta)`` pair only enters a positivity
        condition; ``q = p`` and ``beta = 0`` are used unless given.
        """
        p, a = params.p, params.a
        return cls(
            N=params.N,
            p=p,
            q=p if q is None else q,
            r=p,
            alpha=-(params.sigma * p + 2.0 * a) / p,
            beta=beta,
            gamma=-(params.s * p + 2.0 * a) / p,
            l=1.0,
        )


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    checks: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)

    @property
    def failures(self) -> list:
        return [name for name, ok in self.checks.items() if not ok]


def ckn_admissible(c: CknParams, tol: float = CKN_TOLERANCE) -> AdmissibilityReport:
    """Evaluate every admissibility relation for ``c``; the verdict is their conjunction."""
    N = c.N
    m = c.m
    pos_p = 1.0 / c.p + c.alpha / N
    pos_q = 1.0 / c.q + c.beta / N
    pos_r = 1.0 / c.r + m / N
    gradient_side = 1.0 / c.p + (c.alpha - 1.0) / N
    balance_rhs = c.l * gradient_side + (1.0 - c.l) * pos_q
    gap = c.alpha - c.gamma

    checks = {
        "ranges": c.p >= 1.0 and c.q >= 1.0 and c.r > 0.0 and 0.0 <= c.l <= 1.0,
        "positivity_p": pos_p > 0.0,
        "positivity_q": pos_q > 0.0,
        "positivity_r": pos_r > 0.0,
        "balance": abs(pos_r - balance_rhs) <= tol,
    }
    if c.l > 0:
        checks["alpha_minus_gamma_nonnegative"] = gap >= -tol
        if abs(pos_r - gradient_side) <= tol:
            checks["alpha_minus_gamma_at_most_one"] = gap <= 1.0 + tol
    values = {
        "m": m,
        "1/p+alpha/N": pos_p,
        "1/q+beta/N": pos_q,
        "1/r+m/N": pos_r,
        "balance_rhs": balance_rhs,
        "alpha-gamma": gap,
    }
    return AdmissibilityReport(all(checks.values()), checks, values)

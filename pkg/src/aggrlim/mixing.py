"""Mixing laws for the random coefficient alpha.

A law has density ``c * psi(x) * (1 - x)**beta`` on [0, 1) where ``psi`` is a
raw profile and ``c`` normalizes the density.  Three profiles are supported:
the constant profile (the default, with closed-form oracles everywhere), a
polynomial with coefficients in increasing degree, and a piecewise-linear
table.

Simulation code works with ``u = 1 - alpha`` rather than alpha itself so
that the heavy tail of ``1 / (1 - alpha)`` is resolved without cancellation.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import integrate, special

from .rng import uniform

PROFILE_CONSTANT = 0
PROFILE_POLY = 1
PROFILE_GRID = 2

_EPSREL = 1e-10
_EPSABS = 1e-14
_LIMIT = 200


@dataclass(frozen=True)
class PsiProfile:
    """Unnormalized factor psi(x) of the mixing density.

    Use :meth:`constant`, :meth:`poly` or :meth:`grid` to build one.
    """

    kind: int
    coefs: tuple = ()
    grid_x: tuple = ()
    grid_y: tuple = ()

    @classmethod
    def constant(cls):
        return cls(PROFILE_CONSTANT)

    @classmethod
    def poly(cls, coefs):
        coefs = tuple(float(c) for c in coefs)
        if not coefs:
            raise ValueError("polynomial profile needs at least one coefficient")
        return cls(PROFILE_POLY, coefs=coefs)

    @classmethod
    def grid(cls, points, psi1_raw):
        """Piecewise-linear profile through ``points`` = [(x, psi(x)), ...].

        The table must start at x = 0.  If it stops short of 1 the segment to
        ``(1, psi1_raw)`` closes it; there is no extrapolation.
        """
        pts = [(float(x), float(y)) for x, y in points]
        if len(pts) < 1:
            raise ValueError("grid profile needs at least one point")
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        if xs[0] != 0.0:
            raise ValueError("grid profile must start at x = 0")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("grid abscissae must be strictly increasing")
        if xs[-1] > 1.0:
            raise ValueError("grid abscissae must lie in [0, 1]")
        psi1_raw = float(psi1_raw)
        if xs[-1] < 1.0:
            xs.append(1.0)
            ys.append(psi1_raw)
        elif ys[-1] != psi1_raw:
            raise ValueError(
                f"grid value at x = 1 ({ys[-1]}) disagrees with psi1_raw ({psi1_raw})")
        return cls(PROFILE_GRID, grid_x=tuple(xs), grid_y=tuple(ys))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == PROFILE_CONSTANT:
            return np.ones_like(x)
        if self.kind == PROFILE_POLY:
            return np.polynomial.polynomial.polyval(x, self.coefs)
        return np.interp(x, self.grid_x, self.grid_y)

    @property
    def limit_at_one(self):
        if self.kind == PROFILE_CONSTANT:
            return 1.0
        if self.kind == PROFILE_POLY:
            return float(sum(self.coefs))
        return self.grid_y[-1]

    def _candidates(self):
        # points where the extreme values on [0, 1] can occur
        if self.kind == PROFILE_CONSTANT:
            return np.array([0.0])
        if self.kind == PROFILE_GRID:
            return np.asarray(self.grid_x)
        pts = [0.0, 1.0]
        if len(self.coefs) > 2:
            deriv = np.polynomial.polynomial.polyder(self.coefs)
            for r in np.polynomial.polynomial.polyroots(deriv):
                if abs(r.imag) < 1e-12 and 0.0 <= r.real <= 1.0:
                    pts.append(r.real)
        return np.array(pts)

    @property
    def minimum(self):
        return float(np.min(self(self._candidates())))

    @property
    def supremum(self):
        return float(np.max(self(self._candidates())))

    @property
    def breakpoints(self):
        if self.kind == PROFILE_GRID:
            return self.grid_x[1:-1]
        return ()


@dataclass(frozen=True)
class MixingLaw:
    """Law of alpha with density ``norm_constant * psi(x) * (1 - x)**beta``.

    ``psi1`` is the limit at 1 of the *normalized* psi, i.e. the constant that
    enters every limit variance.
    """

    beta: float
    psi_profile: PsiProfile
    psi1: float
    norm_constant: float
    _sup: float = field(default=1.0, repr=False)

    def psi(self, x):
        return self.norm_constant * self.psi_profile(x)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where((x >= 0) & (x < 1),
                       self.psi(x) * np.power(np.clip(1.0 - x, 0.0, None), self.beta),
                       0.0)
        return out if out.ndim else float(out)

    def tail_prob(self, h):
        """P(1 - alpha < h)."""
        h = min(float(h), 1.0)
        if h <= 0.0:
            return 0.0
        if self.psi_profile.kind == PROFILE_CONSTANT:
            return h ** (self.beta + 1.0)
        return _density_integral(self, lambda x: 1.0, 1.0 - h, 1.0, self.beta)

    def cdf(self, x):
        return 1.0 - self.tail_prob(1.0 - float(x))

    def kernel_args(self):
        """Plain-array encoding consumed by the numba kernels."""
        prof = self.psi_profile
        coefs = np.asarray(prof.coefs if prof.coefs else (1.0,), dtype=np.float64)
        gx = np.asarray(prof.grid_x if prof.grid_x else (0.0, 1.0), dtype=np.float64)
        gy = np.asarray(prof.grid_y if prof.grid_y else (1.0, 1.0), dtype=np.float64)
        return (np.int64(prof.kind), float(self.beta), coefs, gx, gy, float(self._sup))


def _coerce_profile(profile):
    if isinstance(profile, PsiProfile):
        return profile
    if profile is None or profile == "constant":
        return PsiProfile.constant()
    if isinstance(profile, dict):
        if "poly" in profile:
            return PsiProfile.poly(profile["poly"])
        if "grid" in profile:
            if "psi1_raw" not in profile:
                raise ValueError("grid profile requires a declared 'psi1_raw'")
            return PsiProfile.grid(profile["grid"], profile["psi1_raw"])
    raise ValueError(f"unrecognized psi profile: {profile!r}")


def _raw_mass(profile, beta):
    """Integral of psi(x) (1 - x)**beta over [0, 1)."""
    if profile.kind == PROFILE_CONSTANT:
        return 1.0 / (beta + 1.0)
    if profile.kind == PROFILE_POLY:
        return float(sum(c * special.beta(i + 1.0, beta + 1.0)
                         for i, c in enumerate(profile.coefs)))
    # linear pieces: closed-form antiderivatives in v = 1 - x
    b1, b2 = beta + 1.0, beta + 2.0
    total = 0.0
    xs, ys = profile.grid_x, profile.grid_y
    for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:]):
        slope = (y1 - y0) / (x1 - x0)
        # psi = A + slope * x = (A + slope) - slope * v
        a0 = y0 - slope * x0 + slope
        v0, v1 = 1.0 - x0, 1.0 - x1
        total += a0 * (v0 ** b1 - v1 ** b1) / b1 - slope * (v0 ** b2 - v1 ** b2) / b2
    return total


def make_mixing_law(profile="constant", beta=1.0):
    """Normalize ``profile`` against ``(1 - x)**beta``.

    Raises
    ------
    ValueError
        If ``beta <= -1``, the profile is negative somewhere on [0, 1), or
        its limit at 1 is not a positive finite number.
    """
    beta = float(beta)
    if not beta > -1.0:
        raise ValueError(f"beta must exceed -1 for an integrable density, got {beta}")
    prof = _coerce_profile(profile)
    if prof.minimum < 0.0:
        raise ValueError("psi profile takes negative values on [0, 1)")
    lim = prof.limit_at_one
    if not (lim > 0.0 and math.isfinite(lim)):
        raise ValueError(f"psi profile must have a positive finite limit at 1, got {lim}")
    sup = prof.supremum
    if not math.isfinite(sup):
        raise ValueError("psi profile is unbounded; no rejection envelope")
    c = 1.0 / _raw_mass(prof, beta)
    return MixingLaw(beta=beta, psi_profile=prof, psi1=c * lim, norm_constant=c, _sup=sup)


def law_from_config(cfg):
    """Build a law from ``{"profile": ..., "beta": ...}``."""
    if not isinstance(cfg, dict):
        raise ValueError("mixing config must be an object")
    return make_mixing_law(cfg.get("profile", "constant"), cfg.get("beta", 1.0))


# -- sampling ---------------------------------------------------------------

@njit(cache=True, inline="always")
def _eval_profile(kind, coefs, gx, gy, x):
    if kind == PROFILE_CONSTANT:
        return 1.0
    if kind == PROFILE_POLY:
        acc = 0.0
        for i in range(coefs.size - 1, -1, -1):
            acc = acc * x + coefs[i]
        return acc
    return np.interp(x, gx, gy)


@njit(cache=True, inline="always")
def draw_one_minus_alpha(st, kind, beta, coefs, gx, gy, sup):
    """Draw u = 1 - alpha; inverse CDF of the constant-profile law as envelope."""
    inv = 1.0 / (beta + 1.0)
    while True:
        # sqrt for the default beta = 1: a runtime-exponent pow dominates the draw cost
        u = math.sqrt(1.0 - uniform(st)) if beta == 1.0 else (1.0 - uniform(st)) ** inv
        if kind == PROFILE_CONSTANT:
            return u
        psi = _eval_profile(kind, coefs, gx, gy, 1.0 - u)
        if uniform(st) * sup < psi:
            return u


@njit(cache=True)
def _fill_one_minus_alpha(st, kind, beta, coefs, gx, gy, sup, out):
    for i in range(out.size):
        out[i] = draw_one_minus_alpha(st, kind, beta, coefs, gx, gy, sup)


def alpha_from_uniform(law, U):
    """Inverse CDF of a constant-profile law: ``1 - (1 - U)**(1 / (beta + 1))``."""
    if law.psi_profile.kind != PROFILE_CONSTANT:
        raise ValueError("closed-form inverse CDF exists only for the constant profile")
    if not 0.0 <= U < 1.0:
        raise ValueError("U must lie in [0, 1)")
    return 1.0 - (1.0 - U) ** (1.0 / (law.beta + 1.0))


def sample_one_minus_alpha(law, stream, size=None):
    n = 1 if size is None else int(size)
    out = np.empty(n, dtype=np.float64)
    _fill_one_minus_alpha(stream.state, *law.kernel_args(), out)
    return float(out[0]) if size is None else out


def sample_alpha(law, stream, size=None):
    """Draw alpha from ``law`` using ``stream`` (one value, or an array)."""
    u = sample_one_minus_alpha(law, stream, size)
    return 1.0 - u


# -- integrals against the density --------------------------------------------

def _density_integral(law, func, lo, hi, power, knots=(), epsabs=_EPSABS):
    """Integral over [lo, hi] of norm * psi(x) * func(x) * (1 - x)**power.

    The endpoint factor is handled by QUADPACK's algebraic weight on the
    piece touching x = 1; table knots and ``knots`` split the range.
    """
    prof = law.psi_profile
    c = law.norm_constant
    inner = sorted({x for x in tuple(prof.breakpoints) + tuple(knots) if lo < x < hi})
    edges = [lo] + inner + [hi]
    total = 0.0
    # top piece first so later pieces can take an absolute tolerance relative to it
    for a, b in reversed(list(zip(edges, edges[1:]))):
        if b <= a:
            continue
        tol = max(epsabs, 1e-13 * abs(total))
        if b == 1.0:
            val, _ = integrate.quad(lambda x: c * float(prof(x)) * func(x), a, b,
                                    weight="alg", wvar=(0.0, power),
                                    epsabs=tol, epsrel=_EPSREL, limit=_LIMIT)
        else:
            val, _ = integrate.quad(
                lambda x: c * float(prof(x)) * func(x) * (1.0 - x) ** power, a, b,
                epsabs=tol, epsrel=_EPSREL, limit=_LIMIT)
        total += val
    return total


def moment_diverges(law, p):
    """True when E[(1 - alpha)**(-p)] is infinite, i.e. p >= beta + 1."""
    return p >= law.beta + 1.0


def mixed_moment(law, k, p=0, q=0):
    """E[alpha**k (1 - alpha)**(-p) (1 + alpha)**(-q)].

    Returns ``math.inf`` when the moment diverges (``p >= beta + 1``), so
    callers can probe the finiteness boundary without exception handling.
    """
    k, p, q = int(k), int(p), int(q)
    if min(k, p, q) < 0:
        raise ValueError("k, p, q must be nonnegative integers")
    if moment_diverges(law, p):
        return math.inf
    knots = ()
    epsabs = _EPSABS
    if k > 40:
        # alpha**k lives within ~40/k of 1; resolve that layer on its own and
        # switch to a purely relative tolerance since the value is ~k**(p-beta-1)
        knots = (1.0 - 40.0 / k, 1.0 - 4.0 / k)
        epsabs = 0.0
    return _density_integral(law, lambda x: x ** k / (1.0 + x) ** q, 0.0, 1.0,
                             law.beta - p, knots=knots, epsabs=epsabs)


def h_tilde(lam, x):
    """Positive root u of ``lam * (2 - u) / u**2 = x``.

    Equivalently 1 - u is the point where lam (1 + a) / (1 - a)**2 crosses
    ``x``.  For ``x < lam`` the root exceeds 1 (the threshold lies below
    a = 0); callers that need a probability clamp it.
    """
    lam = float(lam)
    x = float(x)
    if lam <= 0.0 or x <= 0.0:
        raise ValueError("h_tilde needs lam > 0 and x > 0")
    return 1.0 / (0.25 + math.sqrt(0.0625 + x / (2.0 * lam)))


def scaled_tail(law, lam, N, x):
    """N * P(lam (1 + alpha) / (1 - alpha)**2 > N x), by quadrature."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    h = min(h_tilde(lam, N * x), 1.0)
    return N * _density_integral(law, lambda v: 1.0, 1.0 - h, 1.0, law.beta)

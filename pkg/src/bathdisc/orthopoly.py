"""Recurrence coefficients, orthonormal polynomials and Gauss rules.

Orthonormal polynomials for a measure mu obey

    sqrt(beta_{k+1}) P_{k+1}(x) = (x - alpha_k) P_k(x) - sqrt(beta_k) P_{k-1}(x),

with P_{-1} = 0 and P_0 = 1/sqrt(beta_0), beta_0 being the mass of mu. The
leading coefficient of every P_k is positive.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import (ConvergenceError, IllConditionedError, RangeError,
                     UnsupportedFamilyError, ValidationError)
from .measures import MAX_QUAD_POINTS, QUAD_ORDER, Measure

STIELTJES_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RecurrenceCoefficients:
    alpha: np.ndarray
    beta: np.ndarray
    measure: Measure = None

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        if alpha.shape != beta.shape or alpha.ndim != 1:
            raise ValidationError("alpha and beta must be 1-d arrays of equal length")
        if np.any(beta <= 0):
            raise ValidationError("all beta coefficients must be positive")
        alpha.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def __len__(self):
        return len(self.alpha)

    @property
    def mass(self):
        return float(self.beta[0])

    def truncate(self, n):
        return RecurrenceCoefficients(self.alpha[:n], self.beta[:n], self.measure)


@dataclass(frozen=True, eq=False)
class GaussRule:
    """Gauss knots (descending) and weights for an L-point rule."""

    knots: np.ndarray
    weights: np.ndarray
    measure: Measure = None

    @property
    def L(self):
        return len(self.knots)

    def integrate(self, f):
        return np.asarray(f(self.knots)) @ self.weights


# -- analytic recurrences ------------------------------------------------------

def jacobi_descriptor(measure):
    """Jacobi exponents and mass when ``measure`` is an affine Jacobi weight.

    Returns ``(a, b, alpha_exp, beta_exp, mass)`` describing the weight
    ``const * (b - x)**alpha_exp * (x - a)**beta_exp`` on [a, b], or ``None``.
    """
    sd, q = measure.density, measure.q
    lo, hi = measure.support
    width = hi - lo
    p = sd.params
    if sd.family == "power_law":
        s, amp = p["s"], p["alpha"]
        span = sd.omega_max - sd.omega_min
        if q == 0:
            return lo, hi, 0.0, s, 2 * amp * span * width ** (s + 1) / (s + 1)
        if sd.massless:
            # J(sqrt x)/pi = 2 alpha omega_max x**(s/2)
            e = s / 2
            return lo, hi, 0.0, e, 2 * amp * span * width ** (e + 1) / (e + 1)
        return None
    if (sd.family == "semicircle" and q == 0) or (sd.family == "rubin" and q == 1):
        return lo, hi, 0.5, 0.5, p["C"] * width**2 / 8
    return None


def jacobi_recurrence(n, a_exp, b_exp):
    """Monic recurrence of Jacobi polynomials on [-1, 1] for (1-y)^a (1+y)^b.

    Returns ``(alpha, beta)`` with beta[0] the mass of the weight.
    """
    alpha = np.zeros(n)
    beta = np.zeros(n)
    ab = a_exp + b_exp
    beta[0] = math.exp((ab + 1) * math.log(2.0) + math.lgamma(a_exp + 1)
                       + math.lgamma(b_exp + 1) - math.lgamma(ab + 2))
    if n == 0:
        return alpha, beta
    alpha[0] = (b_exp - a_exp) / (ab + 2)
    if n > 1:
        alpha[1] = (b_exp**2 - a_exp**2) / ((ab + 2) * (ab + 4))
        beta[1] = 4 * (a_exp + 1) * (b_exp + 1) / ((ab + 2) ** 2 * (ab + 3))
    k = np.arange(2, n, dtype=float)
    two_k = 2 * k + ab
    alpha[2:] = (b_exp**2 - a_exp**2) / (two_k * (two_k + 2))
    beta[2:] = (4 * k * (k + a_exp) * (k + b_exp) * (k + ab)
                / (two_k**2 * (two_k + 1) * (two_k - 1)))
    return alpha, beta


def recurrence_analytic(measure, n):
    """Closed-form recurrence for Jacobi-type measures, mapped to the support."""
    desc = jacobi_descriptor(measure)
    if desc is None:
        raise UnsupportedFamilyError(
            f"{measure.density.family} (q={measure.q}) is not a Jacobi-type weight; "
            "use recurrence_stieltjes"
        )
    lo, hi, a_exp, b_exp, mass = desc
    alpha, beta = jacobi_recurrence(n, a_exp, b_exp)
    half = 0.5 * (hi - lo)
    alpha = lo + (alpha + 1.0) * half
    beta = beta * half**2
    beta[0] = mass
    return RecurrenceCoefficients(alpha, beta, measure)


# -- discretised Stieltjes -----------------------------------------------------

def stieltjes(x, w, n):
    """Stieltjes procedure on the discrete measure sum_i w_i delta(x - x_i)."""
    if np.count_nonzero(w > 0) < n:
        raise ValidationError("discrete measure has fewer support points than coefficients")
    alpha = np.empty(n)
    beta = np.empty(n)
    beta[0] = w.sum()
    q_prev = np.zeros_like(x)
    q = np.full_like(x, 1.0 / math.sqrt(beta[0]))
    for k in range(n):
        alpha[k] = np.dot(w, x * q * q)
        if k == n - 1:
            break
        r = (x - alpha[k]) * q - math.sqrt(beta[k]) * q_prev if k else (x - alpha[k]) * q
        beta[k + 1] = np.dot(w, r * r)
        q_prev, q = q, r / math.sqrt(beta[k + 1])
    return alpha, beta


def recurrence_stieltjes(measure, n, panels=None, order=QUAD_ORDER, tol=STIELTJES_TOL):
    """Recurrence coefficients by the discretised Stieltjes procedure.

    The measure is discretised with a composite panel rule; the panel count is
    doubled until no coefficient moves by more than ``tol`` relative to its
    scale (the support width for alpha, its square for beta).
    """
    if n < 1:
        raise ValidationError("need at least one recurrence coefficient")
    n_pieces = len(measure.density.pieces())
    if panels is None:
        panels = max(1, math.ceil(2 * n / order / n_pieces))
    lo, hi = measure.support
    scale = np.concatenate(([hi], np.full(n - 1, (hi - lo) ** 2)))
    prev, delta = None, float("inf")
    while True:
        x, w = measure.discretise(panels, order)
        alpha, beta = stieltjes(x, w, n)
        if prev is not None:
            d_alpha = np.abs(alpha - prev[0]) / np.maximum(np.abs(alpha), hi)
            d_beta = np.abs(beta - prev[1]) / np.maximum(np.abs(beta), scale)
            delta = max(d_alpha.max(), d_beta.max())
            if delta < tol:
                return RecurrenceCoefficients(alpha, beta, measure)
        if 2 * panels * order * n_pieces > MAX_QUAD_POINTS:
            raise ConvergenceError(
                f"Stieltjes coefficients not converged; last relative change {delta:.3e}",
                achieved=delta,
            )
        prev = (alpha, beta)
        panels *= 2


def recurrence(measure, n):
    """Analytic recurrence where available, discretised Stieltjes otherwise."""
    if jacobi_descriptor(measure) is not None:
        return recurrence_analytic(measure, n)
    return recurrence_stieltjes(measure, n)


# -- polynomials and rules -----------------------------------------------------

def eval_orthonormal_all(rc, n_max, x):
    """Values P_0..P_{n_max} at ``x``; result has shape (n_max + 1, *x.shape)."""
    if n_max >= len(rc):
        raise ValidationError(f"need {n_max + 1} coefficients, have {len(rc)}")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0 / math.sqrt(rc.beta[0])
    prev = np.zeros_like(x)
    for k in range(n_max):
        sb_next = math.sqrt(rc.beta[k + 1])
        sb = math.sqrt(rc.beta[k]) if k else 0.0
        nxt = ((x - rc.alpha[k]) * out[k] - sb * prev) / sb_next
        prev = out[k]
        out[k + 1] = nxt
    return out


def eval_orthonormal(rc, n, x):
    return eval_orthonormal_all(rc, n, x)[n]


def christoffel_weights(rc, knots):
    """Gauss weights from 1 / sum_k P_k(knot)**2, independent of any eigensolver."""
    L = len(knots)
    vals = eval_orthonormal_all(rc, L - 1, np.asarray(knots))
    return 1.0 / np.sum(vals**2, axis=0)


def gauss_rule(rc, L):
    """L-point Gauss rule by Golub-Welsch; knots returned in descending order."""
    if not 1 <= L <= len(rc):
        raise ValidationError(f"L must be in [1, {len(rc)}], got {L}")
    offdiag = np.sqrt(rc.beta[1:L])
    if L == 1:
        knots = rc.alpha[:1].copy()
        first = np.ones(1)
    else:
        knots, vecs = eigh_tridiagonal(rc.alpha[:L], offdiag)
        first = vecs[0]
    order = np.argsort(knots)[::-1]
    knots = knots[order]
    weights = rc.beta[0] * first[order] ** 2
    if L > 1:
        if rc.measure is not None:
            lo, hi = rc.measure.support
        else:
            lo, hi = knots[-1], knots[0]
        gap = np.min(-np.diff(knots))
        if gap <= 1e-12 * max(hi - lo, np.finfo(float).tiny):
            raise IllConditionedError(
                f"Gauss knots separated by only {gap:.3e}; rule is ill-conditioned"
            )
    return GaussRule(knots, weights, rc.measure)


def chebyshev_knots_closed_form(sd, scheme, L):
    """Closed-form knots/frequencies for semicircle (BC) and Rubin (S2), descending.

    For BC this returns Gauss knots of J(.)/pi; for S2 it returns the mode
    frequencies sqrt(knot) of the J(sqrt .)/pi rule.
    """
    k = np.arange(1, L + 1)
    c = np.cos(k * math.pi / (L + 1))
    a, b = sd.omega_min, sd.omega_max
    if sd.family == "semicircle" and scheme == "BC":
        vals = 0.5 * (a - b) * c + 0.5 * (a + b)
    elif sd.family == "rubin" and scheme == "S2":
        vals = np.sqrt(np.clip(0.5 * (a * a - b * b) * c + 0.5 * (a * a + b * b), 0.0, None))
    else:
        raise UnsupportedFamilyError(
            f"no closed-form knots for family {sd.family!r} under scheme {scheme!r}"
        )
    return vals[::-1]


def buell_bounds(s, L, k, scheme="BC", omega_min=0.0, omega_max=1.0):
    """Bracket for the k-th smallest knot (BC) or frequency (S2, massless).

    The two printed expressions are returned ordered as ``(lower, upper)``.
    BC is valid for -1/2 <= s <= 1/2; massless S2 for -1 < s <= 1.
    """
    if not 1 <= k <= L:
        raise RangeError(f"knot index k must be in [1, {L}], got {k}")
    if scheme == "BC":
        if not -0.5 <= s <= 0.5:
            raise RangeError(f"BC brackets need s in [-1/2, 1/2], got {s}")
        den = L + (s + 1) / 2
        e1 = (1 - math.cos(k / den * math.pi)) * (omega_max - omega_min) / 2 + omega_min
        e2 = (1 - math.cos((k + (s - 1) / 2) / den * math.pi)) * (omega_max - omega_min) / 2 + omega_min
    elif scheme == "S2":
        if not -1 < s <= 1:
            raise RangeError(f"massless S2 brackets need s in (-1, 1], got {s}")
        den = L + (s / 2 + 1) / 2
        e1 = omega_max * math.sqrt((1 - math.cos(k / den * math.pi)) / 2)
        e2 = omega_max * math.sqrt((1 - math.cos((k + (s / 2 - 1) / 2) / den * math.pi)) / 2)
    else:
        raise ValidationError(f"unknown scheme {scheme!r}")
    return min(e1, e2), max(e1, e2)

"""Rigorous error bounds for Gauss-discretised baths.

All bound functions return the bound on the absolute error of a system
expectation value, i.e. the square root of the bound on the squared error.
Powers and factorials are combined in log space so that L in the hundreds
or thousands never overflows.
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from .discretize import SCHEME_Q, scheme_of
from .errors import SaturationError, ValidationError
from .measures import eta_constants
from .orthopoly import eval_orthonormal_all

L_MAX_DEFAULT = 10_000


@dataclass(frozen=True)
class BoundInputs:
    norm_O: float
    norm_A: float
    omega_max: float
    eta: float
    gamma_norm: float
    massless: bool
    t: float
    L: int

    def __post_init__(self):
        vals = (self.norm_O, self.norm_A, self.omega_max, self.eta, self.gamma_norm, self.t)
        if any(math.isnan(v) for v in vals):
            raise ValidationError("bound inputs must not be NaN")
        if not (self.norm_O > 0 and self.norm_A > 0 and self.omega_max > 0 and self.eta > 0):
            raise ValidationError("norm_O, norm_A, omega_max and eta must be positive")
        if self.gamma_norm < 0 or self.t < 0:
            raise ValidationError("gamma_norm and t must be non-negative")
        if int(self.L) != self.L or self.L < 1:
            raise ValidationError(f"L must be an integer >= 1, got {self.L}")


def power_factorial_log(k, x):
    """log(x**k / k!) for x > 0."""
    return k * math.log(x) - math.lgamma(k + 1)


def factorial_order(scheme, L):
    """Order k of the x**k / k! factor: L + 1 for BC, 2L + 1 for S2."""
    return L + 1 if scheme_of(scheme) == "BC" else 2 * L + 1


def _log_square(prefactor, k, inp, tail, extra=0.0):
    x = inp.omega_max * inp.t
    return (math.log(prefactor) + power_factorial_log(k, x)
            + np.logaddexp(x, 0.0) + math.log(math.sqrt(inp.gamma_norm) + tail) + extra)


def bound_theorem1(inp):
    """Error bound for the BC discretisation (weight J(.)/pi)."""
    if inp.t == 0:
        return 0.0
    d0 = 8 * inp.eta * inp.norm_O**2 * inp.norm_A / inp.omega_max
    tail = inp.eta * inp.norm_A * inp.t
    return math.exp(0.5 * _log_square(d0, inp.L + 1, inp, tail))


def bound_theorem2(inp):
    """Error bound for the S2 discretisation (weight J(sqrt .)/pi).

    The massless branch carries an extra exp(omega_max t) and replaces t by
    (exp(omega_max t) - 1)/omega_max in the correlation term.
    """
    if inp.t == 0:
        return 0.0
    d1 = 4 * inp.eta * inp.norm_O**2 * inp.norm_A / inp.omega_max
    x = inp.omega_max * inp.t
    if inp.massless:
        tail = inp.eta * inp.norm_A * math.expm1(x) / inp.omega_max
        return math.exp(0.5 * _log_square(d1, 2 * inp.L + 1, inp, tail, extra=x))
    tail = inp.eta * inp.norm_A * inp.t
    return math.exp(0.5 * _log_square(d1, 2 * inp.L + 1, inp, tail))


def bound(scheme, inp):
    return bound_theorem1(inp) if scheme_of(scheme) == "BC" else bound_theorem2(inp)


def bound_inputs(sd, scheme, t, L, norm_O=1.0, norm_A=1.0, gamma_norm=1.0,
                 massless=None, etas=None):
    """BoundInputs for a spectral density, picking eta_0 or eta_1 by scheme."""
    eta0, eta1 = etas if etas is not None else eta_constants(sd)
    q = SCHEME_Q[scheme_of(scheme)]
    return BoundInputs(
        norm_O=norm_O, norm_A=norm_A, omega_max=sd.omega_max,
        eta=eta0 if q == 0 else eta1, gamma_norm=gamma_norm,
        massless=sd.massless if massless is None else bool(massless),
        t=t, L=L,
    )


def bound_multibath(spec, t, gamma_norms=None):
    """Sum of the per-bath bounds; each bath uses its own constants."""
    if gamma_norms is not None and len(gamma_norms) != len(spec.baths):
        raise ValidationError("need one gamma norm per bath")
    total = 0.0
    for i, b in enumerate(spec.baths):
        g = b.gamma_norm if gamma_norms is None else gamma_norms[i]
        inp = bound_inputs(b.density, b.scheme, t, b.L, spec.norm_O, b.norm_A, g)
        total += bound(b.scheme, inp)
    return total


@dataclass(frozen=True)
class BoundRow:
    t: float
    L: int
    scheme: str
    massless: bool
    bound: float


def bound_curve(sd, schemes, times, Ls, norm_O=1.0, norm_A=1.0, gamma_norm=1.0,
                massless=None, executor=None):
    """Evaluate bounds on the (scheme, L, t) grid in a fixed row order."""
    etas = eta_constants(sd)
    grid = [(scheme_of(s), int(L), float(t)) for s in schemes for L in Ls for t in times]

    def row(item):
        s, L, t = item
        inp = bound_inputs(sd, s, t, L, norm_O, norm_A, gamma_norm, massless, etas)
        return BoundRow(t, L, s, inp.massless, bound(s, inp))

    mapper = executor.map if executor is not None else map
    return list(mapper(row, grid))


def plan_modes(sd, scheme, t_horizon, epsilon, norm_O=1.0, norm_A=1.0, gamma_norm=1.0,
               massless=None, L_max=L_MAX_DEFAULT):
    """Smallest L in [1, L_max] whose bound at ``t_horizon`` is <= epsilon."""
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    if t_horizon < 0:
        raise ValidationError("t_horizon must be non-negative")
    base = bound_inputs(sd, scheme, t_horizon, 1, norm_O, norm_A, gamma_norm, massless)
    return plan_from_inputs(scheme, base, epsilon, L_max)


def plan_from_inputs(scheme, base, epsilon, L_max=L_MAX_DEFAULT):
    value = None
    for L in range(1, L_max + 1):
        value = bound(scheme, replace(base, L=L))
        if value <= epsilon:
            return L
    raise SaturationError(
        f"no L <= {L_max} reaches epsilon={epsilon:g}; bound at L_max is {value:.6g}",
        bound_at_max=value,
    )


# -- two-point correlation matrices ---------------------------------------------

def gamma_norm_number_state(n0):
    """||gamma_0|| for a product of n0-excitation number states: n0 + 1."""
    if int(n0) != n0 or n0 < 0:
        raise ValidationError(f"n0 must be a non-negative integer, got {n0}")
    return float(int(n0) + 1)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    xx: np.ndarray
    xp: np.ndarray
    px: np.ndarray
    pp: np.ndarray

    @property
    def M(self):
        return np.asarray(self.xx).shape[0]

    def assembled(self):
        return np.block([[self.xx, self.xp], [self.px, self.pp]]).astype(complex)

    @classmethod
    def number_state(cls, n0, M):
        eye = np.eye(M)
        return cls((n0 + 0.5) * eye, 0.5j * eye, -0.5j * eye, (n0 + 0.5) * eye)


def gamma_norm_from_blocks(cm, tol=1e-10):
    """Operator norm of the assembled self-adjoint 2M x 2M correlation matrix."""
    g = cm.assembled()
    if g.size == 0:
        return 0.0
    asym = np.max(np.abs(g - g.conj().T))
    if asym > tol:
        raise ValidationError(f"correlation matrix is not self-adjoint (defect {asym:.3e})")
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (g + g.conj().T)))))


def gamma_norm_truncated(build, M):
    """Norm at truncation M and its change when M is doubled.

    ``build(M)`` must return the CorrelationMatrix truncated to M modes.
    """
    at_m = gamma_norm_from_blocks(build(M))
    at_2m = gamma_norm_from_blocks(build(2 * M))
    return at_m, abs(at_2m - at_m)


def gamma_basis_change(rc0, rc1, M):
    """Blocks A, B of the non-unitary map between the two quadrature bases.

    A[n, m] = sqrt(2/omega_max) int mu_0(dx) x P'_n(x**2) P_m(x)
    B[n, m] = sqrt(2 omega_max) int mu_0(dx) P'_n(x**2) P_m(x)

    ``rc0`` must carry its measure, which supplies the integration rule.
    """
    if M == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    measure = rc0.measure
    if measure is None or measure.q != 0:
        raise ValidationError("rc0 must carry its mu_0 measure")
    omega_max = measure.density.omega_max

    def integrand(x):
        p = eval_orthonormal_all(rc0, M - 1, x)
        pp = eval_orthonormal_all(rc1, M - 1, x * x)
        prod = pp[:, None, :] * p[None, :, :]
        return np.concatenate([(prod * x).reshape(M * M, -1), prod.reshape(M * M, -1)])

    vals = measure.integrate(integrand, rtol=1e-13, atol=1e-13)
    A = math.sqrt(2.0 / omega_max) * vals[: M * M].reshape(M, M)
    B = math.sqrt(2.0 * omega_max) * vals[M * M:].reshape(M, M)
    return A, B


def symplectic_defect(A, B, block=None):
    """Spectral norm of C^T Omega C - Omega for C = diag(A, B).

    With ``block`` set, only the leading ``block`` x ``block`` corner of each
    sub-block of the defect is measured; entries near the truncation edge
    carry the truncation error and do not shrink as M grows.
    """
    M = A.shape[0]
    defect = A.T @ B - np.eye(M)
    if block is not None:
        defect = defect[:block, :block]
    # C^T Omega C - Omega = [[0, D], [-D^T, 0]] with D = A^T B - 1
    return float(np.linalg.norm(defect, 2))



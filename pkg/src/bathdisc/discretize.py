"""Discretised baths (star form) and chain coefficients.

Two schemes are supported:

``BC``
    Gauss rule of mu_0 = J(.)/pi. Mode frequencies are the knots, couplings
    the square roots of the weights.
``S2``
    Gauss rule of mu_1 = J(sqrt .)/pi. Mode frequencies are the square roots
    of the knots, couplings h'/sqrt(2 w) with h' the root of the weight.

The chain form stores the recurrence coefficients of the same measures as a
nearest-neighbour chain; :func:`chain_to_star` takes a truncated chain back
to star form by diagonalising its one-particle matrix.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ValidationError
from .measures import Measure, SpectralDensity
from .orthopoly import gauss_rule, recurrence

SCHEMES = ("BC", "S2")
SCHEME_Q = {"BC": 0, "S2": 1}


def scheme_of(value):
    """Normalise a scheme given as 'BC'/'S2' or as the measure index 0/1."""
    if value in SCHEMES:
        return value
    if value in (0, 1) and not isinstance(value, bool):
        return SCHEMES[value]
    raise ValidationError(f"scheme must be one of {SCHEMES} (or q = 0/1), got {value!r}")


@dataclass(frozen=True, eq=False)
class DiscretizedBath:
    scheme: str
    frequencies: np.ndarray
    couplings: np.ndarray
    source: SpectralDensity = None

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        c = np.asarray(self.couplings, dtype=float)
        if f.shape != c.shape or f.ndim != 1 or f.size == 0:
            raise ValidationError("frequencies and couplings must be equal-length, non-empty")
        if np.any(c <= 0):
            raise ValidationError("couplings must be positive")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "couplings", c)

    @property
    def L(self):
        return len(self.frequencies)

    def weights(self):
        """Gauss weights of the underlying rule, recovered from the couplings."""
        if self.scheme == "BC":
            return self.couplings**2
        return 2.0 * self.frequencies * self.couplings**2


@dataclass(frozen=True, eq=False)
class ChainCoefficients:
    q: int
    site_energies: np.ndarray
    hops: np.ndarray
    system_coupling: float
    omega_max: float = field(default=1.0)

    @property
    def N(self):
        return len(self.site_energies)

    def jacobi_matrix(self, L=None):
        L = self.N if L is None else L
        mat = np.diag(np.asarray(self.site_energies[:L], dtype=float))
        idx = np.arange(L - 1)
        mat[idx, idx + 1] = mat[idx + 1, idx] = self.hops[: L - 1]
        return mat


@dataclass(frozen=True)
class BathEntry:
    """One bath of a multi-bath problem."""

    density: SpectralDensity
    scheme: str
    L: int
    norm_A: float = 1.0
    gamma_norm: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", scheme_of(self.scheme))
        if self.L < 1:
            raise ValidationError("each bath needs L >= 1")
        if not self.norm_A > 0 or not self.gamma_norm >= 0:
            raise ValidationError("norm_A must be positive and gamma_norm non-negative")


@dataclass(frozen=True)
class MultiBathSpec:
    baths: tuple
    norm_O: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "baths", tuple(self.baths))
        if not self.baths:
            raise ValidationError("a multi-bath spec needs at least one bath")
        if not self.norm_O > 0:
            raise ValidationError("norm_O must be positive")


def _star_from_rule(scheme, knots, weights, sd):
    if scheme == "BC":
        return DiscretizedBath("BC", knots, np.sqrt(weights), sd)
    freqs = np.sqrt(np.clip(knots, 0.0, None))
    return DiscretizedBath("S2", freqs, np.sqrt(weights) / np.sqrt(2.0 * freqs), sd)


def discretize(sd, scheme, L):
    """Star-form bath of L modes for ``sd`` under the given scheme."""
    scheme = scheme_of(scheme)
    if L < 1:
        raise ValidationError(f"L must be >= 1, got {L}")
    rc = recurrence(Measure(sd, SCHEME_Q[scheme]), L)
    rule = gauss_rule(rc, L)
    return _star_from_rule(scheme, rule.knots, rule.weights, sd)


def chain_coefficients(sd, q, N):
    """First N sites of the chain form for measure mu_q."""
    q = SCHEME_Q[scheme_of(q)]
    if N < 1:
        raise ValidationError(f"N must be >= 1, got {N}")
    rc = recurrence(Measure(sd, q), N + 1)
    beta0 = rc.beta[0]
    coupling = math.sqrt(beta0) if q == 0 else math.sqrt(beta0 / sd.omega_max)
    return ChainCoefficients(q, rc.alpha[:N].copy(), np.sqrt(rc.beta[1:N]),
                             coupling, sd.omega_max)


def chain_to_star(cc, L, source=None):
    """Diagonalise the first L chain sites into a star-form bath.

    Uses a dense symmetric eigensolver on the explicit Jacobi matrix, which
    is independent of the tridiagonal route taken by :func:`discretize`.
    """
    if not 1 <= L <= cc.N:
        raise ValidationError(f"L must be in [1, {cc.N}], got {L}")
    vals, vecs = np.linalg.eigh(cc.jacobi_matrix(L))
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    first = np.abs(vecs[0, order])
    if cc.q == 0:
        return DiscretizedBath("BC", vals, cc.system_coupling * first, source)
    # sqrt(beta_0(1)) recovered from the stored sqrt(beta_0(1)/omega_max)
    weights = (cc.system_coupling * first) ** 2 * cc.omega_max
    return _star_from_rule("S2", vals, weights, source)


def assemble_multibath(spec):
    """Independent discretisation of every bath in a multi-bath spec."""
    return [discretize(b.density, b.scheme, b.L) for b in spec.baths]

"""Spectral densities and the two measures built from them.

A spectral density J(w) lives on a finite interval [omega_min, omega_max].
Two measures are derived from it::

    mu_0(dx) = J(x) dx / pi          on [omega_min, omega_max]
    mu_1(dx) = J(sqrt(x)) dx / pi    on [omega_min**2, omega_max**2]

All integrals against either measure go through a panel rule that is
carried out in frequency space. Panels touching an endpoint where J has an
algebraic singularity or a square-root edge use Gauss-Jacobi nodes with the
endpoint exponent absorbed into the rule; interior panels use Gauss-Legendre.
The second measure is handled by the substitution x = w**2, so
``int mu_1(dx) f(x) = int J(w) f(w**2) 2 w dw / pi``.
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
import math

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import ConvergenceError, ValidationError

FAMILIES = ("power_law", "semicircle", "rubin", "gapped", "tabulated")

_PARAM_KEYS = {
    "power_law": {"s", "alpha"},
    "semicircle": {"C"},
    "rubin": {"C"},
    "gapped": {"base", "omega_i", "omega_f"},
    "tabulated": {"omega", "J"},
}

QUAD_ORDER = 64
QUAD_TOL = 1e-10
MAX_QUAD_POINTS = 2**20


@dataclass(frozen=True)
class Piece:
    """Smooth stretch [a, b] of J, with algebraic exponents at each end."""

    a: float
    b: float
    left_exp: float = 0.0
    right_exp: float = 0.0


@dataclass(frozen=True)
class SpectralDensity:
    """Spectral density J(w) on [omega_min, omega_max], zero outside.

    Use the family constructors (:meth:`power_law`, :meth:`semicircle`,
    :meth:`rubin`, :meth:`gapped`, :meth:`tabulated`, :meth:`flat`) rather
    than building instances by hand; they validate parameters.
    """

    family: str
    params: dict = field(compare=True)
    omega_min: float
    omega_max: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown spectral density family {self.family!r}")
        lo, hi = self.omega_min, self.omega_max
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValidationError("omega_min and omega_max must be finite")
        if not 0.0 <= lo < hi:
            raise ValidationError(
                f"need 0 <= omega_min < omega_max, got [{lo}, {hi}]"
            )
        keys = set(self.params)
        if keys != _PARAM_KEYS[self.family]:
            raise ValidationError(
                f"{self.family} expects params {sorted(_PARAM_KEYS[self.family])}, "
                f"got {sorted(keys)}"
            )
        getattr(self, f"_check_{self.family}")()

    # -- validation ---------------------------------------------------------

    def _check_power_law(self):
        s, alpha = self.params["s"], self.params["alpha"]
        if not s > -1:
            raise ValidationError(f"power-law exponent must satisfy s > -1, got {s}")
        if not alpha > 0:
            raise ValidationError(f"power-law amplitude must be positive, got {alpha}")

    def _check_semicircle(self):
        if not self.params["C"] > 0:
            raise ValidationError("semicircle constant C must be positive")

    _check_rubin = _check_semicircle

    def _check_gapped(self):
        base = self.params["base"]
        if not isinstance(base, SpectralDensity) or base.family == "gapped":
            raise ValidationError("gapped base must be a non-gapped SpectralDensity")
        if (base.omega_min, base.omega_max) != (self.omega_min, self.omega_max):
            raise ValidationError("gapped base must share the support interval")
        wi, wf = self.params["omega_i"], self.params["omega_f"]
        if not self.omega_min < wi < wf < self.omega_max:
            raise ValidationError(
                "gap must satisfy omega_min < omega_i < omega_f < omega_max"
            )

    def _check_tabulated(self):
        w = np.asarray(self.params["omega"], dtype=float)
        j = np.asarray(self.params["J"], dtype=float)
        if w.ndim != 1 or w.shape != j.shape or w.size < 2:
            raise ValidationError("tabulated omega and J must be 1-d, equal length >= 2")
        if not np.all(np.diff(w) > 0):
            raise ValidationError("tabulated omega samples must be strictly increasing")
        if np.any(j < 0) or not np.all(np.isfinite(j)):
            raise ValidationError("tabulated J samples must be finite and >= 0")
        if w[0] != self.omega_min or w[-1] != self.omega_max:
            raise ValidationError("tabulated samples must span exactly [omega_min, omega_max]")
        if not np.any(j[:-1] + j[1:] > 0):
            raise ValidationError("tabulated density integrates to zero")

    # -- constructors -------------------------------------------------------

    @classmethod
    def power_law(cls, s, alpha, omega_min, omega_max):
        """J(w) = 2 pi alpha (omega_max - omega_min) (w - omega_min)**s."""
        return cls("power_law", {"s": float(s), "alpha": float(alpha)},
                   float(omega_min), float(omega_max))

    @classmethod
    def flat(cls, value, omega_min, omega_max):
        """Constant J(w) = value, expressed as an s = 0 power law."""
        alpha = value / (2 * math.pi * (omega_max - omega_min))
        return cls.power_law(0.0, alpha, omega_min, omega_max)

    @classmethod
    def semicircle(cls, C, omega_min, omega_max):
        return cls("semicircle", {"C": float(C)}, float(omega_min), float(omega_max))

    @classmethod
    def rubin(cls, C, omega_min, omega_max):
        return cls("rubin", {"C": float(C)}, float(omega_min), float(omega_max))

    @classmethod
    def gapped(cls, base, omega_i, omega_f):
        return cls("gapped", {"base": base, "omega_i": float(omega_i),
                              "omega_f": float(omega_f)},
                   base.omega_min, base.omega_max)

    @classmethod
    def tabulated(cls, omega, J):
        omega = tuple(float(w) for w in omega)
        J = tuple(float(j) for j in J)
        if len(omega) < 2:
            raise ValidationError("tabulated density needs at least two samples")
        return cls("tabulated", {"omega": omega, "J": J}, omega[0], omega[-1])

    # -- evaluation ---------------------------------------------------------

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        out = np.zeros_like(w)
        inside = (w >= self.omega_min) & (w <= self.omega_max)
        if np.any(inside):
            with np.errstate(divide="ignore", invalid="ignore"):
                out[inside] = self._inside(w[inside])
        return out if out.ndim else float(out)

    def _inside(self, w):
        a, b = self.omega_min, self.omega_max
        p = self.params
        if self.family == "power_law":
            return 2 * math.pi * p["alpha"] * (b - a) * (w - a) ** p["s"]
        if self.family == "semicircle":
            return p["C"] * np.sqrt((b - w) * (w - a))
        if self.family == "rubin":
            return p["C"] * np.sqrt((b - w) * (b + w) * (w - a) * (w + a))
        if self.family == "gapped":
            vals = p["base"]._inside(w)
            return np.where((w >= p["omega_i"]) & (w <= p["omega_f"]), 0.0, vals)
        return np.interp(w, p["omega"], p["J"])

    @property
    def massless(self):
        return self.omega_min < 1e-12 * self.omega_max

    def pieces(self):
        """Smooth pieces of J with endpoint exponents, in frequency space."""
        a, b = self.omega_min, self.omega_max
        p = self.params
        if self.family == "power_law":
            return [Piece(a, b, p["s"], 0.0)]
        if self.family == "semicircle":
            return [Piece(a, b, 0.5, 0.5)]
        if self.family == "rubin":
            # for omega_min = 0 the lower factor sqrt(w**2) = w is smooth
            return [Piece(a, b, 0.5 if a > 0 else 0.0, 0.5)]
        if self.family == "gapped":
            out = []
            for pc in p["base"].pieces():
                for lo, hi in ((a, p["omega_i"]), (p["omega_f"], b)):
                    c, d = max(pc.a, lo), min(pc.b, hi)
                    if d > c:
                        out.append(Piece(c, d,
                                         pc.left_exp if c == pc.a else 0.0,
                                         pc.right_exp if d == pc.b else 0.0))
            return out
        w = p["omega"]
        return [Piece(w[i], w[i + 1]) for i in range(len(w) - 1)]

    # -- serialisation ------------------------------------------------------

    def to_dict(self):
        params = dict(self.params)
        if self.family == "gapped":
            base = params["base"].to_dict()
            params["base"] = {"family": base["family"], "params": base["params"]}
        elif self.family == "tabulated":
            params = {"omega": list(params["omega"]), "J": list(params["J"])}
        return {"family": self.family, "params": params,
                "omega_min": self.omega_min, "omega_max": self.omega_max}

    @classmethod
    def from_dict(cls, data):
        """Parse the JSON object form; unknown keys are rejected."""
        if not isinstance(data, dict):
            raise ValidationError("spectral density must be a JSON object")
        extra = set(data) - {"family", "params", "omega_min", "omega_max"}
        if extra:
            raise ValidationError(f"unknown spectral density keys: {sorted(extra)}")
        try:
            family = data["family"]
            params = dict(data["params"])
            lo = float(data["omega_min"])
            hi = float(data["omega_max"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed spectral density: {exc}") from None
        if family == "gapped":
            base = params.get("base")
            if not isinstance(base, dict):
                raise ValidationError("gapped params.base must be an object")
            params["base"] = cls.from_dict({**base, "omega_min": lo, "omega_max": hi})
            params["omega_i"] = float(params.get("omega_i", float("nan")))
            params["omega_f"] = float(params.get("omega_f", float("nan")))
        elif family == "tabulated":
            if set(params) != {"omega", "J"}:
                raise ValidationError("tabulated params must be exactly {omega, J}")
            params = {"omega": tuple(map(float, params["omega"])),
                      "J": tuple(map(float, params["J"]))}
        else:
            params = {k: float(v) for k, v in params.items()}
        return cls(family, params, lo, hi)


@lru_cache(maxsize=None)
def _reference_rule(order, alpha, beta):
    """Gauss rule on [-1, 1] for the weight (1 - y)**alpha (1 + y)**beta."""
    if alpha == 0.0 and beta == 0.0:
        y, w = roots_legendre(order)
    else:
        y, w = roots_jacobi(order, alpha, beta)
    y.setflags(write=False)
    w.setflags(write=False)
    return y, w


def frequency_rule(sd, panels, order=QUAD_ORDER):
    """Discretise J(w) dw / pi on its support by a composite panel rule.

    Each smooth piece is split into ``panels`` equal panels. Returns nodes
    and weights in frequency space.
    """
    nodes, weights = [], []
    for pc in sd.pieces():
        edges = np.linspace(pc.a, pc.b, panels + 1)
        for i in range(panels):
            c, d = edges[i], edges[i + 1]
            p = pc.left_exp if i == 0 else 0.0
            r = pc.right_exp if i == panels - 1 else 0.0
            y, gw = _reference_rule(order, r, p)
            half = 0.5 * (d - c)
            x = c + (1.0 + y) * half
            with np.errstate(divide="ignore", invalid="ignore"):
                regular = sd._inside(x) / ((x - c) ** p * (d - x) ** r)
            nodes.append(x)
            weights.append(gw * half ** (1.0 + p + r) * regular / math.pi)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class Measure:
    """One of the two measures induced by a spectral density.

    ``q = 0`` is J(x) dx / pi on [omega_min, omega_max]; ``q = 1`` is
    J(sqrt x) dx / pi on [omega_min**2, omega_max**2].
    """

    density: SpectralDensity
    q: int = 0

    def __post_init__(self):
        if self.q not in (0, 1):
            raise ValidationError(f"measure index q must be 0 or 1, got {self.q!r}")

    @property
    def support(self):
        lo, hi = self.density.omega_min, self.density.omega_max
        return (lo, hi) if self.q == 0 else (lo * lo, hi * hi)

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        if self.q == 0:
            return np.asarray(self.density(x)) / math.pi
        root = np.sqrt(np.clip(x, 0.0, None))
        return np.where(x >= 0, np.asarray(self.density(root)), 0.0) / math.pi

    def discretise(self, panels, order=QUAD_ORDER):
        """Nodes and weights of a composite rule for this measure."""
        w, wt = frequency_rule(self.density, panels, order)
        if self.q == 0:
            return w, wt
        return w * w, 2.0 * w * wt

    def integrate(self, f, rtol=QUAD_TOL, atol=QUAD_TOL, panels=1, order=QUAD_ORDER):
        """Integrate ``f`` against the measure, doubling panels to convergence.

        ``f`` maps an array of nodes to an array whose last axis runs over the
        nodes, so several integrands can be handled at once.
        """
        n_pieces = len(self.density.pieces())
        prev = None
        while True:
            x, w = self.discretise(panels, order)
            val = np.asarray(f(x)) @ w
            if prev is not None:
                delta = np.max(np.abs(val - prev) - rtol * np.abs(val))
                if delta <= atol:
                    return val
            if 2 * panels * order * n_pieces > MAX_QUAD_POINTS:
                err = float(np.max(np.abs(val - prev))) if prev is not None else float("inf")
                raise ConvergenceError(
                    f"quadrature did not reach tolerance {rtol:g}; last change {err:.3e}",
                    achieved=err,
                )
            prev = val
            panels *= 2

    @cached_property
    def mass(self):
        return float(self.integrate(np.ones_like))

    def moments(self, m_max):
        """Raw moments int x**m mu(dx) for m = 0..m_max."""
        powers = np.arange(m_max + 1)[:, None]
        return self.integrate(lambda x: x[None, :] ** powers)


def eval_density(sd, omega):
    return sd(omega)


def measure_mass(ms):
    return ms.mass


def eta_constants(sd):
    """Return (eta_0, eta_1) for a spectral density.

    eta_0 = sqrt(2/pi int J), eta_1 = sqrt(int J(sqrt x) dx / (pi omega_max)).
    """
    beta0 = Measure(sd, 0).mass
    beta1 = Measure(sd, 1).mass
    return math.sqrt(2.0 * beta0), math.sqrt(beta1 / sd.omega_max)

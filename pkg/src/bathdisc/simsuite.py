"""Exact small-system simulators for checking discretisations and bounds.

Three models are provided:

* a single-excitation (rotating-wave) model, an (L+1)-dimensional problem;
* a Gaussian model, a system oscillator linearly coupled to the bath and
  propagated through covariance matrices;
* the spin-boson model with a truncated Fock space per bath mode.

The Gaussian model couples through an unbounded operator and is therefore
only used for convergence diagnostics, never for certifying a bound.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from .bounds import bound, bound_inputs, gamma_norm_number_state
from .discretize import discretize, scheme_of
from .errors import DimensionError, NumericalError, ValidationError

DENSE_LIMIT = 4096
DIM_CAP = 2 * 4**6

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
EXCITED = np.array([1.0, 0.0])


def _check_times(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0) or np.any(times < 0):
        raise ValidationError("times must be a sorted 1-d grid of non-negative values")
    return times


# -- single excitation -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SingleExcitationModel:
    bath: object
    system_gap: float
    coupling_scale: float = 1.0

    def hamiltonian(self):
        L = self.bath.L
        h = np.zeros((L + 1, L + 1))
        h[0, 0] = self.system_gap
        h[np.arange(1, L + 1), np.arange(1, L + 1)] = self.bath.frequencies
        h[0, 1:] = h[1:, 0] = self.coupling_scale * self.bath.couplings
        return h


def evolve_single_excitation(model, times, return_states=False):
    """Survival probability of the excited state with an empty bath."""
    times = _check_times(times)
    energies, vecs = np.linalg.eigh(model.hamiltonian())
    phases = np.exp(-1j * np.outer(times, energies))
    states = (phases * vecs[0]) @ vecs.T
    states[times == 0] = np.eye(len(energies))[0]
    norm = np.sum(np.abs(states) ** 2, axis=1)
    if np.max(np.abs(norm - 1.0)) > 1e-12:
        raise NumericalError("single-excitation propagation lost unitarity")
    survival = np.abs(states[:, 0]) ** 2
    return (survival, states) if return_states else survival


# -- Gaussian ----------------------------------------------------------------------

def symplectic_form(n):
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def vacuum_covariance(n_modes):
    return 0.5 * np.eye(2 * n_modes)


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """System oscillator (mode 0) coupled as lam (a + a^dag) sum_n g_n (c_n + c_n^dag).

    Phase-space ordering is (x_0..x_L, p_0..p_L) with x = (a + a^dag)/sqrt 2;
    ``sigma0`` is the symmetrised covariance, equal to 1/2 for the vacuum.
    """

    bath: object
    system_frequency: float
    coupling: float
    sigma0: np.ndarray = None
    mean0: np.ndarray = None

    def __post_init__(self):
        n = self.bath.L + 1
        sigma = vacuum_covariance(n) if self.sigma0 is None else np.asarray(self.sigma0, float)
        mean = np.zeros(2 * n) if self.mean0 is None else np.asarray(self.mean0, float)
        if sigma.shape != (2 * n, 2 * n) or mean.shape != (2 * n,):
            raise ValidationError(f"covariance must be {2 * n}x{2 * n}, mean length {2 * n}")
        if np.max(np.abs(sigma - sigma.T)) > 1e-12:
            raise ValidationError("covariance must be symmetric")
        floor = np.linalg.eigvalsh(sigma + 0.5j * symplectic_form(n))
        if floor.min() < -1e-10:
            raise ValidationError("covariance violates the uncertainty principle")
        object.__setattr__(self, "sigma0", sigma)
        object.__setattr__(self, "mean0", mean)

    def hamiltonian_matrix(self):
        n = self.bath.L + 1
        freqs = np.concatenate(([self.system_frequency], self.bath.frequencies))
        hxx = np.diag(freqs)
        hxx[0, 1:] = hxx[1:, 0] = 2.0 * self.coupling * self.bath.couplings
        h = np.zeros((2 * n, 2 * n))
        h[:n, :n] = hxx
        h[n:, n:] = np.diag(freqs)
        return h


def evolve_gaussian(model, times):
    """Covariances and means at each time: sigma(t) = S sigma0 S^T."""
    times = _check_times(times)
    n = model.bath.L + 1
    omega = symplectic_form(n)
    gen = omega @ model.hamiltonian_matrix()
    sigmas, means = [], []
    for t in times:
        S = expm(gen * t)
        if np.max(np.abs(S @ omega @ S.T - omega)) > 1e-10 * max(1.0, np.max(np.abs(S)) ** 2):
            raise NumericalError("Gaussian propagator is not symplectic to 1e-10")
        sigmas.append(S @ model.sigma0 @ S.T)
        means.append(S @ model.mean0)
    return np.array(sigmas), np.array(means)


def system_occupation(model, sigmas, means):
    n = model.bath.L + 1
    return 0.5 * (sigmas[:, 0, 0] + sigmas[:, n, n] + means[:, 0] ** 2 + means[:, n] ** 2 - 1.0)


# -- spin-boson ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpinBosonModel:
    """H = splitting sigma_z + sigma_x sum_n g_n (c_n + c_n^dag) + sum_n w_n c_n^dag c_n."""

    bath: object
    splitting: float
    fock_cutoff: int = 3
    system_state: np.ndarray = field(default_factory=lambda: EXCITED.copy())
    n0: int = 0
    dim_cap: int = DIM_CAP

    def __post_init__(self):
        if self.fock_cutoff < 1:
            raise ValidationError("Fock cutoff must be >= 1")
        if not 0 <= self.n0 <= self.fock_cutoff:
            raise ValidationError("initial occupation must not exceed the Fock cutoff")
        psi = np.asarray(self.system_state, dtype=complex)
        if psi.shape != (2,) or abs(np.linalg.norm(psi) - 1.0) > 1e-12:
            raise ValidationError("system state must be a normalised 2-vector")
        object.__setattr__(self, "system_state", psi)
        if self.dimension > self.dim_cap:
            raise DimensionError(
                f"spin-boson dimension {self.dimension} exceeds cap {self.dim_cap}"
            )

    @property
    def dimension(self):
        return 2 * (self.fock_cutoff + 1) ** self.bath.L

    def with_cutoff(self, cutoff):
        return SpinBosonModel(self.bath, self.splitting, cutoff, self.system_state,
                              self.n0, self.dim_cap)

    def hamiltonian(self):
        d = self.fock_cutoff + 1
        L = self.bath.L
        lower = sp.diags(np.sqrt(np.arange(1, d)), 1, format="csr")
        number = sp.diags(np.arange(d, dtype=float), format="csr")
        quad = lower + lower.T
        bath_dim = d**L

        def embed(op, k):
            left = sp.identity(d**k, format="csr")
            right = sp.identity(d ** (L - k - 1), format="csr")
            return sp.kron(sp.kron(left, op), right, format="csr")

        h_bath = sp.csr_matrix((bath_dim, bath_dim))
        x_bath = sp.csr_matrix((bath_dim, bath_dim))
        for k in range(L):
            h_bath = h_bath + self.bath.frequencies[k] * embed(number, k)
            x_bath = x_bath + self.bath.couplings[k] * embed(quad, k)
        eye_b = sp.identity(bath_dim, format="csr")
        return (self.splitting * sp.kron(SIGMA_Z, eye_b)
                + sp.kron(SIGMA_X, x_bath) + sp.kron(sp.identity(2), h_bath)).tocsr()

    def initial_state(self):
        d = self.fock_cutoff + 1
        bath = np.zeros(d**self.bath.L)
        bath[self.n0 * sum(d**k for k in range(self.bath.L))] = 1.0
        return np.kron(self.system_state, bath)


def _system_expectation(states, O):
    psi = states.reshape(states.shape[0], 2, -1)
    rho = np.einsum("tia,tja->tij", psi, psi.conj())
    return np.real(np.einsum("ij,tji->t", O, rho))


def evolve_spin_boson(model, O, times):
    """<O (x) 1>(t) by dense diagonalisation, or Krylov propagation for large spaces."""
    times = _check_times(times)
    O = np.asarray(O, dtype=complex)
    h = model.hamiltonian()
    psi0 = model.initial_state().astype(complex)
    if model.dimension < DENSE_LIMIT:
        energies, vecs = np.linalg.eigh(h.toarray())
        coeffs = vecs.conj().T @ psi0
        states = (np.exp(-1j * np.outer(times, energies)) * coeffs) @ vecs.T
        states[times == 0] = psi0
    else:
        states = np.empty((len(times), model.dimension), dtype=complex)
        psi, t_prev = psi0, 0.0
        gen = (-1j * h).tocsc()
        for i, t in enumerate(times):
            if t > t_prev:
                psi = expm_multiply(gen * (t - t_prev), psi)
            states[i] = psi
            t_prev = t
    norms = np.linalg.norm(states, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-10:
        raise NumericalError("spin-boson propagation lost unitarity")
    return _system_expectation(states, O)


def spin_boson_cutoff_delta(model, O, times):
    """|<O>| change when the Fock cutoff is raised by one."""
    base = evolve_spin_boson(model, O, times)
    raised = evolve_spin_boson(model.with_cutoff(model.fock_cutoff + 1), O, times)
    return np.abs(raised - base), base


# -- comparisons ------------------------------------------------------------------------

MODEL_KINDS = ("single_excitation", "gaussian", "spin_boson")


def _observable_curve(bath, times, model, options):
    if model == "single_excitation":
        m = SingleExcitationModel(bath, options.get("system_gap", 0.5),
                                  options.get("coupling_scale", 1.0))
        return evolve_single_excitation(m, times)
    if model == "gaussian":
        n = bath.L + 1
        mean = np.zeros(2 * n)
        mean[0] = math.sqrt(2.0) * options.get("coherent_amplitude", 1.0)
        m = GaussianModel(bath, options.get("system_frequency", 0.5),
                          options.get("coupling", 0.1), mean0=mean)
        return system_occupation(m, *evolve_gaussian(m, times))
    if model == "spin_boson":
        m = SpinBosonModel(bath, options.get("splitting", 0.5),
                           options.get("fock_cutoff", 3),
                           options.get("system_state", EXCITED), options.get("n0", 0))
        return evolve_spin_boson(m, options.get("observable", SIGMA_Z), times)
    raise ValidationError(f"unknown model kind {model!r}; choose from {MODEL_KINDS}")


def empirical_discretisation_error(sd, scheme, L, L_ref, times, model="single_excitation",
                                   **options):
    """|<O>_L(t) - <O>_{L_ref}(t)| with the same initial state in both truncations.

    The observable is the excited-state population (single excitation), the
    system-oscillator occupation (Gaussian) or ``observable`` (spin-boson,
    sigma_z by default).
    """
    if L_ref < L:
        raise ValidationError("L_ref must be at least L")
    times = _check_times(times)
    small = _observable_curve(discretize(sd, scheme, L), times, model, options)
    if L_ref == L:
        return np.zeros_like(small)
    ref = _observable_curve(discretize(sd, scheme, L_ref), times, model, options)
    return np.abs(small - ref)


@dataclass(frozen=True)
class ComparisonRow:
    t: float
    L: int
    L_ref: int
    empirical_error: float
    bound_L: float
    bound_Lref: float
    certified_ceiling: float
    cutoff_delta: float

    @property
    def violated(self):
        return self.empirical_error > self.certified_ceiling + self.cutoff_delta


def bound_vs_empirical(sd, scheme, times, L=2, L_ref=5, splitting=0.5, fock_cutoff=3,
                       observable=SIGMA_Z, system_state=EXCITED, n0=0):
    """Spin-boson check that bound(L) + bound(L_ref) dominates the L vs L_ref error.

    The initial bath state is the n0-excitation number-product state, for
    which ||gamma_0|| = n0 + 1; ||A_S|| = ||sigma_x|| = 1.
    """
    scheme = scheme_of(scheme)
    times = _check_times(times)
    O = np.asarray(observable, dtype=complex)
    norm_O = float(np.linalg.norm(O, 2))
    gamma = gamma_norm_number_state(n0)
    curves, deltas = [], []
    for n_modes in (L, L_ref):
        m = SpinBosonModel(discretize(sd, scheme, n_modes), splitting, fock_cutoff,
                           system_state, n0)
        delta, curve = spin_boson_cutoff_delta(m, O, times)
        curves.append(curve)
        deltas.append(delta)
    empirical = np.abs(curves[0] - curves[1])
    rows = []
    for i, t in enumerate(times):
        b_l = bound(scheme, bound_inputs(sd, scheme, t, L, norm_O, 1.0, gamma))
        b_ref = bound(scheme, bound_inputs(sd, scheme, t, L_ref, norm_O, 1.0, gamma))
        rows.append(ComparisonRow(float(t), L, L_ref, float(empirical[i]), b_l, b_ref,
                                  b_l + b_ref, float(deltas[0][i] + deltas[1][i])))
    return rows

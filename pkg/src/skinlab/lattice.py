"""Tight-binding chain builders and gauge transforms.

The model: a uniform open chain of ``N`` sites with hopping ``kappa``,
exposed to an imaginary gauge field ``h`` that multiplies every hop by
``exp(+h)`` (rightward) or ``exp(-h)`` (leftward).  The asymmetric chain is
similar to the symmetric one via the diagonal gauge matrix
``X = diag(exp(-h n))``, so the two share their (real) spectrum while all
right eigenvectors pile up exponentially at the left edge - the
non-Hermitian skin effect.  A weak coupling ``epsilon`` between the two end
sites closes the chain into a ring and acts as the long-range perturbation
whose spectral and dynamical consequences are studied downstream.

Sites are 1-based in formulas and docstrings (matching the physics
convention) and 0-based in array storage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ValidationError
from .linalg import StateVector, check_square_matrix

__all__ = [
    "LatticeParams",
    "EigenPair",
    "open_chain",
    "asymmetric_chain",
    "gauge_matrix",
    "gauge_similar",
    "edge_coupling",
    "perturbed_ring",
    "conjugated_perturbation",
    "chain_energy",
    "chain_eigenpair",
    "petermann_ratio",
    "log_petermann_ratio",
]


@dataclass(frozen=True)
class LatticeParams:
    """Scalar knobs of the asymmetric-hopping ring model.

    Attributes
    ----------
    n_sites : int
        Number of lattice sites, >= 2.
    kappa : float
        Hopping rate; the energy unit (> 0).
    h : float
        Imaginary gauge field, dimensionless, >= 0.
    epsilon : float
        Edge-coupling (long-range perturbation) strength, in units of
        kappa's energy scale, >= 0.
    hop_range : int
        Hopping range of the unperturbed chain; only nearest-neighbor
        builders exist, so anything but 1 is rejected by them.
    """

    n_sites: int
    kappa: float = 1.0
    h: float = 0.0
    epsilon: float = 0.0
    hop_range: int = 1

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValidationError(f"n_sites must be an integer >= 2, got {self.n_sites}")
        if not (self.kappa > 0):
            raise ValidationError(f"kappa must be > 0, got {self.kappa}")
        if not (self.h >= 0):
            raise ValidationError(f"h must be >= 0, got {self.h}")
        if not (self.epsilon >= 0):
            raise ValidationError(f"epsilon must be >= 0, got {self.epsilon}")
        if int(self.hop_range) != self.hop_range or not (1 <= self.hop_range < self.n_sites):
            raise ValidationError(
                f"hop_range must satisfy 1 <= L < n_sites, got {self.hop_range}"
            )

    @property
    def alpha(self) -> float:
        """Gauge attenuation factor per site, exp(-h)."""
        return float(np.exp(-self.h))


@dataclass
class EigenPair:
    """Closed-form eigenpair of the asymmetric chain.

    ``right`` is the literal skin-effect image u_n(l) exp(-l h) of the
    Hermitian eigenvector (not renormalized); ``left`` carries the
    exp(+l h) weighting, so <left_m|right_n> = delta_mn exactly.
    """

    index: int
    energy: float
    right: StateVector
    left: StateVector


def open_chain(params: LatticeParams) -> np.ndarray:
    """Hermitian nearest-neighbor chain with open ends.

    Tridiagonal with zero diagonal and off-diagonal entries kappa.
    """
    if params.hop_range != 1:
        raise ValidationError("only nearest-neighbor chains are built (hop_range == 1)")
    n = params.n_sites
    m = np.zeros((n, n), dtype=np.complex128)
    idx = np.arange(n - 1)
    m[idx, idx + 1] = params.kappa
    m[idx + 1, idx] = params.kappa
    return m


def gauge_matrix(n_sites: int, h: float) -> np.ndarray:
    """Diagonal gauge transform X with entries exp(-h n), n = 1..N."""
    if n_sites < 2:
        raise ValidationError("gauge matrix needs n_sites >= 2")
    sites = np.arange(1, n_sites + 1, dtype=np.float64)
    return np.diag(np.exp(-h * sites)).astype(np.complex128)


def gauge_similar(m: np.ndarray, h: float) -> np.ndarray:
    """Similarity transform X M X^{-1}, evaluated entry-wise.

    Entry (n, m) picks up exp(h (m - n)).  The entry-wise form avoids the
    catastrophic conditioning of the triple matrix product, whose factors
    reach exp(h N).
    """
    m = check_square_matrix(m)
    n = m.shape[0]
    sites = np.arange(n, dtype=np.float64)
    weights = np.exp(h * (sites[None, :] - sites[:, None]))
    return m * weights


def asymmetric_chain(params: LatticeParams) -> np.ndarray:
    """Open chain with hops kappa*exp(+h) rightward and kappa*exp(-h) leftward."""
    return gauge_similar(open_chain(params), params.h)


def edge_coupling(n_sites: int) -> np.ndarray:
    """Hermitian unit coupling between the first and last site.

    Requires n_sites >= 3: for a 2-site chain the corner entries coincide
    with the nearest-neighbor hop and the ring degenerates.
    """
    if n_sites < 3:
        raise ValidationError("edge coupling needs n_sites >= 3")
    m = np.zeros((n_sites, n_sites), dtype=np.complex128)
    m[0, n_sites - 1] = 1.0
    m[n_sites - 1, 0] = 1.0
    return m


def perturbed_ring(params: LatticeParams) -> np.ndarray:
    """Asymmetric chain plus the epsilon edge coupling closing it into a ring."""
    return asymmetric_chain(params) + params.epsilon * edge_coupling(params.n_sites)


def conjugated_perturbation(p: np.ndarray, h: float) -> np.ndarray:
    """Inverse-gauge conjugation X^{-1} P X, evaluated entry-wise.

    Entry (n, m) picks up exp(h (n - m)); for the edge coupling this blows
    the lower corner up to exp(h (N-1)), the mechanism behind the extreme
    spectral sensitivity of the ring.
    """
    p = check_square_matrix(p, "perturbation")
    n = p.shape[0]
    sites = np.arange(n, dtype=np.float64)
    weights = np.exp(h * (sites[:, None] - sites[None, :]))
    return p * weights


def chain_energy(params: LatticeParams, n: int) -> float:
    """Closed-form band energy 2 kappa cos(pi n / (N+1)), n = 1..N.

    The pi (not 2 pi) argument is the convention under which the sine
    eigenvectors actually solve the chain eigenproblem; see README.
    """
    _check_band_index(params, n)
    return 2.0 * params.kappa * float(np.cos(np.pi * n / (params.n_sites + 1)))


def _check_band_index(params: LatticeParams, n: int) -> None:
    if int(n) != n or not (1 <= n <= params.n_sites):
        raise ValidationError(f"band index must be in 1..{params.n_sites}, got {n}")


def _hermitian_eigenvector(params: LatticeParams, n: int) -> np.ndarray:
    """Unit sine eigenvector u_n(l) = sqrt(2/(N+1)) sin(pi n l / (N+1))."""
    big_n = params.n_sites
    sites = np.arange(1, big_n + 1, dtype=np.float64)
    return np.sqrt(2.0 / (big_n + 1)) * np.sin(np.pi * n * sites / (big_n + 1))


def chain_eigenpair(params: LatticeParams, n: int) -> EigenPair:
    """Closed-form eigenpair of the asymmetric chain for band index n."""
    _check_band_index(params, n)
    u = _hermitian_eigenvector(params, n)
    sites = np.arange(1, params.n_sites + 1, dtype=np.float64)
    right = StateVector(u * np.exp(-params.h * sites))
    left = StateVector(u * np.exp(+params.h * sites))
    return EigenPair(index=n, energy=chain_energy(params, n), right=right, left=left)


def log_petermann_ratio(params: LatticeParams, n: int) -> float:
    """Logarithm of the eigenvector condition ratio for band index n.

    log of (sum_l |u_l|^2 e^{2hl}) * (sum_l |u_l|^2 e^{-2hl}) with unit u;
    the log-sum-exp form survives arbitrarily large h*N.
    """
    _check_band_index(params, n)
    u = _hermitian_eigenvector(params, n)
    sites = np.arange(1, params.n_sites + 1, dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_w = 2.0 * np.log(np.abs(u))
    grow = logsumexp(log_w + 2.0 * params.h * sites)
    decay = logsumexp(log_w - 2.0 * params.h * sites)
    # Cauchy-Schwarz bounds the ratio below by 1; clamp out the roundoff
    return max(0.0, float(grow + decay))


def petermann_ratio(params: LatticeParams, n: int) -> float:
    """Eigenvector condition (Petermann-type) ratio, >= 1.

    Equals 1 in the Hermitian limit h = 0 and grows like exp(2 h (N-1)),
    signalling the approach to the exceptional point of the pure
    one-way hopping limit.  Overflows to inf for h*N beyond ~350; use
    :func:`log_petermann_ratio` there.
    """
    return float(np.exp(log_petermann_ratio(params, n)))

"""Exact and perturbative spectra of the edge-coupled asymmetric chain.

Three routes to the ring spectrum live here:

* first-order perturbation theory in the gauge-rotated frame, valid only
  while the conjugated edge coupling stays small;
* the closed-form first-order shift for the edge coupling specifically;
* the exact route: eigenvalues are ``kappa (y + 1/y)`` where ``y`` runs
  over the roots of a self-inversive boundary polynomial.  The degree
  2(N+1) polynomial always carries the parasitic roots y = +/-1, which are
  deflated away before root finding; the surviving degree-2N palindromic
  factor has its roots closed under inversion, and pairing each root with
  its inverse yields the N energies.

Above a critical coupling strength the roots leave the unit circle in
inverse pairs and the corresponding energies bifurcate from real values
into complex-conjugate pairs through an exceptional point;
:func:`critical_epsilon` gives the threshold and
:func:`trace_bifurcation` locates the bifurcations along a coupling sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, RootPairingError, ValidationError
from .lattice import LatticeParams, chain_energy
from .linalg import Spectrum, deflate_root, eigenvalues, polynomial_roots

__all__ = [
    "Spectrum",
    "RealityReport",
    "PolynomialSystem",
    "EPEvent",
    "BifurcationTrace",
    "REALITY_TOL_POLYNOMIAL",
    "REALITY_TOL_DENSE",
    "chain_spectrum",
    "first_order_energies",
    "perturbed_energy_closed_form",
    "self_inversive_coeffs",
    "exact_ring_spectrum",
    "critical_epsilon",
    "classify_reality",
    "trace_bifurcation",
]

# Reality tolerances, relative to kappa.  The polynomial route converges to
# near-machine roots; the dense solver's noise floor near large h*N is
# considerably higher.
REALITY_TOL_POLYNOMIAL = 1e-9
REALITY_TOL_DENSE = 1e-6

# A sorted-adjacent real pair counts as coalescing when its gap drops below
# this (relative to kappa); exact coalescence is measure-zero on a grid.
EP_GAP_TOL = 1e-3


@dataclass
class RealityReport:
    """Outcome of splitting a spectrum into real values and conjugate pairs."""

    all_real: bool
    n_complex_pairs: int
    pair_indices: list[tuple[int, int]]
    tol: float

    @property
    def kind(self) -> str:
        return "all-real" if self.all_real else "mixed"


@dataclass
class PolynomialSystem:
    """Boundary polynomial bookkeeping for one parameter set.

    ``coeffs_p`` is the full anti-palindromic polynomial of degree 2N+2
    (ascending powers), ``coeffs_q`` the palindromic quotient of degree 2N
    after deflating y = +/-1, ``roots_y`` its 2N roots, and ``rho`` the
    corner attenuation exp(-h (N-1)).
    """

    params: LatticeParams
    coeffs_p: np.ndarray
    rho: float
    coeffs_q: np.ndarray | None = None
    roots_y: np.ndarray | None = None


@dataclass
class EPEvent:
    """One real-pair coalescence bracketed by two sweep points."""

    eps_lo: float
    eps_hi: float
    energy: float
    pair_indices: tuple[int, int]


@dataclass
class BifurcationTrace:
    """Spectra along a coupling sweep plus the detected EP events."""

    epsilon_grid: np.ndarray
    spectra: list[Spectrum]
    events: list[EPEvent]
    warnings: list[str] = field(default_factory=list)


def chain_spectrum(params: LatticeParams) -> Spectrum:
    """Closed-form spectrum of the unperturbed chain (epsilon plays no role)."""
    energies = np.array(
        [chain_energy(params, n) for n in range(1, params.n_sites + 1)], dtype=np.complex128
    )
    order = np.lexsort((energies.imag, energies.real))
    return Spectrum(energies[order], "closed-form")


def first_order_energies(
    h0: np.ndarray, p_prime: np.ndarray, epsilon: float, *, gap_tol: float = 1e-8
) -> Spectrum:
    """First-order perturbed energies E_n + epsilon <u_n|P'|u_n>.

    ``h0`` must be Hermitian with a non-degenerate spectrum (pairwise gaps
    above ``gap_tol``, in the energy units of ``h0``); the eigenvectors are
    computed numerically and normalized.  The formula is exact at first
    order but collapses once the conjugated perturbation's matrix elements
    grow with exp(h (N-1)).

    Raises
    ------
    DegenerateSpectrumError
        If two unperturbed levels sit closer than ``gap_tol``.
    """
    from .errors import DegenerateSpectrumError

    h0 = np.asarray(h0, dtype=np.complex128)
    p_prime = np.asarray(p_prime, dtype=np.complex128)
    if h0.shape != p_prime.shape:
        raise ValidationError("h0 and p_prime must have matching shapes")
    if not np.allclose(h0, h0.conj().T, atol=1e-12 * max(1.0, np.abs(h0).max())):
        raise ValidationError("first-order formula requires a Hermitian unperturbed matrix")
    vals, vecs = np.linalg.eigh(h0)
    gaps = np.diff(np.sort(vals))
    if gaps.size and gaps.min() <= gap_tol:
        raise DegenerateSpectrumError(
            f"unperturbed spectrum has a gap {gaps.min():.3e} <= {gap_tol:.3e}; "
            "non-degenerate perturbation theory does not apply"
        )
    shifts = np.einsum("in,ij,jn->n", vecs.conj(), p_prime, vecs)
    energies = vals.astype(np.complex128) + epsilon * shifts
    order = np.lexsort((energies.imag, energies.real))
    return Spectrum(energies[order], "perturbative")


def perturbed_energy_closed_form(params: LatticeParams, n: int) -> float:
    """Closed-form first-order energy of band level n for the edge coupling.

    Literal evaluation of
    ``E_n + (2 eps / (N+1)) sin^2(n pi/(N+1)) * 2 cosh((N-1) h)``.
    Note the sign convention: the underlying matrix element alternates as
    (-1)^(n+1) over the band, which this closed form does not carry; only
    magnitudes are comparable against :func:`first_order_energies`.
    """
    if int(n) != n or not (1 <= n <= params.n_sites):
        raise ValidationError(f"band index must be in 1..{params.n_sites}, got {n}")
    big_n = params.n_sites
    shift = (
        (2.0 * params.epsilon / (big_n + 1))
        * np.sin(np.pi * n / (big_n + 1)) ** 2
        * 2.0
        * np.cosh((big_n - 1) * params.h)
    )
    return chain_energy(params, n) + float(shift)


def self_inversive_coeffs(params: LatticeParams) -> PolynomialSystem:
    """Boundary polynomial of the edge-coupled ring, ascending coefficients.

    Degree 2N+2 with exactly six nonzero coefficients (four for N = 2,
    where powers collide), anti-palindromic by construction:
    ``a[2N+2-k] == -a[k]``.  Requires epsilon > 0; the unperturbed spectrum
    is served in closed form.

    Raises
    ------
    NumericError
        If cosh((N-1) h) overflows double precision (h*N beyond ~700);
        use the log-domain :func:`critical_epsilon` in that regime.
    """
    if params.epsilon <= 0:
        raise ValidationError("boundary polynomial needs epsilon > 0; use chain_spectrum at 0")
    big_n = params.n_sites
    ratio = params.epsilon / params.kappa
    with np.errstate(over="ignore"):
        cosh_term = np.cosh((big_n - 1) * params.h)
    if not np.isfinite(cosh_term):
        raise NumericError(
            "cosh((N-1) h) overflows double precision; the spectrum is far past the "
            "reality boundary there - use the log-domain critical_epsilon instead"
        )
    coeffs = np.zeros(2 * big_n + 3, dtype=np.complex128)
    coeffs[0] += -1.0
    coeffs[2] += ratio**2
    coeffs[big_n] += 2.0 * ratio * cosh_term
    coeffs[big_n + 2] += -2.0 * ratio * cosh_term
    coeffs[2 * big_n] += -(ratio**2)
    coeffs[2 * big_n + 2] += 1.0
    rho = float(np.exp(-params.h * (big_n - 1)))
    return PolynomialSystem(params=params, coeffs_p=coeffs, rho=rho)


def _pair_roots_to_energies(roots: np.ndarray, kappa: float) -> np.ndarray:
    """Collapse an inversion-closed root multiset to energies kappa (y + 1/y).

    Each root is matched with its nearest inverse partner; the member with
    |y| >= 1 supplies the energy.  Equal-modulus (unimodular) roots pair
    with their conjugates automatically.
    """
    n_roots = roots.size
    if n_roots % 2:
        raise RootPairingError(f"odd number of roots ({n_roots}) cannot pair")
    consumed = np.zeros(n_roots, dtype=bool)
    energies = np.empty(n_roots // 2, dtype=np.complex128)
    order = np.argsort(-np.abs(roots))
    k = 0
    for i in order:
        if consumed[i]:
            continue
        consumed[i] = True
        y = roots[i]
        inv = 1.0 / y
        dist = np.abs(roots - inv)
        dist[consumed] = np.inf
        j = int(np.argmin(dist))
        tol = 1e-6 * max(1.0, float(np.abs(inv)))
        if not np.isfinite(dist[j]) or dist[j] > tol:
            raise RootPairingError(
                f"no inverse partner for root {y:.12g}: nearest candidate is "
                f"{dist[j]:.3e} from 1/y (tolerance {tol:.3e})"
            )
        consumed[j] = True
        energies[k] = kappa * (y + inv)
        k += 1
    return energies


def exact_ring_spectrum(
    params: LatticeParams, *, reality_tol: float | None = None
) -> tuple[Spectrum, PolynomialSystem]:
    """Exact spectrum of the edge-coupled ring via the boundary polynomial.

    Builds the degree-2N+2 polynomial, deflates the parasitic roots at
    y = +1 and y = -1, solves the remaining palindromic factor, pairs the
    2N roots into (y, 1/y) classes and returns the N energies with a
    reality classification attached.
    """
    system = self_inversive_coeffs(params)
    step1 = deflate_root(system.coeffs_p, 1.0)
    coeffs_q = deflate_root(step1, -1.0)
    roots = polynomial_roots(coeffs_q)
    system.coeffs_q = coeffs_q
    system.roots_y = roots
    energies = _pair_roots_to_energies(roots, params.kappa)
    if energies.size != params.n_sites:
        raise RootPairingError(
            f"pairing produced {energies.size} energies for {params.n_sites} sites"
        )
    order = np.lexsort((energies.imag, energies.real))
    spectrum = Spectrum(energies[order], "polynomial")
    tol = (REALITY_TOL_POLYNOMIAL if reality_tol is None else reality_tol) * params.kappa
    spectrum.reality = classify_reality(spectrum, tol)
    return spectrum, system


def critical_epsilon(params: LatticeParams) -> float:
    """Coupling strength where the ring spectrum first turns complex.

    Exact positive root of ``x^2 + 2 x cosh((N-1) h) = 1`` (x = eps/kappa),
    evaluated as ``kappa / (hypot(C, 1) + C)`` which is cancellation-free;
    the familiar ``kappa / (2 cosh((N-1) h))`` is its large-cosh limit.
    Switches to log-domain evaluation once cosh would overflow.
    """
    x = (params.n_sites - 1) * params.h
    if x < 350.0:
        c = np.cosh(x)
        return float(params.kappa / (np.hypot(c, 1.0) + c))
    # 2 cosh x = exp(x) + exp(-x); the hypot correction is ~exp(-2x), far
    # below double precision here
    return float(params.kappa * np.exp(-np.logaddexp(x, -x)))


def classify_reality(spectrum: Spectrum | np.ndarray, tol: float) -> RealityReport:
    """Split energies into real values and complex-conjugate pairs.

    ``tol`` is the absolute imaginary-part threshold (pass a multiple of
    kappa).  Complex energies must pair up with a conjugate partner within
    ``10 * tol``; a leftover unpaired energy signals a solver defect.
    """
    energies = spectrum.energies if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    if tol < 0:
        raise ValidationError("tolerance must be >= 0")
    complex_idx = [i for i, e in enumerate(energies) if abs(e.imag) > tol]
    pairs: list[tuple[int, int]] = []
    remaining = set(complex_idx)
    pair_tol = 10.0 * tol
    for i in sorted(remaining):
        if i not in remaining:
            continue
        remaining.discard(i)
        best_j, best_d = -1, np.inf
        for j in remaining:
            d = abs(energies[i] - np.conj(energies[j]))
            if d < best_d:
                best_j, best_d = j, d
        if best_j < 0 or best_d > pair_tol:
            raise NumericError(
                f"energy {energies[i]:.12g} has no conjugate partner within "
                f"{pair_tol:.3e} (nearest at {best_d:.3e}); solver defect"
            )
        remaining.discard(best_j)
        pairs.append((i, best_j))
    return RealityReport(
        all_real=not pairs, n_complex_pairs=len(pairs), pair_indices=pairs, tol=tol
    )


def trace_bifurcation(
    params_base: LatticeParams,
    epsilon_grid: np.ndarray,
    *,
    reality_tol: float | None = None,
    gap_tol: float | None = None,
) -> BifurcationTrace:
    """Exact spectra along an epsilon sweep with EP-event detection.

    An event is recorded whenever the count of complex-conjugate pairs
    rises between two adjacent grid points: the newborn pair's real part
    is the coalescence energy and the matching sorted-adjacent real pair
    at the lower endpoint identifies which levels merged.  If that pair's
    gap still exceeds ``gap_tol`` the grid is too coarse to pin the
    coalescence and a warning is attached.
    """
    epsilon_grid = np.asarray(epsilon_grid, dtype=np.float64).reshape(-1)
    if epsilon_grid.size < 3:
        raise ValidationError("epsilon grid needs at least 3 points")
    if np.any(np.diff(epsilon_grid) <= 0):
        raise ValidationError("epsilon grid must be sorted strictly ascending")
    gap_abs = (EP_GAP_TOL if gap_tol is None else gap_tol) * params_base.kappa

    spectra: list[Spectrum] = []
    reports: list[RealityReport] = []
    for eps in epsilon_grid:
        params = LatticeParams(
            n_sites=params_base.n_sites,
            kappa=params_base.kappa,
            h=params_base.h,
            epsilon=float(eps),
            hop_range=params_base.hop_range,
        )
        spec, _ = exact_ring_spectrum(params, reality_tol=reality_tol)
        spectra.append(spec)
        reports.append(spec.reality)

    events: list[EPEvent] = []
    warnings: list[str] = []
    for i in range(len(spectra) - 1):
        born = reports[i + 1].n_complex_pairs - reports[i].n_complex_pairs
        if born <= 0:
            continue
        prev_res = [
            float(spectra[i].energies[a].real) for a, _ in reports[i].pair_indices
        ]
        next_res = [
            float(spectra[i + 1].energies[a].real) for a, _ in reports[i + 1].pair_indices
        ]
        # pairs surviving from the previous point consume their nearest
        # successor; whatever is left over was born in this interval
        taken = [False] * len(next_res)
        for r_prev in prev_res:
            cand = [(abs(r - r_prev), k) for k, r in enumerate(next_res) if not taken[k]]
            if cand:
                taken[min(cand)[1]] = True
        newborn = [r for k, r in enumerate(next_res) if not taken[k]]
        if not newborn:
            continue
        # One event per transition interval.  The bipartite ring bifurcates
        # in chiral +/-E twins simultaneously; the twin with the larger real
        # part represents the coalescence (its mirror carries no extra
        # information) and the sidecar keeps one entry per transition.
        re_new = max(newborn)
        event = _locate_coalescing_pair(
            spectra[i], reports[i], re_new, float(epsilon_grid[i]), float(epsilon_grid[i + 1])
        )
        events.append(event)
        if event.pair_indices[0] >= 0:
            gap = abs(
                spectra[i].energies[event.pair_indices[1]].real
                - spectra[i].energies[event.pair_indices[0]].real
            )
            if gap > gap_abs:
                warnings.append(
                    f"EP near eps = {event.eps_hi:.6g}: coalescing gap {gap:.3e} above "
                    f"{gap_abs:.3e}; grid too coarse to bracket the coalescence tightly"
                )
    return BifurcationTrace(epsilon_grid, spectra, events, warnings)


def _locate_coalescing_pair(
    spectrum: Spectrum, report: RealityReport, re_new: float, eps_lo: float, eps_hi: float
) -> EPEvent:
    """Match a newborn complex pair to the closest adjacent real pair below."""
    complex_members = {i for pair in report.pair_indices for i in pair}
    real_idx = [i for i in range(len(spectrum)) if i not in complex_members]
    best = None
    for a, b in zip(real_idx, real_idx[1:]):
        mid = 0.5 * float(spectrum.energies[a].real + spectrum.energies[b].real)
        score = abs(mid - re_new)
        if best is None or score < best[0]:
            best = (score, a, b)
    if best is None:
        # no adjacent real pair left below; fall back to the newborn energy alone
        return EPEvent(eps_lo, eps_hi, re_new, (-1, -1))
    return EPEvent(eps_lo, eps_hi, re_new, (best[1], best[2]))

"""Dense complex linear algebra kernels.

Everything downstream (lattice builders, exact spectra, time evolution) sits
on four primitives defined here:

* a general non-Hermitian eigensolver with deterministic (Re, Im) ordering,
* a matrix-exponential propagator step ``psi -> exp(-i M dt) psi``,
* an Aberth-Ehrlich simultaneous polynomial root finder,
* synthetic-division deflation of a known polynomial root.

States carry an explicit ``log_scale`` so that exponentially amplified
amplitudes (asymmetric hopping makes norms grow like exp(h*v*t)) never
overflow: the stored vector is kept at O(1) norm and the factored-out
magnitude accumulates in the logarithm.

Polynomial coefficients are plain 1-D complex arrays in ascending-power
order, ``p(y) = sum_k a[k] y**k``; square matrices are plain 2-D complex
arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DeflationError, ValidationError

__all__ = [
    "StateVector",
    "Spectrum",
    "eigenvalues",
    "propagator",
    "propagator_apply",
    "polynomial_roots",
    "deflate_root",
]

# Stopping/acceptance tolerances for the iterative kernels.  The residual
# bounds are what tests assert; the Aberth iteration itself runs to
# stagnation, which lands far below them for well-conditioned roots.
ROOT_RESIDUAL_TOL = 1e-10
ABERTH_MAX_ITER = 200
DEFLATION_TOL = 1e-8

# Stored amplitudes are renormalized into [1/2, 2] whenever they drift out.
_RESCALE_LO = 0.5
_RESCALE_HI = 2.0


def check_square_matrix(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite square complex matrix of dim >= 2."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] < 2:
        raise ValidationError(f"{name} must have dim >= 2, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} contains non-finite entries")
    return m


@dataclass
class StateVector:
    """Lattice wavefunction with a factored-out log magnitude.

    The physical amplitudes are ``amplitudes * exp(log_scale)``.  Evolution
    routines keep the stored norm inside [1/2, 2] and let ``log_scale``
    absorb growth or decay, so overlaps and norms of strongly amplified
    states stay representable.
    """

    amplitudes: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if self.amplitudes.size < 1:
            raise ValidationError("state vector must have at least one amplitude")
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValidationError("state vector contains non-finite amplitudes")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def stored_norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def log_norm(self) -> float:
        """log of the physical Euclidean norm (-inf for the zero vector)."""
        n = self.stored_norm()
        return self.log_scale + np.log(n) if n > 0.0 else -np.inf

    def physical(self) -> np.ndarray:
        """Physical amplitudes.  May overflow for extreme log_scale; prefer
        the log forms in quantitative work."""
        return self.amplitudes * np.exp(self.log_scale)

    def rescaled(self) -> "StateVector":
        """Return an equal physical state with stored norm in [1/2, 2]."""
        n = self.stored_norm()
        if n == 0.0 or _RESCALE_LO <= n <= _RESCALE_HI:
            return self
        return StateVector(self.amplitudes / n, self.log_scale + np.log(n))

    def unit(self) -> "StateVector":
        """Return the state normalized to unit physical norm."""
        n = self.stored_norm()
        if n == 0.0:
            raise ValidationError("cannot normalize the zero state")
        return StateVector(self.amplitudes / n, 0.0)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.log_scale)


@dataclass
class Spectrum:
    """Eigenvalues sorted lexicographically by (Re, Im).

    ``source`` records which route produced the energies:
    ``numeric-eigensolver``, ``polynomial``, ``closed-form`` or
    ``perturbative``.  ``right_vectors`` (columns, matching the sorted
    order) are attached when requested; ``reality`` is attached by the
    classification pass in :mod:`skinlab.spectral`.
    """

    energies: np.ndarray
    source: str
    right_vectors: np.ndarray | None = None
    reality: object | None = field(default=None, repr=False)

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=np.complex128).reshape(-1)

    def __len__(self) -> int:
        return self.energies.size


def _sort_lex(values: np.ndarray) -> np.ndarray:
    """Indices sorting complex values by (Re, Im)."""
    return np.lexsort((values.imag, values.real))


def eigenvalues(m: np.ndarray, with_vectors: bool = False) -> Spectrum:
    """Full eigendecomposition of a dense complex matrix.

    Balanced Hessenberg-QR with implicit shifts (LAPACK) under the hood.
    Eigenvalues come back sorted by (Re, Im); when ``with_vectors`` is set,
    the right eigenvectors are returned as unit columns in matching order.

    Raises
    ------
    ConvergenceError
        If the QR iteration fails to converge within LAPACK's sweep cap.
    """
    m = check_square_matrix(m)
    try:
        if with_vectors:
            vals, vecs = np.linalg.eig(m)
        else:
            vals = np.linalg.eigvals(m)
            vecs = None
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue QR iteration did not converge: {exc}") from exc
    order = _sort_lex(vals)
    vals = vals[order]
    if vecs is not None:
        vecs = vecs[:, order]
    return Spectrum(vals, "numeric-eigensolver", right_vectors=vecs)


def propagator(m: np.ndarray, dt: float) -> np.ndarray:
    """Dense one-step propagator ``exp(-i m dt)``.

    Scaling-and-squaring with diagonal Pade; large ``|dt| * ||m||`` is
    handled by the internal squaring, never by failing.  ``dt`` may be
    negative (backward evolution).
    """
    m = check_square_matrix(m)
    if not np.isfinite(dt):
        raise ValidationError("dt must be finite")
    return scipy.linalg.expm(-1j * dt * m)


def propagator_apply(m: np.ndarray, psi: StateVector, dt: float) -> StateVector:
    """Advance ``psi`` by ``exp(-i m dt)`` with log-scale bookkeeping."""
    u = propagator(m, dt)
    if psi.dim != u.shape[0]:
        raise ValidationError(f"state dim {psi.dim} does not match matrix dim {u.shape[0]}")
    return StateVector(u @ psi.amplitudes, psi.log_scale).rescaled()


def _polyval_with_derivative(coeffs: np.ndarray, z: np.ndarray):
    """Horner evaluation of p and p' at the points z (vectorized)."""
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for a in coeffs[::-1]:
        dp = dp * z + p
        p = p * z + a
    return p, dp


def _residual_scale(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Backward-error magnitude scale sum_k |a_k| |z|^k at each point."""
    s = np.zeros(z.shape, dtype=np.float64)
    az = np.abs(z)
    for a in np.abs(coeffs[::-1]):
        s = s * az + a
    return s


def _validated_coeffs(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
    if coeffs.size < 2:
        raise ValidationError("polynomial must have degree >= 1")
    if coeffs[-1] == 0:
        raise ValidationError("leading coefficient must be nonzero")
    if not np.all(np.isfinite(coeffs)):
        raise ValidationError("polynomial coefficients must be finite")
    return coeffs


def polynomial_roots(coeffs: np.ndarray) -> np.ndarray:
    """All complex roots of ``p(y) = sum_k coeffs[k] y**k``.

    Simultaneous Aberth-Ehrlich iteration.  Seeds sit uniformly on the
    circle ``|y| = max(1, |a0/a_deg|**(1/deg))`` with a small irrational
    angular offset; the offset breaks the conjugate symmetry of real
    coefficient sets, which can otherwise stall the iteration.  Returns the
    ``deg`` roots sorted by (Re, Im).

    Raises
    ------
    ConvergenceError
        If after the iteration cap some root has residual
        ``|p(r)| > 1e-10 * sum_k |a_k| |r|^k``.
    """
    coeffs = _validated_coeffs(coeffs)
    deg = coeffs.size - 1
    if deg == 1:
        return np.array([-coeffs[0] / coeffs[1]])

    radius = 1.0
    if coeffs[0] != 0:
        radius = max(1.0, float(np.abs(coeffs[0] / coeffs[-1]) ** (1.0 / deg)))
    # golden-ratio angular offset: irrational, deterministic
    offset = 0.6180339887498949
    angles = (2.0 * np.pi * np.arange(deg) + offset) / deg
    z = radius * np.exp(1j * angles)

    active = np.ones(deg, dtype=bool)
    for _ in range(ABERTH_MAX_ITER):
        p, dp = _polyval_with_derivative(coeffs, z)
        # Newton correction; nudge exact critical points off the stationary set
        dp = np.where(dp == 0, 1e-300, dp)
        w = p / dp
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        s = np.sum(1.0 / diff, axis=1) - 1.0  # subtract the diagonal 1/1 term
        denom = 1.0 - w * s
        denom = np.where(denom == 0, 1.0, denom)
        step = w / denom
        step = np.where(active, step, 0.0)
        z = z - step
        active = np.abs(step) > 1e-14 * np.maximum(np.abs(z), 1.0)
        if not active.any():
            break

    p, _ = _polyval_with_derivative(coeffs, z)
    resid = np.abs(p)
    tol = ROOT_RESIDUAL_TOL * np.maximum(_residual_scale(coeffs, z), np.abs(coeffs).max())
    if np.any(~np.isfinite(resid) | (resid > tol)):
        bad = int(np.argmax(np.where(np.isfinite(resid), resid, np.inf) / tol))
        raise ConvergenceError(
            f"root iteration stalled: worst residual {resid[bad]:.3e} at root "
            f"{z[bad]:.6g} exceeds tolerance {tol[bad]:.3e}",
            residuals=resid,
        )
    return z[_sort_lex(z)]


def deflate_root(coeffs: np.ndarray, root: complex) -> np.ndarray:
    """Divide the polynomial by ``(y - root)`` via synthetic division.

    ``root`` must actually be a root: the residual ``|p(root)|`` has to sit
    below ``1e-8`` times the local magnitude scale, and the quotient is
    verified to reconstruct the input within the same tolerance.
    """
    coeffs = _validated_coeffs(coeffs)
    scale = float(_residual_scale(coeffs, np.asarray([root], dtype=np.complex128))[0])
    p_at_root, _ = _polyval_with_derivative(coeffs, np.asarray([root], dtype=np.complex128))
    if np.abs(p_at_root[0]) > DEFLATION_TOL * scale:
        raise DeflationError(
            f"{root} is not a root within tolerance: |p(root)| = {np.abs(p_at_root[0]):.3e}, "
            f"allowed {DEFLATION_TOL * scale:.3e}"
        )

    n = coeffs.size - 1
    quotient = np.zeros(n, dtype=np.complex128)
    carry = 0.0 + 0.0j
    for k in range(n - 1, -1, -1):
        carry = coeffs[k + 1] + root * carry
        quotient[k] = carry

    # reconstruction check: (y - root) * quotient == p up to the remainder
    recon = np.zeros(n + 1, dtype=np.complex128)
    recon[1:] += quotient
    recon[:-1] -= root * quotient
    err = np.max(np.abs(recon - coeffs))
    # the remainder p(root) lands entirely in the constant coefficient
    if err > max(DEFLATION_TOL * np.abs(coeffs).max(), 2.0 * np.abs(p_at_root[0])):
        raise DeflationError(f"deflation reconstruction error {err:.3e} too large")
    return quotient

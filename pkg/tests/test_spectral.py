"""Perturbative and exact ring spectra, reality classification, EP sweeps."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import multiset_deviation
from skinlab.errors import (
    DegenerateSpectrumError,
    NumericError,
    ValidationError,
)
from skinlab.lattice import (
    LatticeParams,
    conjugated_perturbation,
    edge_coupling,
    open_chain,
    perturbed_ring,
)
from skinlab.linalg import deflate_root, eigenvalues
from skinlab.spectral import (
    chain_spectrum,
    classify_reality,
    critical_epsilon,
    exact_ring_spectrum,
    first_order_energies,
    perturbed_energy_closed_form,
    self_inversive_coeffs,
    trace_bifurcation,
)


def ring_params(n, h, eps):
    return LatticeParams(n_sites=n, h=h, epsilon=eps)


class TestFirstOrder:
    def test_epsilon_zero_exact(self):
        h0 = open_chain(LatticeParams(n_sites=8))
        pp = conjugated_perturbation(edge_coupling(8), 0.0)
        spec = first_order_energies(h0, pp, 0.0)
        assert multiset_deviation(spec.energies, eigenvalues(h0).energies) < 1e-12
        assert spec.source == "perturbative"

    def test_richardson_quadratic_error(self):
        # halving epsilon shrinks the residual against the exact spectrum by 4
        h0 = open_chain(LatticeParams(n_sites=10))
        pp = conjugated_perturbation(edge_coupling(10), 0.0)

        def dev(eps):
            pt = first_order_energies(h0, pp, eps)
            ex = eigenvalues(perturbed_ring(ring_params(10, 0.0, eps)))
            return multiset_deviation(pt.energies, ex.energies)

        ratio = dev(1e-4) / dev(5e-5)
        assert ratio == pytest.approx(4.0, rel=0.2)

    def test_validity_window(self):
        h0 = open_chain(LatticeParams(n_sites=10))
        pp = conjugated_perturbation(edge_coupling(10), 0.0)
        for eps in (1e-3, 3e-4, 1e-4):
            pt = first_order_energies(h0, pp, eps)
            ex = eigenvalues(perturbed_ring(ring_params(10, 0.0, eps)))
            assert multiset_deviation(pt.energies, ex.energies) <= 1e-2 * eps

    def test_degenerate_rejected(self):
        h0 = np.diag([1.0, 1.0, 2.0]).astype(complex)
        with pytest.raises(DegenerateSpectrumError):
            first_order_energies(h0, np.eye(3, dtype=complex), 0.1)

    def test_non_hermitian_rejected(self):
        m = np.array([[0.0, 2.0], [1.0, 0.0]], dtype=complex)
        with pytest.raises(ValidationError):
            first_order_energies(m, np.eye(2, dtype=complex), 0.1)


class TestClosedFormShift:
    def test_epsilon_zero(self):
        p = ring_params(7, 0.2, 0.0)
        for n in (1, 4, 7):
            assert perturbed_energy_closed_form(p, n) == pytest.approx(
                2 * np.cos(np.pi * n / 8), abs=1e-14
            )

    def test_three_site_value(self):
        # sqrt(2) + 0.05 by direct arithmetic
        p = ring_params(3, 0.0, 0.1)
        assert perturbed_energy_closed_form(p, 1) == pytest.approx(np.sqrt(2) + 0.05, abs=1e-14)

    def test_magnitude_matches_matrix_element(self):
        # the matrix-element route carries an alternating sign the closed
        # form omits; magnitudes agree for even and odd band indices alike
        n, h, eps = 6, 0.3, 1e-6
        p = ring_params(n, h, eps)
        h0 = open_chain(p)
        pp = conjugated_perturbation(edge_coupling(n), h)
        pt = first_order_energies(h0, pp, eps)
        base = np.sort(eigenvalues(h0).energies.real)
        shifts_pt = np.sort(np.abs(pt.energies.real - base))
        shifts_cf = np.sort(
            [abs(perturbed_energy_closed_form(p, k) - 2 * np.cos(np.pi * k / (n + 1)))
             for k in range(1, n + 1)]
        )
        assert_allclose(shifts_pt, shifts_cf, rtol=1e-6, atol=1e-18)


class TestBoundaryPolynomial:
    def test_two_site_coefficients(self):
        eps = 0.3
        sys_ = self_inversive_coeffs(ring_params(2, 0.0, eps))
        expected = np.zeros(7, dtype=complex)
        expected[6] = 1.0
        expected[4] = -(eps**2) - 2 * eps
        expected[2] = eps**2 + 2 * eps
        expected[0] = -1.0
        assert_allclose(sys_.coeffs_p, expected, atol=1e-15)

    @pytest.mark.parametrize("n,h,eps", [(5, 0.0, 0.2), (12, 0.3, 0.01), (50, 0.1, 0.0074)])
    def test_plus_minus_one_are_roots(self, n, h, eps):
        c = self_inversive_coeffs(ring_params(n, h, eps)).coeffs_p
        scale = np.abs(c).sum()
        assert abs(np.polyval(c[::-1], 1.0)) < 1e-10 * scale
        assert abs(np.polyval(c[::-1], -1.0)) < 1e-10 * scale

    def test_anti_palindromic(self):
        c = self_inversive_coeffs(ring_params(9, 0.2, 0.05)).coeffs_p
        d = c.size - 1
        for k in range(d + 1):
            assert c[d - k] == pytest.approx(-c[k], abs=1e-15)

    def test_six_nonzero_coefficients(self):
        c = self_inversive_coeffs(ring_params(9, 0.2, 0.05)).coeffs_p
        assert int(np.count_nonzero(c)) == 6

    def test_deflated_quotient_palindromic(self):
        c = self_inversive_coeffs(ring_params(8, 0.15, 0.02)).coeffs_p
        q = deflate_root(deflate_root(c, 1.0), -1.0)
        assert q.size == 17  # degree 2N
        assert_allclose(q, q[::-1], atol=1e-12 * np.abs(q).max())

    def test_deflated_matches_direct_construction(self):
        # independent closed-form quotient: sum y^{2j} - beta y^2 sum y^{2j}
        # - 2c y^N, from the geometric-series split of the full polynomial
        n, h, eps = 7, 0.2, 0.03
        params = ring_params(n, h, eps)
        c = self_inversive_coeffs(params).coeffs_p
        q = deflate_root(deflate_root(c, 1.0), -1.0)
        beta = (eps / params.kappa) ** 2
        ch = (eps / params.kappa) * np.cosh((n - 1) * h)
        direct = np.zeros(2 * n + 1, dtype=complex)
        direct[0 : 2 * n + 1 : 2] = 1.0
        direct[2 : 2 * n - 1 : 2] -= beta
        direct[n] -= 2 * ch
        assert_allclose(q, direct, atol=1e-12 * np.abs(direct).max())

    def test_epsilon_zero_rejected(self):
        with pytest.raises(ValidationError):
            self_inversive_coeffs(ring_params(5, 0.1, 0.0))

    def test_overflow_guard(self):
        with pytest.raises(NumericError):
            self_inversive_coeffs(LatticeParams(n_sites=40, h=20.0, epsilon=1e-3))


class TestExactRingSpectrum:
    def test_two_site_closed_form(self):
        spec, _ = exact_ring_spectrum(ring_params(2, 0.0, 0.1))
        assert_allclose(np.sort(spec.energies.real), [-1.1, 1.1], atol=1e-10)
        assert np.max(np.abs(spec.energies.imag)) < 1e-10

    def test_reality_below_and_above_threshold(self):
        ec = critical_epsilon(LatticeParams(n_sites=50, h=0.1))
        below, _ = exact_ring_spectrum(ring_params(50, 0.1, 0.001))
        assert below.reality.all_real
        above, _ = exact_ring_spectrum(ring_params(50, 0.1, 0.01))
        assert above.reality.n_complex_pairs >= 1
        assert 0.001 < ec < 0.01

    @pytest.mark.parametrize(
        "n,h,eps",
        [
            (4, 0.0, 0.05), (4, 0.3, 0.2), (8, 0.1, 0.01), (8, 0.5, 0.3),
            (12, 0.2, 0.05), (16, 0.25, 0.1), (20, 0.2, 0.02), (20, 0.1, 0.3),
            (24, 0.15, 0.05), (30, 0.2, 0.01), (30, 0.1, 0.1), (10, 0.6, 0.4),
            (15, 0.4, 0.001), (25, 0.2, 0.2), (30, 0.05, 0.05), (6, 0.9, 0.1),
            (18, 0.33, 0.07), (22, 0.27, 0.15), (28, 0.2, 0.003), (9, 0.66, 0.25),
        ],
    )
    def test_cross_solver_agreement(self, n, h, eps):
        params = ring_params(n, h, eps)
        poly_spec, _ = exact_ring_spectrum(params)
        dense_spec = eigenvalues(perturbed_ring(params))
        assert multiset_deviation(poly_spec.energies, dense_spec.energies) < 1e-6

    def test_cross_solver_high_gauge(self):
        # h*N up to 10: dense conditioning degrades, polynomial stays sharp
        params = ring_params(25, 0.4, 0.01)
        poly_spec, _ = exact_ring_spectrum(params)
        dense_spec = eigenvalues(perturbed_ring(params))
        assert multiset_deviation(poly_spec.energies, dense_spec.energies) < 1e-3

    def test_root_inversion_closure(self):
        _, sys_ = exact_ring_spectrum(ring_params(20, 0.2, 0.05))
        roots = sys_.roots_y
        for y in roots:
            assert np.min(np.abs(roots - 1.0 / y)) < 1e-8

    def test_epsilon_to_zero_limit(self):
        params = ring_params(14, 0.2, 1e-12)
        spec, _ = exact_ring_spectrum(params)
        closed = chain_spectrum(params)
        assert multiset_deviation(spec.energies, closed.energies) < 1e-6

    def test_spectrum_metadata(self):
        spec, sys_ = exact_ring_spectrum(ring_params(6, 0.1, 0.02))
        assert spec.source == "polynomial"
        assert len(spec) == 6
        assert sys_.rho == pytest.approx(np.exp(-0.1 * 5))
        assert sys_.coeffs_q.size == 13


class TestCriticalEpsilon:
    def test_reference_value(self):
        ec = critical_epsilon(LatticeParams(n_sites=50, h=0.1))
        assert 0.00735 <= ec <= 0.00755

    def test_hermitian_limit(self):
        assert critical_epsilon(LatticeParams(n_sites=50, h=0.0)) == pytest.approx(
            np.sqrt(2.0) - 1.0, rel=1e-12
        )

    def test_monotone_in_h_and_n(self):
        vals_h = [critical_epsilon(LatticeParams(n_sites=30, h=h)) for h in (0.0, 0.1, 0.2, 0.4)]
        assert all(a > b for a, b in zip(vals_h, vals_h[1:]))
        vals_n = [critical_epsilon(LatticeParams(n_sites=n, h=0.2)) for n in (10, 20, 40, 80)]
        assert all(a > b for a, b in zip(vals_n, vals_n[1:]))

    def test_log_domain_branch(self):
        # (N-1) h = 720: cosh overflows double precision but the log-domain
        # threshold is still a positive (subnormal) number
        with np.errstate(over="ignore"):
            assert not np.isfinite(np.cosh(720.0))
        ec = critical_epsilon(LatticeParams(n_sites=3601, h=0.2))
        assert 0.0 < ec < 1e-300

    @pytest.mark.parametrize("h", [0.05, 0.1, 0.2])
    def test_reality_boundary(self, h):
        base = LatticeParams(n_sites=50, h=h)
        ec = critical_epsilon(base)
        lo, _ = exact_ring_spectrum(ring_params(50, h, 0.95 * ec))
        hi, _ = exact_ring_spectrum(ring_params(50, h, 1.05 * ec))
        assert lo.reality.all_real
        assert not hi.reality.all_real


class TestClassifyReality:
    def test_all_real(self):
        rep = classify_reality(np.array([1.0, 2.0, 3.0], dtype=complex), 1e-9)
        assert rep.all_real and rep.n_complex_pairs == 0 and rep.kind == "all-real"

    def test_single_pair(self):
        rep = classify_reality(np.array([1.0, 2 + 0.5j, 2 - 0.5j]), 1e-9)
        assert not rep.all_real
        assert rep.n_complex_pairs == 1
        assert rep.kind == "mixed"

    def test_unpaired_fails(self):
        with pytest.raises(NumericError):
            classify_reality(np.array([1.0, 2 + 0.5j, 3.0]), 1e-9)

    def test_flip_within_one_grid_step_of_threshold(self):
        base = LatticeParams(n_sites=50, h=0.1)
        ec = critical_epsilon(base)
        grid = np.linspace(0.9 * ec, 1.1 * ec, 21)
        real_flags = [
            exact_ring_spectrum(ring_params(50, 0.1, float(e)))[0].reality.all_real
            for e in grid
        ]
        flips = [i for i in range(len(grid) - 1) if real_flags[i] and not real_flags[i + 1]]
        assert len(flips) == 1
        step = grid[1] - grid[0]
        assert grid[flips[0]] - step <= ec <= grid[flips[0] + 1] + step


class TestBifurcationTrace:
    def test_below_threshold_no_events(self):
        base = LatticeParams(n_sites=50, h=0.1)
        ec = critical_epsilon(base)
        trace = trace_bifurcation(base, np.linspace(0.2 * ec, 0.9 * ec, 5))
        assert trace.events == []

    def test_reference_window(self):
        base = LatticeParams(n_sites=50, h=0.1)
        ec = critical_epsilon(base)
        grid = np.linspace(0.007, 0.0078, 40)
        trace = trace_bifurcation(base, grid)
        step = grid[1] - grid[0]
        bracketing = [
            ev for ev in trace.events if ev.eps_lo - 2 * step <= ec <= ev.eps_hi + 2 * step
        ]
        assert len(bracketing) == 1
        for ev in trace.events:
            assert -2.0 < ev.energy < 2.0
            assert grid[0] <= ev.eps_lo < ev.eps_hi <= grid[-1]
        # events ordered by epsilon
        los = [ev.eps_lo for ev in trace.events]
        assert los == sorted(los)

    def test_grid_validation(self):
        base = LatticeParams(n_sites=10, h=0.1)
        with pytest.raises(ValidationError):
            trace_bifurcation(base, np.array([0.01, 0.02]))
        with pytest.raises(ValidationError):
            trace_bifurcation(base, np.array([0.02, 0.01, 0.03]))

"""Acceptance suite: one test per exit criterion, at the stated tolerance.

Each test prints a single ``[PASS]``/``[FAIL]`` line (run pytest with ``-s``
to see them live).  Stated runtime budgets are asserted alongside the
physics.
"""

import time

import numpy as np
import pytest

from conftest import multiset_deviation, reconstruct_from_roots
from skinlab.lattice import (
    LatticeParams,
    asymmetric_chain,
    conjugated_perturbation,
    edge_coupling,
    open_chain,
    perturbed_ring,
    petermann_ratio,
)
from skinlab.linalg import StateVector, deflate_root, eigenvalues, polynomial_roots, propagator_apply
from skinlab.spectral import (
    critical_epsilon,
    exact_ring_spectrum,
    first_order_energies,
    perturbed_energy_closed_form,
    self_inversive_coeffs,
    trace_bifurcation,
)
from skinlab.dynamics import (
    InitialState,
    TimeGrid,
    fidelity_trace,
    loschmidt_hamiltonian_echo,
    loschmidt_phase_echo,
    measure_front_speed,
    transport_diagnostics,
)


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" :: {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def ring(n, h, eps):
    return LatticeParams(n_sites=n, h=h, epsilon=eps)


def test_critical_coupling_value():
    t0 = time.perf_counter()
    ec = critical_epsilon(LatticeParams(n_sites=50, h=0.1))
    elapsed = time.perf_counter() - t0
    ok = 0.00735 <= ec <= 0.00755 and elapsed < 1e-3
    report("critical coupling eps_c(N=50, h=0.1)", ok,
           f"eps_c = {ec:.6g}, runtime {elapsed * 1e6:.0f} us")


def test_reality_flip_and_ep_bracketing():
    t0 = time.perf_counter()
    base = LatticeParams(n_sites=50, h=0.1)
    ec = critical_epsilon(base)
    lo, _ = exact_ring_spectrum(ring(50, 0.1, 0.95 * ec))
    hi, _ = exact_ring_spectrum(ring(50, 0.1, 1.05 * ec))
    grid = np.linspace(0.007, 0.0078, 40)
    trace = trace_bifurcation(base, grid)
    step = grid[1] - grid[0]
    bracketing = [ev for ev in trace.events
                  if ev.eps_lo - 2 * step <= ec <= ev.eps_hi + 2 * step]
    elapsed = time.perf_counter() - t0
    ok = (lo.reality.all_real and hi.reality.n_complex_pairs >= 1
          and len(bracketing) == 1 and elapsed < 10.0)
    report("reality flip at 0.95/1.05 eps_c + EP bracket", ok,
           f"pairs below/above = {lo.reality.n_complex_pairs}/{hi.reality.n_complex_pairs}, "
           f"bracketing events = {len(bracketing)}, runtime {elapsed:.2f} s")


def test_spectrum_sweep_reality_pattern():
    t0 = time.perf_counter()
    hermitian_real = all(
        exact_ring_spectrum(ring(50, 0.0, eps))[0].reality.all_real
        for eps in (0.001, 0.01, 0.1)
    )
    strong_gauge_mixed = not exact_ring_spectrum(ring(50, 0.2, 0.001))[0].reality.all_real
    ec_02 = critical_epsilon(LatticeParams(n_sites=50, h=0.2))
    elapsed = time.perf_counter() - t0
    ok = hermitian_real and strong_gauge_mixed and ec_02 < 1e-4 and elapsed < 10.0
    report("spectrum sweep reality pattern (h=0 real, h=0.2 mixed)", ok,
           f"eps_c(h=0.2) = {ec_02:.3g}, runtime {elapsed:.2f} s")


def test_cross_solver_oracle():
    t0 = time.perf_counter()
    pairs = [
        (4, 0.0, 0.05), (4, 0.3, 0.2), (8, 0.1, 0.01), (8, 0.5, 0.3),
        (12, 0.2, 0.05), (16, 0.25, 0.1), (20, 0.2, 0.02), (20, 0.1, 0.3),
        (24, 0.15, 0.05), (30, 0.2, 0.01), (30, 0.1, 0.1), (10, 0.6, 0.4),
        (15, 0.4, 0.001), (25, 0.2, 0.2), (30, 0.05, 0.05), (6, 0.9, 0.1),
        (18, 0.33, 0.07), (22, 0.27, 0.15), (28, 0.2, 0.003), (9, 0.66, 0.25),
    ]
    worst = 0.0
    for n, h, eps in pairs:
        params = ring(n, h, eps)
        dev = multiset_deviation(
            exact_ring_spectrum(params)[0].energies,
            eigenvalues(perturbed_ring(params)).energies,
        )
        worst = max(worst, dev)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 30.0
    report("cross-solver oracle (20 parameter pairs, N <= 30, hN <= 6)", ok,
           f"worst deviation = {worst:.2e}, runtime {elapsed:.2f} s")


def test_two_site_closed_form():
    spec, _ = exact_ring_spectrum(ring(2, 0.0, 0.1))
    dev = multiset_deviation(spec.energies, np.array([-1.1, 1.1]))
    report("two-site closed form E = +/-(kappa + eps)", dev < 1e-10,
           f"deviation = {dev:.2e}")


def test_fidelity_deceleration():
    t0 = time.perf_counter()
    grid = TimeGrid(t_max=40.0, dt=0.01, stride=10)
    values = {}
    for h in (0.0, 0.3):
        p = ring(50, h, 0.3)
        tr = fidelity_trace(asymmetric_chain(p), perturbed_ring(p),
                            InitialState.site(49), grid, params=p)
        values[h] = tr
    t = values[0.0].times
    window = (t >= 2.0) & (t <= 20.0)
    ordered = bool(np.all(values[0.3].values[window] >= values[0.0].values[window]))
    f22 = values[0.3].values[np.argmin(np.abs(t - 22.0))]
    f28 = values[0.3].values[np.argmin(np.abs(t - 28.0))]
    drop = float(f22 - f28)
    elapsed = time.perf_counter() - t0
    ok = ordered and drop > 0.2 and elapsed < 60.0
    report("fidelity deceleration + transit-time drop", ok,
           f"ordering holds = {ordered}, F(22)-F(28) = {drop:.3f}, runtime {elapsed:.2f} s")


def test_quench_acceleration():
    grid = TimeGrid(t_max=40.0, dt=0.01, stride=10)
    means = {}
    for h in (0.0, 0.3):
        p = ring(50, h, 0.3)
        tr = fidelity_trace(asymmetric_chain(p), perturbed_ring(p),
                            InitialState.eigenstate(1), grid, params=p)
        means[h] = float(tr.values.mean())
    ok = means[0.3] < means[0.0]
    report("quench acceleration (band-edge eigenstate)", ok,
           f"mean F: h=0 {means[0.0]:.4f}, h=0.3 {means[0.3]:.4f}")


def test_echo_identities():
    t1 = 25.0  # N / (2 kappa) at h = 0
    grid = TimeGrid(t_max=3 * t1, dt=0.02, stride=25)
    worst_allpi = 0.0
    for h in (0.0, 0.3):
        p = LatticeParams(n_sites=50, h=h)
        tr = loschmidt_phase_echo(asymmetric_chain(p), np.full(50, np.pi),
                                  InitialState.site(1), grid, params=p)
        worst_allpi = max(worst_allpi, float(np.max(np.abs(tr.values - 1.0))))

    p = ring(20, 0.0, 0.1)
    g2 = TimeGrid(t_max=15.0, dt=0.01, stride=50)
    f = fidelity_trace(asymmetric_chain(p), perturbed_ring(p),
                       InitialState.site(10), g2, params=p)
    m = loschmidt_hamiltonian_echo(asymmetric_chain(p), perturbed_ring(p),
                                   InitialState.site(10), g2, params=p)
    fm_dev = float(np.max(np.abs(f.values - m.values)))
    ok = worst_allpi < 1e-8 and fm_dev < 1e-10
    report("echo identities (all-pi reversal, Hermitian F = M)", ok,
           f"max |M-1| = {worst_allpi:.2e}, max |F-M| = {fm_dev:.2e}")


def test_echo_squeezing():
    t0 = time.perf_counter()
    t1 = 25.0
    grid = TimeGrid(t_max=3 * t1, dt=0.02, stride=25)
    mean_m = {}
    for start in (1, 50):
        for n0 in (50, 1):
            for h in (0.0, 0.3):
                p = LatticeParams(n_sites=50, h=h)
                from skinlab.dynamics import defect_profile

                tr = loschmidt_phase_echo(asymmetric_chain(p), defect_profile(50, n0),
                                          InitialState.site(start), grid, params=p)
                mean_m[(start, n0, h)] = float(tr.values.mean())
    left_enhanced = all(mean_m[(1, n0, 0.3)] > mean_m[(1, n0, 0.0)] for n0 in (50, 1))
    right_degraded = all(mean_m[(50, n0, 0.3)] < mean_m[(50, n0, 0.0)] for n0 in (50, 1))
    elapsed = time.perf_counter() - t0
    ok = left_enhanced and right_degraded and elapsed < 120.0
    report("echo squeezing (left-edge enhanced, right-edge degraded)", ok,
           f"left {left_enhanced}, right {right_degraded}, runtime {elapsed:.2f} s")


def test_transport():
    p = LatticeParams(n_sites=200, h=0.3)
    grid = TimeGrid(t_max=85.0, dt=0.05, stride=10)
    v = measure_front_speed(asymmetric_chain(p), InitialState.site(199), grid, 1e-3, params=p)
    target = 2.0 * np.cosh(0.3)
    rel = abs(v - target) / target
    _, t1 = transport_diagnostics(LatticeParams(n_sites=50, h=0.3))
    ok = rel < 0.05 and abs(t1 - 23.9) < 0.05
    report("transport (front speed, transit time)", ok,
           f"v = {v:.4f} vs {target:.4f} ({rel:.2%}), t1 = {t1:.3f}")


def test_perturbation_theory_validity():
    # quadratic error scaling in the Hermitian chain
    h0 = open_chain(LatticeParams(n_sites=10))
    pp = conjugated_perturbation(edge_coupling(10), 0.0)

    def dev(eps):
        pt = first_order_energies(h0, pp, eps)
        ex = eigenvalues(perturbed_ring(ring(10, 0.0, eps)))
        return multiset_deviation(pt.energies, ex.energies)

    ratio = dev(1e-4) / dev(5e-5)
    scaling_ok = abs(ratio - 4.0) <= 0.8

    # breakdown at strong gauge: the band-summed first-order magnitude
    # exceeds kappa while the exact spectrum is already complex
    p = ring(50, 0.2, 1e-4)
    base = [2.0 * np.cos(np.pi * n / 51) for n in range(1, 51)]
    total_shift = sum(
        abs(perturbed_energy_closed_form(p, n) - base[n - 1]) for n in range(1, 51)
    )
    exact, _ = exact_ring_spectrum(p)
    breakdown_ok = total_shift > 1.0 and exact.reality.n_complex_pairs >= 1
    ok = scaling_ok and breakdown_ok
    report("perturbation-theory validity and breakdown", ok,
           f"error ratio on eps halving = {ratio:.2f}, band-summed shift = "
           f"{total_shift:.3f} kappa, complex pairs at 1e-4 = {exact.reality.n_complex_pairs}")


def test_numeric_hygiene():
    rng = np.random.default_rng(123)
    # eigensolver conservation laws
    m = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50))
    e = eigenvalues(m).energies
    trace_ok = abs(e.sum() - np.trace(m)) <= 1e-8 * abs(np.trace(m))
    det = np.linalg.det(m)
    det_ok = abs(np.prod(e) - det) <= 1e-8 * abs(det)

    # propagator composition and reversibility
    ham = asymmetric_chain(LatticeParams(n_sites=10, h=0.3))
    psi = StateVector(rng.normal(size=10) + 1j * rng.normal(size=10)).unit()

    def rel_diff(a, b):
        ref = max(a.log_scale, b.log_scale)
        x = a.amplitudes * np.exp(a.log_scale - ref)
        y = b.amplitudes * np.exp(b.log_scale - ref)
        return np.linalg.norm(x - y) / np.linalg.norm(y)

    comp_ok = rel_diff(
        propagator_apply(ham, propagator_apply(ham, psi, 2.0), 3.0),
        propagator_apply(ham, psi, 5.0),
    ) < 1e-8
    rev_ok = rel_diff(propagator_apply(ham, propagator_apply(ham, psi, 5.0), -5.0), psi) < 1e-8

    # root reconstruction at full production degree (2N+2 = 102)
    coeffs = self_inversive_coeffs(ring(50, 0.1, 0.0074)).coeffs_p
    roots = polynomial_roots(coeffs)
    rec = reconstruct_from_roots(roots, coeffs[-1])
    recon_ok = np.max(np.abs(rec - coeffs)) <= 1e-6 * np.max(np.abs(coeffs))
    count_ok = roots.size == coeffs.size - 1

    # deflation exactness on the production polynomial
    q = deflate_root(deflate_root(coeffs, 1.0), -1.0)
    palin_ok = np.allclose(q, q[::-1], atol=1e-12 * np.abs(q).max())

    # analytic condition-ratio value
    peterman_ok = all(
        abs(petermann_ratio(LatticeParams(n_sites=2, h=h), 1) - np.cosh(h) ** 2)
        <= 1e-12 * np.cosh(h) ** 2
        for h in (0.1, 0.7, 2.0)
    )
    ok = all([trace_ok, det_ok, comp_ok, rev_ok, recon_ok, count_ok, palin_ok, peterman_ok])
    report("numeric hygiene (conservation, composition, reconstruction)", ok,
           f"trace {trace_ok}, det {det_ok}, composition {comp_ok}, reversal {rev_ok}, "
           f"reconstruction {recon_ok}, palindromic {palin_ok}, condition-ratio {peterman_ok}")

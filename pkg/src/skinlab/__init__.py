"""skinlab: spectra and dynamical stability of asymmetric-hopping chains.

A numpy/scipy library plus an experiment CLI for tight-binding chains under
an imaginary gauge field: exact and perturbative spectra of the
edge-coupled ring, exceptional-point bifurcation tracking, fidelity decay,
Loschmidt echoes under imperfect time reversal, and ballistic transport
diagnostics.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DeflationError,
    DegenerateSpectrumError,
    NumericError,
    RootPairingError,
    SkinlabError,
    ValidationError,
)
from .linalg import (
    Spectrum,
    StateVector,
    deflate_root,
    eigenvalues,
    polynomial_roots,
    propagator,
    propagator_apply,
)
from .lattice import (
    EigenPair,
    LatticeParams,
    asymmetric_chain,
    chain_eigenpair,
    chain_energy,
    conjugated_perturbation,
    edge_coupling,
    gauge_matrix,
    gauge_similar,
    log_petermann_ratio,
    open_chain,
    perturbed_ring,
    petermann_ratio,
)
from .spectral import (
    BifurcationTrace,
    EPEvent,
    PolynomialSystem,
    RealityReport,
    chain_spectrum,
    classify_reality,
    critical_epsilon,
    exact_ring_spectrum,
    first_order_energies,
    perturbed_energy_closed_form,
    self_inversive_coeffs,
    trace_bifurcation,
)
from .dynamics import (
    InitialState,
    TimeGrid,
    TimeTrace,
    correction_traces,
    defect_profile,
    evolve,
    fidelity_second_order,
    fidelity_trace,
    front_trace,
    loschmidt_hamiltonian_echo,
    loschmidt_phase_echo,
    measure_front_speed,
    phase_slip,
    transport_diagnostics,
)
from .experiments import Dataset, ExperimentConfig, parse_config, preset, run

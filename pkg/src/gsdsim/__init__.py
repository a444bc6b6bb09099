"""Ground-state solver simulator: variational trial state, single-probe phase
estimation, digit-by-digit eigenvalue refinement, probe-tagged distillation,
state metrics, an NMR pulse compiler, and the matching error models."""

from .qcore import (
    DensityMatrix,
    OperatorMatrix,
    StateVector,
    expm_hermitian,
    partial_trace,
    tensor_product,
)
from .model import (
    HeisenbergParams,
    SpectrumTable,
    TrialParams,
    build_hamiltonian,
    build_trial_state,
    critical_field,
    diagonalize,
    optimize_trial,
    optimized_trial_state,
    variational_energy,
)
from .pea import (
    ProbeRecord,
    SpectrumEstimate,
    compute_spectrum,
    evolve_probe,
    peak_uncertainty,
    sample_series,
)
from .ipea import (
    DigitString,
    IterationReport,
    SampleGrid,
    evolve_wrapped,
    next_digit,
    phase_error_bound,
    run_ipea,
    run_ipea_detailed,
    wrap_time,
)
from .distill import (
    DistillationPlan,
    build_final_state,
    eliminate_iteratively,
    measure_plan,
    plan_from_spectrum,
    project_probe,
)
from .tomo import StateReport, fidelity, magnetization, purity_projection, spectral_weights, state_report
from .noise import NoiseConfig, dephase, jitter_J, noisy_pipeline
from . import pulsec

__version__ = "0.1.0"

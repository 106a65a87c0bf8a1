"""QFT-kernel ridge regression for short-term time-series forecasting."""

__version__ = "0.1.0"

from .ckernel import ClassicalKernelParams, classical_gram, poly_kernel, rbf_kernel
from .errors import QkforecastError
from .krr import (
    KernelMatrix,
    KrrModel,
    krr_fit,
    krr_predict,
    load_kernel_matrix,
    save_kernel_matrix,
)
from .metrics import (
    MetricsReport,
    aggregate_by_class,
    compute_report,
    ermax_pct,
    mae,
    nmbe,
    nrmse,
    r2_pearson,
    r2_score,
)
from .mixopt import (
    MixtureResult,
    MixtureWeights,
    OptimizationBudget,
    add_jitter,
    inner_alpha_search,
    mix_kernels,
    optimize_mixture,
    renormalize_weights,
    softmax_weights,
)
from .pipeline import (
    SplitSpec,
    StationSeries,
    WindowSet,
    assert_leak_free,
    ingest_csv,
    lag1_screen,
    make_windows,
    standardize,
)
from .qkernel import (
    ProtectiveLayout,
    WindowVector,
    apply_protective_layer,
    build_protective_layout,
    feature_map,
    omega_matrix,
    qft_gram,
    qft_kernel_value,
    trace_formula_kernel,
)
from .qsim import (
    SingleQubitGate,
    Statevector,
    amplitude_encode,
    apply_gate,
    apply_inverse_qft,
    apply_qft,
    fidelity_with_zero,
)

__all__ = [name for name in dir() if not name.startswith("_")]

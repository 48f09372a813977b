"""MU-MIMO uplink user-selection simulator.

Core pieces: instrumented complex-vector numerics, an i.i.d. Rayleigh
channel generator, zero-forcing receiver metrics, the space-splitting
selector plus classic baselines, closed-form cost models, and a seeded
Monte Carlo harness with a CLI front end.
"""

from .channel import (
    LinkBudget,
    generate_iid_rayleigh,
    load_channel,
    noise_power,
    noise_power_dbm,
    save_channel,
    snr_db,
)
from .complexity import CostQuery, ReconcileReport, model_cost, reconcile_ledger, relative_cost
from .harness import (
    AggregateRow,
    AlgoInstance,
    ExperimentConfig,
    TrialReport,
    emit,
    oracle_check,
    run_monte_carlo,
    run_trial,
    sweep,
)
from .metrics import SingularSetError, sum_spectral_efficiency, zf_post_snr
from .numerics import (
    BasisConstructionError,
    OpLedger,
    OrthonormalBasis,
    correlation,
    gram_schmidt_extend,
    hermitian_inner,
    orthonormality_defect,
    subset_count,
)
from .seeding import derive_seed, splitmix64, stream
from .selectors import (
    Algorithm,
    SelectionConfig,
    SelectionResult,
    basis_stream,
    exhaustive_oracle,
    gzf,
    mcore_plus,
    random_select,
    run_selection,
    single_stream_rate,
    ss_us,
    sus,
)

__version__ = "0.1.0"

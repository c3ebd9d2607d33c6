"""memop: learn the memory integral of an IDE, extrapolate at linear cost.

A solver generates ground-truth trajectories of integro-differential
equations (history integral by composite Simpson, stepping by forward Euler
or third-order Adams-Bashforth).  A from-scratch two-layer LSTM learns the
map from the state sequence G(t) to the memory integral I(t); the trained
network then closes the ODE so long horizons cost O(T) instead of O(T^2).
Direct next-state learning and DMD are included as baselines.
"""

from .backend import active_name
from .baselines import (
    DmdModel,
    dmd_extrapolate,
    dmd_fit,
    dmd_predict,
    dmd_reconstruct,
    extrapolate_direct,
    train_direct,
)
from .errors import (
    BlowUpError,
    CheckpointFormatError,
    ConfigError,
    DmdRankError,
    ExtrapolationBlowUpError,
    MemopError,
    TrainingDivergedError,
)
from .extrapolation import (
    ExtrapolationResult,
    QuadratureOracle,
    RnnIntegralProvider,
    extrapolate,
    runtime_profile,
)
from .lstm import (
    AdamState,
    LstmLayerParams,
    LstmState,
    RnnModel,
    adam_step,
    backward_sequence,
    clip_gradients,
    cosine_lr,
    forward_outputs,
    forward_sequence,
    grad_sequence,
    init_adam,
    init_model,
    lstm_cell_forward,
    mse_loss,
    zero_state,
)
from .numerics import (
    bessel_j1,
    bessel_jn,
    composite_weights,
    elementwise_cos,
    flatten_ri,
    flatten_ri_stack,
    mat_mul,
    matrix_cos,
    simpson_integrate,
    unflatten_ri,
    unflatten_ri_stack,
)
from .problems import (
    DysonParams,
    ProblemSpec,
    ToyParams,
    dyson_analytic,
    dyson_problem,
    kernel_term,
    streaming,
    toy_a_matrix,
    toy_problem,
)
from .solver import (
    TimeGrid,
    Trajectory,
    convergence_order,
    history_integral,
    max_error_vs_analytic,
    solve,
    solve_ab3,
    solve_fe,
)
from .training import (
    DatasetSpec,
    DysonRandomSpec,
    HeldOutTrajectories,
    TimeSplit,
    ToyGridSpec,
    TrainConfig,
    TrainReport,
    build_dataset,
    dataset_points,
    heldout_split,
    sequence_pairs,
    train,
    validate,
)
from .fileio import load_checkpoint, save_checkpoint

__version__ = "0.1.0"

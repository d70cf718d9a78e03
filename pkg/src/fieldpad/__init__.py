"""Training and evaluation harness for field-level identity-document
forgery detection over precomputed embeddings."""

from .dataset import (
    ATTACK,
    BONAFIDE,
    EmbeddingRecord,
    Fold,
    FoldPlan,
    LeakageReport,
    Manifest,
    PairedSample,
    dump_manifest,
    leakage_report,
    load_manifest,
    select_scenario,
    stratified_kfold,
)
from .errors import (
    CascadeError,
    FieldpadError,
    FoldError,
    ManifestError,
    PairingError,
    ScoreFileError,
    ScoreSetError,
    ValidationError,
)
from .fusion import (
    DocumentScore,
    as_score_set,
    cascade_min,
    concat_fuse,
    read_score_csv,
    write_score_csv,
)
from .harness import (
    ExperimentConfig,
    RunArtifacts,
    audit_params,
    run_cascade,
    run_cv,
    run_metrics,
    run_score,
    run_train,
)
from .metrics import (
    ErrorCurve,
    PadReport,
    ScoreSet,
    ThresholdMetrics,
    aggregate_folds,
    apcer_bpcer,
    bpcer_at_apcer,
    build_report,
    eer,
    error_curve,
    roc_auc,
    roc_points,
    threshold_metrics,
)
from .mlp import (
    DROPOUT_DEFAULT,
    HIDDEN_FUSED,
    HIDDEN_SINGLE,
    ForwardTrace,
    MlpHead,
    backward,
    count_trainable,
    forward,
    init_head,
    load_head,
    mac_count,
    param_count,
    save_head,
)
from .optim import (
    AdamState,
    EarlyStopper,
    PlateauScheduler,
    TrainConfig,
    TrainHistory,
    adam_step,
    bce_with_logits,
    init_adam_state,
    pos_weight_for,
    sigmoid,
    train,
)

__version__ = "0.1.0"

"""Model steering for tabular classifiers.

Load a dataset, train a seed-deterministic random forest, profile data
quality, generate data-centric and model-centric explanations, and steer
the model by reconfiguring its training data with full history and
rollback. See README.md for the tour.
"""

from .dataset import (
    ColumnStats,
    DataTable,
    FeatureMeta,
    SplitSpec,
    column_stats,
    load_csv,
    load_meta,
    split_train_test,
)
from .forest import ForestParams, ModelMetrics, TrainedModel, accuracy_delta, predict, train_forest
from .quality import (
    CorrectionOutcome,
    DetectorConfig,
    IssueKind,
    IssueReport,
    QualityReport,
    correct_issue,
    detect_correlated,
    detect_drift,
    detect_duplicates,
    detect_imbalance,
    detect_outliers,
    detect_skewness,
    quality_score,
    run_detectors,
    smote_balance,
)
from .explain import (
    DecisionRule,
    DensityProfile,
    ExplanationBundle,
    ImportanceScore,
    KeyInsight,
    RuleParams,
    build_bundle,
    density_distribution,
    feature_importance,
    key_insights,
    top_decision_rules,
)
from .steering import (
    AttemptRecord,
    AutoConfig,
    ConfigVersion,
    ManualConfig,
    SampleWarning,
    SteeringSession,
    apply_auto,
    apply_manual,
)
from .analytics import (
    InteractionEvent,
    UsageSummary,
    build_usage_summary,
    clicks_per_user,
    effectiveness,
    efficiency,
    hover_time_per_user,
)

__version__ = "0.1.0"

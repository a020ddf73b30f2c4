// Payload types mirroring the service JSON. The dashboard never computes
// explanations: every number on screen comes from one of these fields.

export type Variant = "DCE" | "MCE" | "HYB";

export type TileId = "key_insights" | "density" | "quality" | "rules" | "importances";

export interface BundleHeader {
  test_accuracy: number;
  train_accuracy: number;
  n_train_samples: number;
  n_features: number;
  accuracy_delta: number | null;
}

export interface KeyInsight {
  feature: string;
  metric: string;
  value_percent: number;
  text: string;
}

export interface KeyInsightsPayload {
  top: KeyInsight[];
  rest: KeyInsight[];
}

export interface DensityProfile {
  feature: string;
  bin_edges: number[];
  counts: number[];
  mean: number;
  outlier_bins: boolean[];
}

export interface IssueReport {
  kind: string;
  subscore: number;
  impact: number;
  affected_features: string[];
  affected_row_ids: number[];
  correctable: boolean;
  description: string;
}

export interface QualityReport {
  issues: IssueReport[];
  score: number;
  level: "good" | "moderate" | "poor";
}

export interface ImportanceScore {
  feature: string;
  percent: number;
}

export interface RuleCondition {
  feature: string;
  op: ">" | "<=";
  threshold: number;
}

export interface DecisionRule {
  conditions: RuleCondition[];
  predicted_class: number;
  precision: number;
  recall: number;
  support: number;
}

export interface ExplanationBundle {
  variant: Variant;
  header: BundleHeader;
  help_texts: Partial<Record<TileId, string>>;
  key_insights?: KeyInsightsPayload;
  density?: DensityProfile[];
  quality?: QualityReport;
  importances?: ImportanceScore[];
  rules?: DecisionRule[];
  notes?: string[];
}

export interface SampleWarning {
  before_rows: number;
  after_rows: number;
  reduction_fraction: number;
}

export interface ManualConfigBody {
  included_features: string[];
  ranges: Record<string, [number, number]>;
}

export interface AutoConfigBody {
  selected_issues: string[];
  seed: number;
}

export interface ConfigPreview {
  n_rows: number;
  n_predictors: number;
}

export interface CorrectionOutcome {
  kind: string;
  before: IssueReport;
  after: IssueReport;
  rows_removed: number;
  rows_added: number;
  features_removed: string[];
}

export interface ModelMetrics {
  train_accuracy: number;
  test_accuracy: number;
  n_train_samples: number;
  n_features: number;
}

export interface VersionSummary {
  version_id: number;
  parent_id: number | null;
  config: { kind: string } & Record<string, unknown>;
  table_digest: string;
  metrics: ModelMetrics;
  quality_score: number;
  quality_level: string;
  created_at: string;
  saved: boolean;
}

export interface SessionResponse {
  session_id: string;
  variant: Variant;
  version_id: number;
  bundle: ExplanationBundle;
}

export interface DashboardResponse {
  version_id: number;
  bundle: ExplanationBundle;
}

export interface ManualConfigResponse {
  version_id: number;
  preview: ConfigPreview;
  warning: SampleWarning | null;
}

export interface AutoConfigResponse {
  version_id: number;
  preview: ConfigPreview;
  outcomes: CorrectionOutcome[];
}

export interface RetrainResponse {
  version_id: number;
  version: VersionSummary;
  bundle: ExplanationBundle;
}

export interface VersionResponse {
  version_id: number;
  version: VersionSummary;
}

export interface HistoryResponse {
  version_id: number;
  history: VersionSummary[];
}

export interface EventBody {
  kind: "click" | "hover";
  target: string;
  duration_s?: number;
  timestamp?: number;
  attempt_id?: number;
}

export interface ApiError {
  code: string;
  message: string;
  detail: Record<string, unknown>;
}

// Slider bounds per feature, derived by the app from whatever the bundle
// carries (density profiles when present; bare names otherwise).
export interface FeatureSpec {
  name: string;
  min?: number;
  max?: number;
}

import type {
  BundleHeader,
  DecisionRule,
  DensityProfile,
  ExplanationBundle,
  ImportanceScore,
  KeyInsightsPayload,
  QualityReport,
  TileId,
} from "./types.js";

const TILE_TITLES: Record<TileId, string> = {
  key_insights: "Key Insights",
  density: "Data Density Distribution",
  quality: "Data Quality",
  rules: "Top Decision Rules",
  importances: "Important Risk Factors",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function formatPercent(fraction: number): string {
  return `${(100 * fraction).toFixed(1)}%`;
}

export function formatDelta(delta: number | null): string {
  if (delta === null) {
    return "—";
  }
  const sign = delta > 0 ? "+" : "";
  return `${sign}${delta.toFixed(1)}%`;
}

export function renderHeader(header: BundleHeader): HTMLElement {
  const bar = el("header", "dashboard-header");
  const entries: Array<[string, string, string]> = [
    ["accuracy", "Prediction accuracy", formatPercent(header.test_accuracy)],
    ["delta", "Change from previous version", formatDelta(header.accuracy_delta)],
    ["samples", "Training samples", String(header.n_train_samples)],
    ["features", "Predictor variables", String(header.n_features)],
  ];
  for (const [id, label, value] of entries) {
    const item = el("div", "header-metric");
    item.dataset.metric = id;
    item.appendChild(el("span", "metric-label", label));
    item.appendChild(el("span", "metric-value", value));
    bar.appendChild(item);
  }
  return bar;
}

function tileShell(tile: TileId, helpText: string | undefined): HTMLElement {
  const section = el("section", "tile");
  section.dataset.tile = tile;
  const head = el("div", "tile-head");
  head.appendChild(el("h2", "tile-title", TILE_TITLES[tile]));
  const help = el("span", "help-icon", "?");
  help.title = helpText ?? "";
  head.appendChild(help);
  section.appendChild(head);
  return section;
}

/** Summary-first layering: tiles show a summary; clicking the expander
 * opens the detail pane. */
function detailPane(section: HTMLElement, build: (pane: HTMLElement) => void): void {
  const toggle = el("button", "detail-toggle", "Details");
  const pane = el("div", "detail-pane");
  pane.hidden = true;
  build(pane);
  toggle.addEventListener("click", () => {
    pane.hidden = !pane.hidden;
  });
  section.appendChild(toggle);
  section.appendChild(pane);
}

export function renderKeyInsights(payload: KeyInsightsPayload, helpText?: string): HTMLElement {
  const section = tileShell("key_insights", helpText);
  const list = el("ul", "insight-list");
  for (const insight of payload.top) {
    const item = el("li", "insight", insight.text);
    item.dataset.feature = insight.feature;
    item.dataset.metric = insight.metric;
    list.appendChild(item);
  }
  section.appendChild(list);
  detailPane(section, (pane) => {
    const rest = el("ul", "insight-list insight-rest");
    for (const insight of payload.rest) {
      rest.appendChild(el("li", "insight", insight.text));
    }
    pane.appendChild(
      payload.rest.length > 0 ? rest : el("p", "empty-note", "No further insights."),
    );
  });
  return section;
}

export function renderDensity(profiles: DensityProfile[], helpText?: string): HTMLElement {
  const section = tileShell("density", helpText);
  const grid = el("div", "density-grid");
  for (const profile of profiles) {
    const card = el("figure", "density-card");
    card.dataset.feature = profile.feature;
    card.appendChild(el("figcaption", "density-feature", profile.feature));
    const chart = el("div", "density-chart");
    const maxCount = Math.max(1, ...profile.counts);
    profile.counts.forEach((count, i) => {
      const bar = el("div", "density-bar");
      if (profile.outlier_bins[i]) {
        bar.classList.add("outlier");
      }
      bar.style.height = `${Math.round((100 * count) / maxCount)}%`;
      const lo = profile.bin_edges[i];
      const hi = profile.bin_edges[i + 1];
      bar.title = `${count} records in [${lo.toFixed(2)}, ${hi.toFixed(2)})`;
      chart.appendChild(bar);
    });
    card.appendChild(chart);
    card.appendChild(el("div", "density-mean", `avg ${profile.mean.toFixed(2)}`));
    grid.appendChild(card);
  }
  section.appendChild(grid);
  return section;
}

export function renderQuality(report: QualityReport, helpText?: string): HTMLElement {
  const section = tileShell("quality", helpText);
  const badge = el("div", `quality-badge level-${report.level}`);
  badge.appendChild(el("span", "quality-score", report.score.toFixed(1)));
  badge.appendChild(el("span", "quality-level", report.level));
  section.appendChild(badge);
  const list = el("ul", "issue-list");
  for (const issue of report.issues) {
    const item = el("li", "issue-row");
    item.dataset.issue = issue.kind;
    item.appendChild(el("span", "issue-name", issue.kind.replace(/_/g, " ")));
    const track = el("div", "issue-track");
    const fill = el("div", "issue-fill");
    fill.style.width = `${issue.subscore.toFixed(1)}%`;
    track.appendChild(fill);
    item.appendChild(track);
    item.appendChild(el("span", "issue-subscore", issue.subscore.toFixed(1)));
    list.appendChild(item);
  }
  section.appendChild(list);
  detailPane(section, (pane) => {
    for (const issue of report.issues) {
      pane.appendChild(el("p", "issue-description", issue.description));
    }
  });
  return section;
}

function describeRule(rule: DecisionRule): string {
  const parts = rule.conditions.map(
    (c) => `${c.feature} ${c.op} ${c.threshold.toFixed(2)}`,
  );
  return parts.join(" AND ");
}

export function renderRules(rules: DecisionRule[], helpText?: string): HTMLElement {
  const section = tileShell("rules", helpText);
  if (rules.length === 0) {
    section.appendChild(el("p", "empty-note", "No rules met the quality thresholds."));
    return section;
  }
  const list = el("ul", "rule-list");
  for (const rule of rules) {
    const item = el("li", "rule");
    item.dataset.class = String(rule.predicted_class);
    item.appendChild(el("code", "rule-conditions", describeRule(rule)));
    item.appendChild(el("span", "rule-class", `→ class ${rule.predicted_class}`));
    item.appendChild(
      el(
        "span",
        "rule-stats",
        `precision ${rule.precision.toFixed(2)}, recall ${rule.recall.toFixed(2)}, n=${rule.support}`,
      ),
    );
    list.appendChild(item);
  }
  section.appendChild(list);
  return section;
}

export function renderImportances(
  scores: ImportanceScore[],
  helpText?: string,
  notes: string[] = [],
): HTMLElement {
  const section = tileShell("importances", helpText);
  const uninformative = notes.find((n) => n.includes("uninformative"));
  if (uninformative) {
    section.appendChild(el("p", "empty-note", uninformative));
  }
  const list = el("ul", "importance-list");
  for (const score of scores) {
    const item = el("li", "importance-row");
    item.dataset.feature = score.feature;
    item.appendChild(el("span", "importance-feature", score.feature));
    const track = el("div", "importance-track");
    const fill = el("div", "importance-fill");
    fill.style.width = `${score.percent.toFixed(1)}%`;
    track.appendChild(fill);
    item.appendChild(track);
    item.appendChild(el("span", "importance-percent", `${score.percent.toFixed(1)}%`));
    list.appendChild(item);
  }
  section.appendChild(list);
  return section;
}

/**
 * Render the dashboard for one bundle. Which tiles appear is decided
 * entirely by which payloads the bundle carries, so the variant invariant
 * enforced server-side carries through to the DOM.
 */
export function renderDashboard(bundle: ExplanationBundle): HTMLElement {
  const root = el("div", "dashboard");
  root.dataset.variant = bundle.variant;
  root.appendChild(renderHeader(bundle.header));
  const grid = el("main", "tile-grid");
  if (bundle.key_insights) {
    grid.appendChild(renderKeyInsights(bundle.key_insights, bundle.help_texts.key_insights));
  }
  if (bundle.density) {
    grid.appendChild(renderDensity(bundle.density, bundle.help_texts.density));
  }
  if (bundle.quality) {
    grid.appendChild(renderQuality(bundle.quality, bundle.help_texts.quality));
  }
  if (bundle.rules) {
    grid.appendChild(renderRules(bundle.rules, bundle.help_texts.rules));
  }
  if (bundle.importances) {
    grid.appendChild(
      renderImportances(bundle.importances, bundle.help_texts.importances, bundle.notes ?? []),
    );
  }
  root.appendChild(grid);
  return root;
}

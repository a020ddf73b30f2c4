import { RangeSlider } from "./slider.js";
import type {
  CorrectionOutcome,
  FeatureSpec,
  ManualConfigBody,
  QualityReport,
  SampleWarning,
} from "./types.js";
import type { TelemetryRecorder } from "./telemetry.js";

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

/**
 * Manual configuration screen: an include/exclude toggle plus a range
 * control per predictor. Excluded features grey out their slider and are
 * omitted from the posted configuration; ranges are only posted for
 * features the user actually narrowed.
 */
export class ManualConfigScreen {
  readonly root: HTMLElement;
  private readonly toggles = new Map<string, HTMLInputElement>();
  private readonly sliders = new Map<string, RangeSlider>();
  private readonly numberInputs = new Map<string, [HTMLInputElement, HTMLInputElement]>();
  private readonly warningBanner: HTMLElement;
  private readonly previewNote: HTMLElement;

  constructor(
    private readonly schema: FeatureSpec[],
    private readonly telemetry?: TelemetryRecorder,
  ) {
    this.root = el("section", "manual-config");
    this.root.dataset.screen = "manual";
    this.root.appendChild(el("h2", "screen-title", "Manual configuration"));

    const list = el("div", "feature-controls");
    for (const spec of schema) {
      list.appendChild(this.buildFeatureRow(spec));
    }
    this.root.appendChild(list);

    this.warningBanner = el("div", "warning-banner");
    this.warningBanner.hidden = true;
    this.root.appendChild(this.warningBanner);
    this.previewNote = el("p", "preview-note");
    this.root.appendChild(this.previewNote);
  }

  private buildFeatureRow(spec: FeatureSpec): HTMLElement {
    const row = el("div", "feature-row");
    row.dataset.feature = spec.name;

    const toggle = document.createElement("input");
    toggle.type = "checkbox";
    toggle.checked = true;
    toggle.className = "feature-toggle";
    const label = el("label", "feature-name");
    label.appendChild(toggle);
    label.appendChild(document.createTextNode(spec.name));
    row.appendChild(label);
    this.toggles.set(spec.name, toggle);
    this.telemetry?.attach(toggle, `manual.include.${spec.name}`);

    if (spec.min !== undefined && spec.max !== undefined && spec.min < spec.max) {
      const slider = new RangeSlider(spec.name, spec.min, spec.max);
      this.sliders.set(spec.name, slider);
      row.appendChild(slider.root);
      this.telemetry?.attach(slider.root, `manual.slider.${spec.name}`);
      toggle.addEventListener("change", () => slider.setEnabled(toggle.checked));
    } else {
      // no distribution payload to derive bounds from: fall back to a
      // free numeric pair
      const lo = document.createElement("input");
      lo.type = "number";
      lo.placeholder = "min";
      const hi = document.createElement("input");
      hi.type = "number";
      hi.placeholder = "max";
      const wrap = el("div", "range-free");
      wrap.appendChild(lo);
      wrap.appendChild(hi);
      row.appendChild(wrap);
      this.numberInputs.set(spec.name, [lo, hi]);
      this.telemetry?.attach(wrap, `manual.slider.${spec.name}`);
      toggle.addEventListener("change", () => {
        lo.disabled = hi.disabled = !toggle.checked;
        wrap.classList.toggle("disabled", !toggle.checked);
      });
    }
    return row;
  }

  slider(feature: string): RangeSlider | undefined {
    return this.sliders.get(feature);
  }

  toggle(feature: string): HTMLInputElement {
    const input = this.toggles.get(feature);
    if (!input) {
      throw new Error(`no toggle for feature ${feature}`);
    }
    return input;
  }

  /** The draft configuration as the service expects it. */
  currentConfig(): ManualConfigBody {
    const included: string[] = [];
    const ranges: Record<string, [number, number]> = {};
    for (const spec of this.schema) {
      if (!this.toggles.get(spec.name)?.checked) {
        continue;
      }
      included.push(spec.name);
      const slider = this.sliders.get(spec.name);
      if (slider) {
        const { low, high } = slider.value;
        if (low > slider.min || high < slider.max) {
          ranges[spec.name] = [low, high];
        }
        continue;
      }
      const pair = this.numberInputs.get(spec.name);
      if (pair && pair[0].value !== "" && pair[1].value !== "") {
        const low = Number(pair[0].value);
        const high = Number(pair[1].value);
        ranges[spec.name] = [Math.min(low, high), Math.max(low, high)];
      }
    }
    return { included_features: included, ranges };
  }

  showWarning(warning: SampleWarning | null): void {
    if (!warning) {
      this.warningBanner.hidden = true;
      this.warningBanner.textContent = "";
      return;
    }
    const pct = (100 * warning.reduction_fraction).toFixed(0);
    this.warningBanner.textContent =
      `Warning: this configuration removes ${pct}% of the training samples ` +
      `(${warning.before_rows} → ${warning.after_rows}). Models trained on ` +
      "very little data may become unreliable.";
    this.warningBanner.hidden = false;
  }

  showPreview(nRows: number, nPredictors: number): void {
    this.previewNote.textContent = `Preview: ${nRows} rows, ${nPredictors} predictors.`;
  }
}

const ISSUE_TITLES: Record<string, string> = {
  outliers: "Outliers",
  redundant_rows: "Redundant data",
  correlated_features: "Correlated features",
  class_imbalance: "Class imbalance",
  data_drift: "Data drift",
  skewness: "Data skewness",
};

/**
 * Automated configuration screen: one card per data issue with its
 * quantified impact, description and a selection checkbox. Advisory-only
 * issues (data drift) get no checkbox. Without a quality payload (MCE
 * sessions) the cards list the issue kinds without impact numbers.
 */
export class AutoConfigScreen {
  readonly root: HTMLElement;
  private readonly checkboxes = new Map<string, HTMLInputElement>();
  private readonly outcomePanes = new Map<string, HTMLElement>();
  readonly submitButton: HTMLButtonElement;

  constructor(quality: QualityReport | null, telemetry?: TelemetryRecorder) {
    this.root = el("section", "auto-config");
    this.root.dataset.screen = "auto";
    this.root.appendChild(el("h2", "screen-title", "Automated configuration"));

    const issues = quality
      ? quality.issues
      : Object.keys(ISSUE_TITLES).map((kind) => ({
          kind,
          subscore: NaN,
          impact: NaN,
          affected_features: [],
          affected_row_ids: [],
          correctable: kind !== "data_drift",
          description: "Select to let the system correct this issue automatically.",
        }));

    const grid = el("div", "issue-cards");
    for (const issue of issues) {
      const card = el("article", "issue-card");
      card.dataset.issue = issue.kind;
      card.appendChild(el("h3", "issue-title", ISSUE_TITLES[issue.kind] ?? issue.kind));
      if (Number.isFinite(issue.impact)) {
        card.appendChild(el("div", "issue-impact", `impact ${issue.impact.toFixed(1)}`));
      }
      card.appendChild(el("p", "issue-text", issue.description));

      if (issue.correctable) {
        const label = el("label", "issue-select");
        const checkbox = document.createElement("input");
        checkbox.type = "checkbox";
        label.appendChild(checkbox);
        label.appendChild(document.createTextNode("correct this issue"));
        card.appendChild(label);
        this.checkboxes.set(issue.kind, checkbox);
        telemetry?.attach(checkbox, `auto.card.${issue.kind}`);
        checkbox.addEventListener("change", () => this.updateSubmitState());
      } else {
        card.appendChild(el("p", "advisory-note", "Advisory only; no automated correction."));
      }
      const pane = el("div", "outcome-pane");
      pane.hidden = true;
      card.appendChild(pane);
      this.outcomePanes.set(issue.kind, pane);
      grid.appendChild(card);
    }
    this.root.appendChild(grid);

    this.submitButton = el("button", "correct-retrain", "Correct & Retrain");
    this.submitButton.disabled = true;
    telemetry?.attach(this.submitButton, "auto.retrain");
    this.root.appendChild(this.submitButton);
  }

  checkbox(kind: string): HTMLInputElement | undefined {
    return this.checkboxes.get(kind);
  }

  selectedIssues(): string[] {
    return [...this.checkboxes.entries()]
      .filter(([, checkbox]) => checkbox.checked)
      .map(([kind]) => kind);
  }

  private updateSubmitState(): void {
    this.submitButton.disabled = this.selectedIssues().length === 0;
  }

  /** Paired before/after bars per corrected issue. */
  showOutcomes(outcomes: CorrectionOutcome[]): void {
    for (const outcome of outcomes) {
      const pane = this.outcomePanes.get(outcome.kind);
      if (!pane) {
        continue;
      }
      pane.textContent = "";
      for (const [label, report] of [
        ["before", outcome.before],
        ["after", outcome.after],
      ] as const) {
        const row = el("div", `outcome-row outcome-${label}`);
        row.appendChild(el("span", "outcome-label", label));
        const track = el("div", "outcome-track");
        const fill = el("div", "outcome-fill");
        fill.style.width = `${report.subscore.toFixed(1)}%`;
        track.appendChild(fill);
        row.appendChild(track);
        row.appendChild(el("span", "outcome-value", report.subscore.toFixed(1)));
        pane.appendChild(row);
      }
      const changes: string[] = [];
      if (outcome.rows_removed) {
        changes.push(`${outcome.rows_removed} rows removed`);
      }
      if (outcome.rows_added) {
        changes.push(`${outcome.rows_added} rows added`);
      }
      if (outcome.features_removed.length) {
        changes.push(`dropped ${outcome.features_removed.join(", ")}`);
      }
      if (changes.length) {
        pane.appendChild(el("p", "outcome-changes", changes.join("; ")));
      }
      pane.hidden = false;
    }
  }
}

import { ApiClient, ApiRequestError } from "./api.js";
import { AutoConfigScreen, ManualConfigScreen } from "./config.js";
import { renderDashboard } from "./render.js";
import { TelemetryRecorder } from "./telemetry.js";
import type {
  ExplanationBundle,
  FeatureSpec,
  SampleWarning,
  Variant,
  VersionSummary,
} from "./types.js";

export interface ViewState {
  sessionId: string;
  variant: Variant;
  versionId: number;
  bundle: ExplanationBundle;
  history: VersionSummary[];
  unsaved: boolean;
  warning: SampleWarning | null;
  busy: boolean;
  lastError: string | null;
}

/** Slider bounds from whatever the bundle carries; the UI derives nothing
 * beyond min/max of already-binned distributions. */
export function featureSpecsFromBundle(bundle: ExplanationBundle): FeatureSpec[] {
  if (bundle.density && bundle.density.length > 0) {
    return bundle.density.map((profile) => ({
      name: profile.feature,
      min: profile.bin_edges[0],
      max: profile.bin_edges[profile.bin_edges.length - 1],
    }));
  }
  if (bundle.importances && bundle.importances.length > 0) {
    return bundle.importances
      .map((score) => ({ name: score.feature }))
      .sort((a, b) => a.name.localeCompare(b.name));
  }
  const names = new Set<string>();
  for (const rule of bundle.rules ?? []) {
    for (const condition of rule.conditions) {
      names.add(condition.feature);
    }
  }
  return [...names].sort().map((name) => ({ name }));
}

export class DashboardApp {
  state!: ViewState;
  telemetry!: TelemetryRecorder;
  manualScreen!: ManualConfigScreen;
  autoScreen!: AutoConfigScreen;

  private dashboardHost!: HTMLElement;
  private historyHost!: HTMLElement;
  private saveButton!: HTMLButtonElement;
  private discardButton!: HTMLButtonElement;
  private retrainButton!: HTMLButtonElement;
  private statusNote!: HTMLElement;
  private errorBanner!: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    private readonly now: () => number = () => Date.now(),
  ) {}

  async start(variant: Variant): Promise<void> {
    const session = await this.api.createSession(variant);
    const history = await this.api.getHistory(session.session_id);
    this.state = {
      sessionId: session.session_id,
      variant,
      versionId: session.version_id,
      bundle: session.bundle,
      history: history.history,
      unsaved: this.headUnsaved(history.history),
      warning: null,
      busy: false,
      lastError: null,
    };
    this.telemetry = new TelemetryRecorder(this.api, session.session_id, this.now);
    this.telemetry.start();
    this.buildChrome();
    this.renderAll();
  }

  private headUnsaved(history: VersionSummary[]): boolean {
    return history.length > 0 && !history[history.length - 1].saved;
  }

  private buildChrome(): void {
    this.root.textContent = "";
    this.dashboardHost = document.createElement("div");
    this.dashboardHost.id = "dashboard-host";

    const versionBar = document.createElement("div");
    versionBar.className = "version-bar";
    this.saveButton = document.createElement("button");
    this.saveButton.id = "save-button";
    this.saveButton.textContent = "Save";
    this.saveButton.addEventListener("click", () => void this.save());
    this.telemetry.attach(this.saveButton, "history.save");
    this.discardButton = document.createElement("button");
    this.discardButton.id = "discard-button";
    this.discardButton.textContent = "Discard";
    this.discardButton.addEventListener("click", () => void this.discard());
    this.telemetry.attach(this.discardButton, "history.discard");
    this.statusNote = document.createElement("span");
    this.statusNote.className = "status-note";
    versionBar.appendChild(this.saveButton);
    versionBar.appendChild(this.discardButton);
    versionBar.appendChild(this.statusNote);

    this.errorBanner = document.createElement("div");
    this.errorBanner.className = "error-banner";
    this.errorBanner.hidden = true;

    this.manualScreen = new ManualConfigScreen(
      featureSpecsFromBundle(this.state.bundle),
      this.telemetry,
    );
    this.retrainButton = document.createElement("button");
    this.retrainButton.id = "manual-retrain";
    this.retrainButton.textContent = "Apply & Retrain";
    this.retrainButton.addEventListener("click", () => void this.retrainManual());
    this.telemetry.attach(this.retrainButton, "manual.retrain");
    this.manualScreen.root.appendChild(this.retrainButton);

    this.autoScreen = new AutoConfigScreen(this.state.bundle.quality ?? null, this.telemetry);
    this.autoScreen.submitButton.addEventListener("click", () => void this.retrainAuto());

    this.historyHost = document.createElement("aside");
    this.historyHost.id = "history-host";

    this.root.appendChild(this.dashboardHost);
    this.root.appendChild(this.errorBanner);
    this.root.appendChild(versionBar);
    this.root.appendChild(this.manualScreen.root);
    this.root.appendChild(this.autoScreen.root);
    this.root.appendChild(this.historyHost);
  }

  renderAll(): void {
    this.dashboardHost.textContent = "";
    const dashboard = renderDashboard(this.state.bundle);
    this.dashboardHost.appendChild(dashboard);
    for (const tile of dashboard.querySelectorAll<HTMLElement>(".tile")) {
      this.telemetry.attach(tile, tile.dataset.tile ?? "tile");
    }
    this.renderHistory();
    this.saveButton.disabled = !this.state.unsaved || this.state.busy;
    this.discardButton.disabled = !this.state.unsaved || this.state.busy;
    this.retrainButton.disabled = this.state.busy;
    this.autoScreen.submitButton.disabled =
      this.state.busy || this.autoScreen.selectedIssues().length === 0;
    this.statusNote.textContent = this.state.busy
      ? "retraining…"
      : this.state.unsaved
        ? "unsaved version"
        : "";
    this.errorBanner.hidden = this.state.lastError === null;
    this.errorBanner.textContent = this.state.lastError ?? "";
  }

  private renderHistory(): void {
    this.historyHost.textContent = "";
    const title = document.createElement("h2");
    title.textContent = "History";
    this.historyHost.appendChild(title);
    const list = document.createElement("ol");
    list.className = "history-list";
    for (const version of this.state.history) {
      const item = document.createElement("li");
      item.className = "history-entry";
      item.dataset.versionId = String(version.version_id);
      if (version.version_id === this.state.versionId) {
        item.classList.add("current");
      }
      const text = document.createElement("span");
      text.textContent =
        `v${version.version_id} · ${version.config.kind} · ` +
        `acc ${(100 * version.metrics.test_accuracy).toFixed(1)}%` +
        (version.saved ? "" : " · unsaved");
      item.appendChild(text);
      if (version.saved) {
        const revert = document.createElement("button");
        revert.className = "revert-button";
        revert.textContent = "Revert";
        revert.addEventListener("click", () => void this.revert(version.version_id));
        this.telemetry.attach(revert, `history.revert.${version.version_id}`);
        item.appendChild(revert);
      }
      list.appendChild(item);
    }
    this.historyHost.appendChild(list);
  }

  private async refresh(): Promise<void> {
    const [dashboard, history] = await Promise.all([
      this.api.getDashboard(this.state.sessionId),
      this.api.getHistory(this.state.sessionId),
    ]);
    this.state.versionId = dashboard.version_id;
    this.state.bundle = dashboard.bundle;
    this.state.history = history.history;
    this.state.unsaved = this.headUnsaved(history.history);
  }

  /** Post the manual draft for preview; shows the sample warning if any. */
  async previewManual(): Promise<void> {
    const response = await this.api.postManualConfig(
      this.state.sessionId,
      this.manualScreen.currentConfig(),
    );
    this.state.warning = response.warning;
    this.manualScreen.showWarning(response.warning);
    this.manualScreen.showPreview(response.preview.n_rows, response.preview.n_predictors);
  }

  /** Mutations are disabled while a retrain is in flight; the engine
   * serializes them server-side anyway. */
  private async withBusy(action: () => Promise<void>): Promise<void> {
    if (this.state.busy) {
      return;
    }
    this.state.busy = true;
    this.state.lastError = null;
    this.renderAll();
    try {
      await action();
    } catch (error) {
      this.state.lastError =
        error instanceof ApiRequestError ? error.message : String(error);
    } finally {
      this.state.busy = false;
      await this.refresh();
      this.renderAll();
    }
  }

  async retrainManual(): Promise<void> {
    await this.withBusy(async () => {
      await this.previewManual();
      await this.api.retrain(this.state.sessionId);
    });
  }

  async retrainAuto(): Promise<void> {
    await this.withBusy(async () => {
      const response = await this.api.postAutoConfig(this.state.sessionId, {
        selected_issues: this.autoScreen.selectedIssues(),
        seed: 42,
      });
      this.autoScreen.showOutcomes(response.outcomes);
      await this.api.retrain(this.state.sessionId);
    });
  }

  async save(): Promise<void> {
    await this.withBusy(async () => {
      await this.api.save(this.state.sessionId);
    });
  }

  async discard(): Promise<void> {
    await this.withBusy(async () => {
      await this.api.discard(this.state.sessionId);
    });
  }

  async revert(versionId: number): Promise<void> {
    await this.withBusy(async () => {
      await this.api.revert(this.state.sessionId, versionId);
    });
  }
}

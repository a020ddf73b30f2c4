// Bundle builders mirroring the service JSON, plus a minimal in-memory
// fake of the steering service for round-trip tests.

import type {
  BundleHeader,
  ExplanationBundle,
  QualityReport,
  TileId,
  Variant,
  VersionSummary,
} from "../src/types.js";

export function makeHeader(overrides: Partial<BundleHeader> = {}): BundleHeader {
  return {
    test_accuracy: 0.8,
    train_accuracy: 0.95,
    n_train_samples: 160,
    n_features: 2,
    accuracy_delta: null,
    ...overrides,
  };
}

export function makeQuality(): QualityReport {
  return {
    issues: [
      {
        kind: "outliers",
        subscore: 76.0,
        impact: 24.0,
        affected_features: ["Weight"],
        affected_row_ids: [5],
        correctable: true,
        description: "Some rows contain extreme values.",
      },
      {
        kind: "redundant_rows",
        subscore: 100.0,
        impact: 0.0,
        affected_features: [],
        affected_row_ids: [],
        correctable: true,
        description: "No repeated rows.",
      },
      {
        kind: "correlated_features",
        subscore: 100.0,
        impact: 0.0,
        affected_features: [],
        affected_row_ids: [],
        correctable: true,
        description: "No strongly correlated predictor pairs.",
      },
      {
        kind: "class_imbalance",
        subscore: 53.8,
        impact: 46.2,
        affected_features: ["Sick"],
        affected_row_ids: [],
        correctable: true,
        description: "Class counts are uneven.",
      },
      {
        kind: "data_drift",
        subscore: 100.0,
        impact: 0.0,
        affected_features: [],
        affected_row_ids: [],
        correctable: false,
        description: "No drift from the original data.",
      },
      {
        kind: "skewness",
        subscore: 66.7,
        impact: 33.3,
        affected_features: ["Marker"],
        affected_row_ids: [],
        correctable: true,
        description: "One predictor is heavily skewed.",
      },
    ],
    score: 82.75,
    level: "good",
  };
}

const ALL_HELP: Record<TileId, string> = {
  key_insights: "Headline findings about the training data.",
  density: "Value distribution of each predictor.",
  quality: "Overall training-data quality.",
  rules: "Decision conditions the model relies on.",
  importances: "Per-feature contribution to accuracy.",
};

const VARIANT_TILES: Record<Variant, TileId[]> = {
  DCE: ["key_insights", "density", "quality"],
  MCE: ["rules", "importances"],
  HYB: ["key_insights", "density", "quality", "rules", "importances"],
};

export function makeBundle(
  variant: Variant,
  headerOverrides: Partial<BundleHeader> = {},
): ExplanationBundle {
  const tiles = VARIANT_TILES[variant];
  const bundle: ExplanationBundle = {
    variant,
    header: makeHeader(headerOverrides),
    help_texts: Object.fromEntries(tiles.map((t) => [t, ALL_HELP[t]])),
  };
  if (tiles.includes("key_insights")) {
    bundle.key_insights = {
      top: [
        {
          feature: "Marker",
          metric: "zero_fraction",
          value_percent: 15.0,
          text: "15.0% of records have Marker = 0, which is not a valid measurement.",
        },
        {
          feature: "Weight",
          metric: "extreme_fraction",
          value_percent: 2.5,
          text: "2.5% of Weight values are extreme (outside the interquartile fences).",
        },
      ],
      rest: [
        {
          feature: "Sick",
          metric: "imbalance_note",
          value_percent: 65.0,
          text: "65.0% of records carry the majority Sick label; the classes are imbalanced.",
        },
      ],
    };
  }
  if (tiles.includes("density")) {
    bundle.density = [
      {
        feature: "Age",
        bin_edges: [21, 33, 45, 57, 69, 81],
        counts: [40, 60, 50, 30, 20],
        mean: 44.2,
        outlier_bins: [false, false, false, false, false],
      },
      {
        feature: "Weight",
        bin_edges: [40, 84, 128, 172, 216, 260],
        counts: [90, 100, 8, 1, 1],
        mean: 76.3,
        outlier_bins: [false, false, false, true, true],
      },
    ];
  }
  if (tiles.includes("quality")) {
    bundle.quality = makeQuality();
  }
  if (tiles.includes("rules")) {
    bundle.rules = [
      {
        conditions: [{ feature: "Age", op: ">", threshold: 52.5 }],
        predicted_class: 1,
        precision: 0.82,
        recall: 0.4,
        support: 46,
      },
      {
        conditions: [
          { feature: "Age", op: "<=", threshold: 40.0 },
          { feature: "Weight", op: "<=", threshold: 70.0 },
        ],
        predicted_class: 0,
        precision: 0.9,
        recall: 0.35,
        support: 38,
      },
    ];
  }
  if (tiles.includes("importances")) {
    bundle.importances = [
      { feature: "Age", percent: 58.0 },
      { feature: "Weight", percent: 30.0 },
      { feature: "Marker", percent: 12.0 },
    ];
  }
  return bundle;
}

function versionSummary(
  id: number,
  parent: number | null,
  accuracy: number,
  saved: boolean,
  kind: string,
): VersionSummary {
  return {
    version_id: id,
    parent_id: parent,
    config: { kind },
    table_digest: `digest-${id}`,
    metrics: {
      train_accuracy: 0.95,
      test_accuracy: accuracy,
      n_train_samples: 160,
      n_features: 2,
    },
    quality_score: 82.75,
    quality_level: "good",
    created_at: "2024-01-01T00:00:00Z",
    saved,
  };
}

/** In-memory stand-in for the steering service: enough behavior for the
 * dashboard round-trip (retrain bumps accuracy, revert restores v0). */
export class FakeServer {
  variant: Variant = "HYB";
  versions: VersionSummary[] = [];
  headId = 0;
  nextId = 1;
  retrainAccuracy = 0.85;
  events: Array<Record<string, unknown>> = [];
  manualPosts: Array<Record<string, unknown>> = [];
  autoPosts: Array<Record<string, unknown>> = [];

  private bundleFor(accuracy: number, delta: number | null): ExplanationBundle {
    return makeBundle(this.variant, { test_accuracy: accuracy, accuracy_delta: delta });
  }

  private head(): VersionSummary {
    return this.versions.find((v) => v.version_id === this.headId)!;
  }

  private json(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  private dashboard(): Record<string, unknown> {
    const head = this.head();
    const delta = head.version_id === 0 ? null : +(
      (100 * (head.metrics.test_accuracy - this.versions[0].metrics.test_accuracy)) /
      this.versions[0].metrics.test_accuracy
    ).toFixed(1);
    return {
      version_id: head.version_id,
      bundle: this.bundleFor(head.metrics.test_accuracy, delta),
    };
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;

    if (method === "POST" && path === "/sessions") {
      this.variant = body.variant;
      this.versions = [versionSummary(0, null, 0.8, true, "default")];
      this.headId = 0;
      return this.json({ session_id: "fake", variant: this.variant, ...this.dashboard() }, 201);
    }
    if (method === "GET" && path === "/sessions/fake/dashboard") {
      return this.json(this.dashboard());
    }
    if (method === "GET" && path === "/sessions/fake/history") {
      return this.json({ version_id: this.headId, history: this.versions });
    }
    if (method === "POST" && path === "/sessions/fake/config/manual") {
      this.manualPosts.push(body);
      const narrow = Object.keys(body.ranges ?? {}).length > 0;
      return this.json({
        version_id: this.headId,
        preview: { n_rows: narrow ? 70 : 200, n_predictors: body.included_features.length },
        warning: narrow
          ? { before_rows: 200, after_rows: 70, reduction_fraction: 0.65 }
          : null,
      });
    }
    if (method === "POST" && path === "/sessions/fake/config/auto") {
      this.autoPosts.push(body);
      const quality = makeQuality();
      const outcomes = (body.selected_issues as string[]).map((kind) => ({
        kind,
        before: quality.issues.find((i) => i.kind === kind)!,
        after: { ...quality.issues.find((i) => i.kind === kind)!, subscore: 100.0, impact: 0.0 },
        rows_removed: kind === "outliers" ? 6 : 0,
        rows_added: kind === "class_imbalance" ? 60 : 0,
        features_removed: [],
      }));
      return this.json({
        version_id: this.headId,
        preview: { n_rows: 200, n_predictors: 3 },
        outcomes,
      });
    }
    if (method === "POST" && path === "/sessions/fake/retrain") {
      const unsaved = this.versions.find((v) => !v.saved);
      if (unsaved) {
        this.versions = this.versions.filter((v) => v.version_id !== unsaved.version_id);
      }
      const parent = this.versions[this.versions.length - 1].version_id;
      const version = versionSummary(this.nextId++, parent, this.retrainAccuracy, false, "manual");
      this.versions.push(version);
      this.headId = version.version_id;
      return this.json({ version_id: this.headId, version, ...{ bundle: this.dashboard() } });
    }
    if (method === "POST" && path === "/sessions/fake/save") {
      const head = this.head();
      head.saved = true;
      return this.json({ version_id: this.headId, version: head });
    }
    if (method === "POST" && path === "/sessions/fake/discard") {
      const head = this.head();
      if (head.saved) {
        return this.json({ code: "nothing_unsaved", message: "nothing unsaved", detail: {} }, 409);
      }
      this.versions = this.versions.filter((v) => v.version_id !== head.version_id);
      this.headId = this.versions[this.versions.length - 1].version_id;
      return this.json({ version_id: this.headId, version: this.head() });
    }
    const revertMatch = path.match(/^\/sessions\/fake\/revert\/(\d+)$/);
    if (method === "POST" && revertMatch) {
      const target = Number(revertMatch[1]);
      const version = this.versions.find((v) => v.version_id === target && v.saved);
      if (!version) {
        return this.json({ code: "unknown_version", message: "no such version", detail: {} }, 404);
      }
      this.versions = this.versions.filter((v) => v.saved);
      this.headId = target;
      return this.json({ version_id: this.headId, version });
    }
    if (method === "POST" && path === "/sessions/fake/events") {
      this.events.push(body);
      return this.json({ version_id: this.headId, accepted: true });
    }
    return this.json({ code: "not_found", message: `no route ${method} ${path}`, detail: {} }, 404);
  };
}

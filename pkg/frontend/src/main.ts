import { ApiClient } from "./api.js";
import { DashboardApp } from "./app.js";
import type { Variant } from "./types.js";

const VARIANTS = new Set(["DCE", "MCE", "HYB"]);

function chosenVariant(): Variant {
  const param = new URLSearchParams(window.location.search).get("variant") ?? "HYB";
  const upper = param.toUpperCase();
  return (VARIANTS.has(upper) ? upper : "HYB") as Variant;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app container");
  }
  const api = new ApiClient("");
  const app = new DashboardApp(api, root);
  try {
    await app.start(chosenVariant());
  } catch (error) {
    root.textContent = `Failed to start a session: ${error}`;
  }
}

void boot();

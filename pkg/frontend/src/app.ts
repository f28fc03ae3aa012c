/** DOM wiring: buttons drive the API client, responses drive pure state,
 * state drives rendering. One active request per session; the server's
 * numbers are displayed verbatim (full precision in tooltips). */

import { ApiRequestError, LapincClient } from "./api.js";
import type { SessionCreateBody } from "./api.js";
import { renderLineChart, renderSizeBars } from "./charts.js";
import {
  canExport,
  canStep,
  canStop,
  historyKs,
  initialView,
  onCreated,
  onCreating,
  onError,
  onExported,
  onSolverFailure,
  onStepPending,
  onStepped,
  onStopped,
  onStopping,
  setThreshold,
  type SessionView,
} from "./state.js";

const METRIC_KEYS = [
  "modularity",
  "scaled_nc",
  "scaled_median_size",
  "scaled_max_size",
  "scaled_spectrum_energy",
] as const;

export interface AppHandle {
  getView(): SessionView;
  client: LapincClient;
  refresh(): void;
}

function byId<T extends HTMLElement>(root: Document, id: string): T {
  const el = root.getElementById(id);
  if (!el) {
    throw new Error(`dashboard markup is missing #${id}`);
  }
  return el as T;
}

function formatCell(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(4);
}

export function initApp(root: Document, baseUrl = ""): AppHandle {
  const client = new LapincClient(baseUrl);
  let view = initialView();

  const sourceMode = byId<HTMLSelectElement>(root, "source-mode");
  const edgeText = byId<HTMLTextAreaElement>(root, "edge-text");
  const genN = byId<HTMLInputElement>(root, "gen-n");
  const genP = byId<HTMLInputElement>(root, "gen-p");
  const genSeed = byId<HTMLInputElement>(root, "gen-seed");
  const createBtn = byId<HTMLButtonElement>(root, "create-btn");
  const stepBtn = byId<HTMLButtonElement>(root, "step-btn");
  const stopBtn = byId<HTMLButtonElement>(root, "stop-btn");
  const thresholdInput = byId<HTMLInputElement>(root, "threshold-input");
  const banner = byId<HTMLDivElement>(root, "banner");
  const meta = byId<HTMLDivElement>(root, "session-meta");
  const warnings = byId<HTMLUListElement>(root, "warnings");
  const metricsBody = byId<HTMLTableSectionElement>(root, "metrics-body");
  const exportCsvBtn = byId<HTMLButtonElement>(root, "export-csv-btn");
  const exportJsonBtn = byId<HTMLButtonElement>(root, "export-json-btn");
  const exportPreview = byId<HTMLPreElement>(root, "export-preview");

  function update(next: SessionView): void {
    view = next;
    render();
  }

  function bannerFrom(err: unknown): { code: string; message: string } {
    if (err instanceof ApiRequestError) {
      if (err.code === "session_stopped") {
        return { code: err.code, message: "session already stopped" };
      }
      return { code: err.code, message: err.message };
    }
    return { code: "network_error", message: String(err) };
  }

  function render(): void {
    const phase = view.phase;
    meta.textContent = view.id
      ? `session ${view.id} — ${phase} — n=${view.n} m=${view.m} components=${view.components}`
      : "no session";
    warnings.textContent = "";
    for (const text of view.warnings) {
      const li = root.createElement("li");
      li.textContent = text;
      warnings.appendChild(li);
    }
    if (view.banner) {
      banner.textContent = `[${view.banner.code}] ${view.banner.message}`;
      banner.dataset.code = view.banner.code;
      banner.classList.remove("hidden");
    } else {
      banner.textContent = "";
      delete banner.dataset.code;
      banner.classList.add("hidden");
    }
    createBtn.disabled = phase === "creating" || phase === "stepping" || phase === "stopping";
    stepBtn.disabled = !canStep(view);
    stopBtn.disabled = !canStop(view);
    exportCsvBtn.disabled = !canExport(view);
    exportJsonBtn.disabled = !canExport(view);

    metricsBody.textContent = "";
    for (const entry of view.history) {
      const row = root.createElement("tr");
      row.dataset.k = String(entry.k);
      const cells: (string | number)[] = [
        entry.k,
        ...METRIC_KEYS.map((key) => formatCell(entry.metrics[key])),
        `${entry.wall_time_ms.toFixed(1)} ms`,
      ];
      for (const [index, value] of cells.entries()) {
        const td = root.createElement("td");
        td.textContent = String(value);
        if (index > 0 && index <= METRIC_KEYS.length) {
          td.title = String(entry.metrics[METRIC_KEYS[index - 1]]);
        }
        row.appendChild(td);
      }
      metricsBody.appendChild(row);
    }

    for (const key of METRIC_KEYS) {
      const host = byId<HTMLDivElement>(root, `chart-${key}`);
      const points = view.history.map((entry) => ({ k: entry.k, value: entry.metrics[key] }));
      renderLineChart(host, points, {
        title: key.replace(/_/g, " "),
        threshold: key === "scaled_max_size" ? view.maxSizeThreshold : null,
      });
    }
    const latest = view.history[view.history.length - 1];
    renderSizeBars(byId(root, "chart-sizes"), latest ? latest.cluster_sizes : [], view.n);
    exportPreview.textContent = view.lastExportCsv ?? "";
  }

  function buildCreateBody(): SessionCreateBody {
    if (sourceMode.value === "generator") {
      return {
        generator: {
          n: Number(genN.value),
          p: Number(genP.value),
          seed: Number(genSeed.value),
        },
      };
    }
    return { edge_list_text: edgeText.value };
  }

  createBtn.addEventListener("click", () => {
    void (async () => {
      update(onCreating(view));
      try {
        update(onCreated(view, await client.createSession(buildCreateBody())));
      } catch (err) {
        update(onError(view, bannerFrom(err)));
      }
    })();
  });

  stepBtn.addEventListener("click", () => {
    if (!canStep(view) || !view.id) {
      return;
    }
    void (async () => {
      update(onStepPending(view));
      try {
        update(onStepped(view, await client.step(view.id!)));
      } catch (err) {
        if (err instanceof ApiRequestError && err.code === "solver_failure") {
          update(onSolverFailure(view, bannerFrom(err)));
        } else {
          update(onError(view, bannerFrom(err)));
        }
      }
    })();
  });

  stopBtn.addEventListener("click", () => {
    if (!view.id) {
      return;
    }
    void (async () => {
      update(onStopping(view));
      try {
        await client.stop(view.id!);
        update(onStopped(view));
      } catch (err) {
        update(onError(view, bannerFrom(err)));
      }
    })();
  });

  thresholdInput.addEventListener("input", () => {
    const raw = thresholdInput.value.trim();
    const value = raw === "" ? null : Number(raw);
    update(setThreshold(view, value != null && Number.isFinite(value) ? value : null));
  });

  function offerDownload(name: string, text: string, mime: string): void {
    if (typeof URL.createObjectURL !== "function") {
      return; // test DOMs have no object URLs; the preview still updates
    }
    const blob = new Blob([text], { type: mime });
    const anchor = root.createElement("a");
    anchor.href = URL.createObjectURL(blob);
    anchor.download = name;
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  }

  exportCsvBtn.addEventListener("click", () => {
    if (!view.id) {
      return;
    }
    void (async () => {
      try {
        const csv = await client.exportCsv(view.id!);
        update(onExported(view, csv));
        offerDownload(`session-${view.id}-metrics.csv`, csv, "text/csv");
      } catch (err) {
        update(onError(view, bannerFrom(err)));
      }
    })();
  });

  exportJsonBtn.addEventListener("click", () => {
    if (!view.id) {
      return;
    }
    void (async () => {
      try {
        const payload = await client.exportJson(view.id!);
        offerDownload(
          `session-${view.id}-export.json`,
          JSON.stringify(payload, null, 2),
          "application/json",
        );
      } catch (err) {
        update(onError(view, bannerFrom(err)));
      }
    })();
  });

  render();
  return {
    getView: () => view,
    client,
    refresh: render,
  };
}

export { historyKs };

/** Pure view-state for one dashboard session: what the server said, verbatim.
 * Every transition returns a fresh object so rendering is a plain function of
 * state; nothing here computes metrics. */

import type { HistoryEntry, StepResponse, CreateResponse } from "./api.js";

export type Phase =
  | "idle"
  | "creating"
  | "running"
  | "stepping"
  | "stopping"
  | "stopped"
  | "failed";

export interface Banner {
  code: string;
  message: string;
}

export interface SessionView {
  id: string | null;
  phase: Phase;
  n: number;
  m: number;
  components: number;
  warnings: string[];
  history: HistoryEntry[];
  banner: Banner | null;
  maxSizeThreshold: number | null;
  lastExportCsv: string | null;
}

export function initialView(): SessionView {
  return {
    id: null,
    phase: "idle",
    n: 0,
    m: 0,
    components: 0,
    warnings: [],
    history: [],
    banner: null,
    maxSizeThreshold: null,
    lastExportCsv: null,
  };
}

export function onCreating(view: SessionView): SessionView {
  return { ...initialView(), maxSizeThreshold: view.maxSizeThreshold, phase: "creating" };
}

export function onCreated(view: SessionView, created: CreateResponse): SessionView {
  return {
    ...view,
    id: created.id,
    phase: "running",
    n: created.n,
    m: created.m,
    components: created.components,
    warnings: created.warnings,
    history: [],
    banner: null,
  };
}

export function onStepPending(view: SessionView): SessionView {
  return { ...view, phase: "stepping", banner: null };
}

export function onStepped(view: SessionView, stepResult: StepResponse): SessionView {
  const entry: HistoryEntry = {
    k: stepResult.k,
    metrics: stepResult.metrics,
    cluster_sizes: stepResult.cluster_sizes,
    wall_time_ms: stepResult.wall_time_ms,
  };
  return { ...view, phase: "running", history: [...view.history, entry] };
}

export function onStopping(view: SessionView): SessionView {
  return { ...view, phase: "stopping", banner: null };
}

export function onStopped(view: SessionView): SessionView {
  return { ...view, phase: "stopped" };
}

export function onError(view: SessionView, banner: Banner): SessionView {
  // A 409 means the session is finished on the server; reflect that.
  const phase = banner.code === "session_stopped" ? "stopped" : view.phase === "creating" ? "idle" : "running";
  return { ...view, phase, banner };
}

export function onSolverFailure(view: SessionView, banner: Banner): SessionView {
  return { ...view, phase: "failed", banner };
}

export function onExported(view: SessionView, csv: string): SessionView {
  return { ...view, lastExportCsv: csv };
}

export function setThreshold(view: SessionView, value: number | null): SessionView {
  return { ...view, maxSizeThreshold: value };
}

export function canStep(view: SessionView): boolean {
  return view.phase === "running";
}

export function canStop(view: SessionView): boolean {
  return view.phase === "running" && view.history.length > 0;
}

export function canExport(view: SessionView): boolean {
  return view.history.length > 0;
}

/** Ks in server order; the table and charts must show exactly these. */
export function historyKs(view: SessionView): number[] {
  return view.history.map((entry) => entry.k);
}

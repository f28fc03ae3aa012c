import { beforeEach, describe, expect, it, vi } from "vitest";

import { initApp } from "../src/app.js";
import { mountDashboard, waitFor } from "./dom.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

const CREATED = { id: "s1", status: "running", n: 6, m: 6, components: 2, warnings: ["two components"] };

function stepBody(k: number) {
  return {
    id: "s1",
    k,
    metrics: {
      K: k,
      modularity: 0.5,
      scaled_nc: 0,
      scaled_median_size: 0.5,
      scaled_max_size: 0.5,
      scaled_spectrum_energy: 0,
    },
    cluster_sizes: [3, 3],
    wall_time_ms: 2.0,
  };
}

beforeEach(() => {
  mountDashboard();
  vi.restoreAllMocks();
});

function click(id: string): void {
  (document.getElementById(id) as HTMLButtonElement).click();
}

describe("dashboard wiring", () => {
  it("create then step fills the table row for K=2", async () => {
    const fetchMock = vi
      .spyOn(globalThis, "fetch")
      .mockResolvedValueOnce(jsonResponse(200, CREATED))
      .mockResolvedValueOnce(jsonResponse(200, stepBody(2)));
    const app = initApp(document, "");
    (document.getElementById("edge-text") as HTMLTextAreaElement).value = "0 1\n1 2";
    click("create-btn");
    await waitFor(() => app.getView().phase === "running", 2000, "session created");
    expect(document.getElementById("session-meta")!.textContent).toContain("s1");
    expect(document.querySelectorAll("#warnings li").length).toBe(1);

    click("step-btn");
    await waitFor(() => app.getView().history.length === 1, 2000, "first step");
    const rows = document.querySelectorAll("#metrics-body tr");
    expect(rows.length).toBe(1);
    expect(rows[0].getAttribute("data-k")).toBe("2");
    expect(rows[0].children[1].textContent).toBe("0.5000");
    expect((rows[0].children[1] as HTMLElement).title).toBe("0.5"); // full precision in tooltip
    expect(fetchMock).toHaveBeenCalledTimes(2);
  });

  it("step button is disabled while a step request is in flight", async () => {
    let release: (value: Response) => void = () => {};
    vi.spyOn(globalThis, "fetch")
      .mockResolvedValueOnce(jsonResponse(200, CREATED))
      .mockImplementationOnce(
        () => new Promise<Response>((resolve) => {
          release = resolve;
        }),
      );
    const app = initApp(document, "");
    click("create-btn");
    await waitFor(() => app.getView().phase === "running", 2000, "created");
    click("step-btn");
    await waitFor(() => app.getView().phase === "stepping", 2000, "step pending");
    expect((document.getElementById("step-btn") as HTMLButtonElement).disabled).toBe(true);
    release(jsonResponse(200, stepBody(2)));
    await waitFor(() => app.getView().history.length === 1, 2000, "step done");
    expect((document.getElementById("step-btn") as HTMLButtonElement).disabled).toBe(false);
  });

  it("renders a banner with the structured code on errors", async () => {
    vi.spyOn(globalThis, "fetch")
      .mockResolvedValueOnce(jsonResponse(200, CREATED))
      .mockResolvedValueOnce(
        jsonResponse(409, { error: { code: "session_stopped", message: "session s1 is stopped" } }),
      );
    const app = initApp(document, "");
    click("create-btn");
    await waitFor(() => app.getView().phase === "running", 2000, "created");
    click("step-btn");
    await waitFor(() => app.getView().banner !== null, 2000, "banner");
    const banner = document.getElementById("banner")!;
    expect(banner.classList.contains("hidden")).toBe(false);
    expect(banner.dataset.code).toBe("session_stopped");
    expect(banner.textContent).toContain("session already stopped");
    expect((document.getElementById("step-btn") as HTMLButtonElement).disabled).toBe(true);
  });

  it("threshold input adds the guide line to the max-size chart only", async () => {
    vi.spyOn(globalThis, "fetch")
      .mockResolvedValueOnce(jsonResponse(200, CREATED))
      .mockResolvedValueOnce(jsonResponse(200, stepBody(2)));
    const app = initApp(document, "");
    click("create-btn");
    await waitFor(() => app.getView().phase === "running", 2000, "created");
    click("step-btn");
    await waitFor(() => app.getView().history.length === 1, 2000, "stepped");

    const input = document.getElementById("threshold-input") as HTMLInputElement;
    input.value = "0.3";
    input.dispatchEvent(new Event("input"));
    const maxChart = document.getElementById("chart-scaled_max_size")!;
    expect(maxChart.querySelector("line.chart-threshold")).not.toBeNull();
    const otherChart = document.getElementById("chart-modularity")!;
    expect(otherChart.querySelector("line.chart-threshold")).toBeNull();
  });

  it("export caches the CSV verbatim and shows the preview", async () => {
    vi.spyOn(globalThis, "fetch")
      .mockResolvedValueOnce(jsonResponse(200, CREATED))
      .mockResolvedValueOnce(jsonResponse(200, stepBody(2)))
      .mockResolvedValueOnce(new Response("K,modularity\n2,0.5\n", { status: 200 }));
    const app = initApp(document, "");
    click("create-btn");
    await waitFor(() => app.getView().phase === "running", 2000, "created");
    click("step-btn");
    await waitFor(() => app.getView().history.length === 1, 2000, "stepped");
    click("export-csv-btn");
    await waitFor(() => app.getView().lastExportCsv !== null, 2000, "export");
    expect(app.getView().lastExportCsv).toBe("K,modularity\n2,0.5\n");
    expect(document.getElementById("export-preview")!.textContent).toContain("K,modularity");
  });
});

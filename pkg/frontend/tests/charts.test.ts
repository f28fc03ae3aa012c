import { describe, expect, it } from "vitest";

import { renderLineChart, renderSizeBars } from "../src/charts.js";

function host(): HTMLElement {
  const el = document.createElement("div");
  document.body.appendChild(el);
  return el;
}

describe("metric line chart", () => {
  it("renders one dot per K with a full-precision tooltip", () => {
    const el = host();
    renderLineChart(
      el,
      [
        { k: 2, value: 0.123456789123 },
        { k: 3, value: 0.2 },
        { k: 4, value: 0.35 },
      ],
      { title: "modularity" },
    );
    const dots = el.querySelectorAll("circle.chart-dot");
    expect(dots.length).toBe(3);
    expect([...dots].map((d) => d.getAttribute("data-k"))).toEqual(["2", "3", "4"]);
    expect(dots[0].querySelector("title")?.textContent).toBe("K=2: 0.123456789123");
  });

  it("draws the threshold guide when configured", () => {
    const el = host();
    renderLineChart(el, [{ k: 2, value: 0.6 }], { title: "scaled max size", threshold: 0.3 });
    const guide = el.querySelector("line.chart-threshold");
    expect(guide).not.toBeNull();
    expect(guide?.getAttribute("data-threshold")).toBe("0.3");
  });

  it("omits the threshold guide when unset", () => {
    const el = host();
    renderLineChart(el, [{ k: 2, value: 0.6 }], { title: "scaled max size", threshold: null });
    expect(el.querySelector("line.chart-threshold")).toBeNull();
  });

  it("shows a placeholder before any step", () => {
    const el = host();
    renderLineChart(el, [], { title: "modularity" });
    expect(el.querySelector(".chart-empty")?.textContent).toBe("no steps yet");
  });

  it("re-render replaces the previous chart", () => {
    const el = host();
    renderLineChart(el, [{ k: 2, value: 1 }], { title: "x" });
    renderLineChart(el, [{ k: 2, value: 1 }, { k: 3, value: 2 }], { title: "x" });
    expect(el.querySelectorAll("svg").length).toBe(1);
    expect(el.querySelectorAll("circle.chart-dot").length).toBe(2);
  });
});

describe("cluster size bars", () => {
  it("renders one bar per cluster with sizes attached", () => {
    const el = host();
    renderSizeBars(el, [3, 2, 1], 6);
    const bars = el.querySelectorAll("rect.size-bar");
    expect(bars.length).toBe(3);
    expect([...bars].map((b) => b.getAttribute("data-size"))).toEqual(["3", "2", "1"]);
    expect(bars[0].querySelector("title")?.textContent).toContain("50.0%");
  });

  it("renders an empty chart without bars before any step", () => {
    const el = host();
    renderSizeBars(el, [], 0);
    expect(el.querySelectorAll("rect").length).toBe(0);
  });
});

/** Minimal dependency-free SVG renderers: one line chart per metric and a
 * bar chart for the latest cluster-size distribution. Full-precision values
 * go into <title> tooltips; the plotted geometry is display-only. */

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 260;
const HEIGHT = 150;
const PAD = { left: 42, right: 10, top: 12, bottom: 24 };

function svgElement<K extends keyof SVGElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const el = doc.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

export interface SeriesPoint {
  k: number;
  value: number;
}

export interface LineChartOptions {
  title: string;
  threshold?: number | null;
}

function scale(
  points: SeriesPoint[],
  threshold: number | null | undefined,
): { x: (k: number) => number; y: (v: number) => number; lo: number; hi: number } {
  const ks = points.map((p) => p.k);
  const values = points.map((p) => p.value);
  if (threshold != null) {
    values.push(threshold);
  }
  const kLo = Math.min(...ks);
  const kHi = Math.max(...ks);
  let lo = Math.min(0, ...values);
  let hi = Math.max(...values);
  if (hi - lo < 1e-12) {
    hi = lo + 1;
  }
  const x = (k: number) =>
    PAD.left + ((k - kLo) / Math.max(kHi - kLo, 1)) * (WIDTH - PAD.left - PAD.right);
  const y = (v: number) =>
    HEIGHT - PAD.bottom - ((v - lo) / (hi - lo)) * (HEIGHT - PAD.top - PAD.bottom);
  return { x, y, lo, hi };
}

/** Render one metric-vs-K chart into `host` (replacing previous contents). */
export function renderLineChart(
  host: Element,
  points: SeriesPoint[],
  options: LineChartOptions,
): void {
  const doc = host.ownerDocument;
  host.textContent = "";
  const svg = svgElement(doc, "svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "metric-chart",
    role: "img",
  });
  svg.appendChild(
    Object.assign(svgElement(doc, "text", { x: "6", y: "11", class: "chart-title" }), {
      textContent: options.title,
    }),
  );
  if (points.length === 0) {
    svg.appendChild(
      Object.assign(
        svgElement(doc, "text", {
          x: String(WIDTH / 2),
          y: String(HEIGHT / 2),
          class: "chart-empty",
          "text-anchor": "middle",
        }),
        { textContent: "no steps yet" },
      ),
    );
    host.appendChild(svg);
    return;
  }
  const { x, y, lo, hi } = scale(points, options.threshold);
  const axis = svgElement(doc, "path", {
    d: `M ${PAD.left} ${PAD.top} V ${HEIGHT - PAD.bottom} H ${WIDTH - PAD.right}`,
    class: "chart-axis",
    fill: "none",
  });
  svg.appendChild(axis);
  for (const bound of [lo, hi]) {
    svg.appendChild(
      Object.assign(
        svgElement(doc, "text", {
          x: String(PAD.left - 4),
          y: String(y(bound) + 3),
          "text-anchor": "end",
          class: "chart-tick",
        }),
        { textContent: bound.toPrecision(3) },
      ),
    );
  }
  for (const point of points) {
    svg.appendChild(
      Object.assign(
        svgElement(doc, "text", {
          x: String(x(point.k)),
          y: String(HEIGHT - 8),
          "text-anchor": "middle",
          class: "chart-tick",
        }),
        { textContent: String(point.k) },
      ),
    );
  }
  if (options.threshold != null) {
    const ty = y(options.threshold);
    svg.appendChild(
      svgElement(doc, "line", {
        x1: String(PAD.left),
        x2: String(WIDTH - PAD.right),
        y1: String(ty),
        y2: String(ty),
        class: "chart-threshold",
        "data-threshold": String(options.threshold),
      }),
    );
  }
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"} ${x(p.k).toFixed(2)} ${y(p.value).toFixed(2)}`)
    .join(" ");
  svg.appendChild(svgElement(doc, "path", { d: path, class: "chart-line", fill: "none" }));
  for (const point of points) {
    const dot = svgElement(doc, "circle", {
      cx: x(point.k).toFixed(2),
      cy: y(point.value).toFixed(2),
      r: "3",
      class: "chart-dot",
      "data-k": String(point.k),
    });
    const tip = svgElement(doc, "title");
    tip.textContent = `K=${point.k}: ${point.value}`;
    dot.appendChild(tip);
    svg.appendChild(dot);
  }
  host.appendChild(svg);
}

/** Bar chart of the latest cluster sizes, one bar per cluster id. */
export function renderSizeBars(host: Element, sizes: number[], totalNodes: number): void {
  const doc = host.ownerDocument;
  host.textContent = "";
  const svg = svgElement(doc, "svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "size-chart",
    role: "img",
  });
  svg.appendChild(
    Object.assign(svgElement(doc, "text", { x: "6", y: "11", class: "chart-title" }), {
      textContent: "cluster sizes",
    }),
  );
  if (sizes.length === 0) {
    host.appendChild(svg);
    return;
  }
  const maxSize = Math.max(...sizes);
  const band = (WIDTH - PAD.left - PAD.right) / sizes.length;
  sizes.forEach((size, i) => {
    const height = ((HEIGHT - PAD.top - PAD.bottom) * size) / Math.max(maxSize, 1);
    const bar = svgElement(doc, "rect", {
      x: (PAD.left + i * band + band * 0.1).toFixed(2),
      y: (HEIGHT - PAD.bottom - height).toFixed(2),
      width: (band * 0.8).toFixed(2),
      height: height.toFixed(2),
      class: "size-bar",
      "data-cluster": String(i),
      "data-size": String(size),
    });
    const tip = svgElement(doc, "title");
    tip.textContent = `cluster ${i}: ${size} nodes (${((100 * size) / totalNodes).toFixed(1)}%)`;
    bar.appendChild(tip);
    svg.appendChild(bar);
  });
  host.appendChild(svg);
}

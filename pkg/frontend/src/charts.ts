// Schema-driven SVG bar charts. Input is always (label, value) pairs taken
// verbatim from a service payload; rendering sorts by |value| descending.

export interface Bar {
  label: string;
  value: number;
}

const SVG_NS = "http://www.w3.org/2000/svg";
const BAR_HEIGHT = 18;
const GAP = 6;
const LABEL_WIDTH = 130;
const VALUE_WIDTH = 70;
const CHART_WIDTH = 560;

export function barChart(bars: Bar[], maxBars = 15): SVGSVGElement {
  const sorted = [...bars]
    .sort((a, b) => Math.abs(b.value) - Math.abs(a.value))
    .slice(0, maxBars);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.classList.add("bar-chart");
  const height = sorted.length * (BAR_HEIGHT + GAP) + GAP;
  svg.setAttribute("viewBox", `0 0 ${CHART_WIDTH} ${height}`);
  svg.setAttribute("width", String(CHART_WIDTH));
  svg.setAttribute("height", String(height));

  const span = CHART_WIDTH - LABEL_WIDTH - VALUE_WIDTH;
  const mid = LABEL_WIDTH + span / 2;
  const scale = Math.max(...sorted.map((b) => Math.abs(b.value)), 1e-12);

  sorted.forEach((bar, i) => {
    const y = GAP + i * (BAR_HEIGHT + GAP);
    const frac = Math.abs(bar.value) / scale;
    const width = (span / 2) * frac;

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(LABEL_WIDTH - 6));
    label.setAttribute("y", String(y + BAR_HEIGHT * 0.72));
    label.setAttribute("text-anchor", "end");
    label.classList.add("bar-label");
    label.textContent = bar.label;
    svg.appendChild(label);

    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(bar.value >= 0 ? mid : mid - width));
    rect.setAttribute("y", String(y));
    rect.setAttribute("width", String(Math.max(width, 0.5)));
    rect.setAttribute("height", String(BAR_HEIGHT));
    rect.classList.add(bar.value >= 0 ? "bar-positive" : "bar-negative");
    rect.dataset.label = bar.label;
    rect.dataset.value = String(bar.value);
    svg.appendChild(rect);

    const value = document.createElementNS(SVG_NS, "text");
    value.setAttribute("x", String(CHART_WIDTH - 4));
    value.setAttribute("y", String(y + BAR_HEIGHT * 0.72));
    value.setAttribute("text-anchor", "end");
    value.classList.add("bar-value");
    value.textContent = bar.value.toExponential(2);
    svg.appendChild(value);

    const axis = document.createElementNS(SVG_NS, "line");
    axis.setAttribute("x1", String(mid));
    axis.setAttribute("x2", String(mid));
    axis.setAttribute("y1", "0");
    axis.setAttribute("y2", String(height));
    axis.classList.add("bar-axis");
    svg.appendChild(axis);
  });
  return svg;
}

/** Bars in DOM order (used by tests to assert the sort contract). */
export function chartBarValues(svg: SVGSVGElement): number[] {
  return Array.from(svg.querySelectorAll("rect")).map((r) =>
    Number(r.dataset.value),
  );
}

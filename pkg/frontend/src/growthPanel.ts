// Growth-curve side panel: quantile band, median line, shaded peak
// window, and the current patient's feature value pinned onto the chart.

import type { CvmOut, GrowthCurveOut } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const W = 300;
const H = 180;
const PAD = { left: 36, right: 10, top: 12, bottom: 24 };

interface Scale {
  x(age: number): number;
  y(value: number): number;
}

function makeScale(curve: GrowthCurveOut, extraValues: number[]): Scale {
  const ages = curve.ages;
  const values = Object.values(curve.quantiles).flat().concat(extraValues);
  const a0 = Math.min(...ages);
  const a1 = Math.max(...ages);
  const v0 = Math.min(...values);
  const v1 = Math.max(...values);
  const vPad = (v1 - v0 || 1) * 0.08;
  return {
    x: (age) => PAD.left + ((age - a0) / (a1 - a0 || 1)) * (W - PAD.left - PAD.right),
    y: (v) =>
      H - PAD.bottom - ((v - (v0 - vPad)) / (v1 + vPad - (v0 - vPad))) * (H - PAD.top - PAD.bottom),
  };
}

function el(doc: Document, tag: string, attrs: Record<string, string>): SVGElement {
  const node = doc.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function polyline(ages: number[], values: number[], s: Scale): string {
  return ages.map((a, i) => `${s.x(a)},${s.y(values[i] ?? 0)}`).join(" ");
}

export function renderGrowthPanel(
  svg: SVGSVGElement,
  curve: GrowthCurveOut,
  cvm: CvmOut | null,
  patientAge: number | null,
): void {
  const doc = svg.ownerDocument;
  while (svg.firstChild) svg.removeChild(svg.firstChild);
  svg.setAttribute("viewBox", `0 0 ${W} ${H}`);

  const patientValue = cvm ? cvm.features[curve.feature] : undefined;
  const s = makeScale(curve, patientValue !== undefined ? [patientValue] : []);

  // shaded feature window where growth potential is at its peak
  if (curve.stage_window) {
    const [lo, hi] = curve.stage_window;
    svg.appendChild(
      el(doc, "rect", {
        class: "peak-window",
        x: String(PAD.left),
        width: String(W - PAD.left - PAD.right),
        y: String(s.y(hi)),
        height: String(Math.abs(s.y(lo) - s.y(hi))),
      }),
    );
  }

  const q25 = curve.quantiles["0.25"];
  const q75 = curve.quantiles["0.75"];
  if (q25 && q75) {
    const upper = polyline(curve.ages, q75, s);
    const lower = curve.ages
      .map((a, i) => `${s.x(a)},${s.y(q25[i] ?? 0)}`)
      .reverse()
      .join(" ");
    svg.appendChild(el(doc, "polygon", { class: "quantile-band", points: `${upper} ${lower}` }));
  }

  const median = curve.quantiles["0.5"];
  if (median) {
    svg.appendChild(
      el(doc, "polyline", { class: "median-line", points: polyline(curve.ages, median, s), fill: "none" }),
    );
  }

  // vertical marker at the detected peak age
  svg.appendChild(
    el(doc, "line", {
      class: "peak-age",
      x1: String(s.x(curve.peak.age)),
      x2: String(s.x(curve.peak.age)),
      y1: String(PAD.top),
      y2: String(H - PAD.bottom),
    }),
  );

  if (patientValue !== undefined) {
    // without an age we can still show the value as a horizontal rule
    if (patientAge !== null) {
      svg.appendChild(
        el(doc, "circle", {
          class: "patient-marker",
          cx: String(s.x(patientAge)),
          cy: String(s.y(patientValue)),
          r: "5",
        }),
      );
    } else {
      svg.appendChild(
        el(doc, "line", {
          class: "patient-marker",
          x1: String(PAD.left),
          x2: String(W - PAD.right),
          y1: String(s.y(patientValue)),
          y2: String(s.y(patientValue)),
        }),
      );
    }
  }

  const caption = el(doc, "text", { x: String(PAD.left), y: String(H - 6), class: "caption" });
  caption.textContent = `${curve.feature} (${curve.sex}), peak at age ${curve.peak.age}`;
  svg.appendChild(caption);
}

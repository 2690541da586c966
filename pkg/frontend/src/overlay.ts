// Keypoint overlay: derives per-point display state from the round log
// and renders it as SVG markers in canvas coordinates.

import type { RoundOut, SessionOut } from "./api.js";
import { imageToCanvas, type Point, type Transform } from "./transform.js";

export type PointStatus = "predicted" | "corrected" | "revised";

export interface OverlayPoint {
  index: number;
  name: string;
  image: Point;
  status: PointStatus;
}

const SVG_NS = "http://www.w3.org/2000/svg";

/**
 * A corrected point is ALWAYS placed at its submitted coordinate (last
 * correction wins), never at whatever the model echoed back. Uncorrected
 * points that moved since round 0 are "revised".
 */
export function overlayPoints(session: SessionOut): OverlayPoint[] {
  const rounds: RoundOut[] = session.rounds;
  const first = rounds[0];
  const latest = rounds[rounds.length - 1];
  if (!first || !latest) return [];

  const pinned = new Map<number, Point>();
  for (const round of rounds) {
    if (round.correction) {
      pinned.set(round.correction.keypoint_index, {
        x: round.correction.x,
        y: round.correction.y,
      });
    }
  }

  return latest.keypoints.map((kp, i) => {
    const submitted = pinned.get(i);
    if (submitted) {
      return { index: i, name: kp.name, image: submitted, status: "corrected" as const };
    }
    const initial = first.keypoints[i];
    const moved = initial !== undefined && (initial.x !== kp.x || initial.y !== kp.y);
    return {
      index: i,
      name: kp.name,
      image: { x: kp.x, y: kp.y },
      status: moved ? ("revised" as const) : ("predicted" as const),
    };
  });
}

export function renderOverlay(
  svg: SVGSVGElement,
  points: OverlayPoint[],
  t: Transform,
  selected: number | null,
): void {
  while (svg.firstChild) svg.removeChild(svg.firstChild);
  for (const p of points) {
    const c = imageToCanvas(t, p.image);
    const g = svg.ownerDocument.createElementNS(SVG_NS, "g");
    g.setAttribute("class", `kp kp-${p.status}${selected === p.index ? " kp-selected" : ""}`);
    g.setAttribute("data-index", String(p.index));
    g.setAttribute("data-status", p.status);

    const circle = svg.ownerDocument.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(c.x));
    circle.setAttribute("cy", String(c.y));
    circle.setAttribute("r", selected === p.index ? "7" : "5");
    g.appendChild(circle);

    const label = svg.ownerDocument.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(c.x + 8));
    label.setAttribute("y", String(c.y - 8));
    label.textContent = p.name;
    g.appendChild(label);

    svg.appendChild(g);
  }
}

/** Nearest marker within `radius` canvas pixels of a canvas point, or null. */
export function hitTest(
  points: OverlayPoint[],
  t: Transform,
  canvasPoint: Point,
  radius = 10,
): number | null {
  let best: number | null = null;
  let bestDist = radius;
  for (const p of points) {
    const c = imageToCanvas(t, p.image);
    const d = Math.hypot(c.x - canvasPoint.x, c.y - canvasPoint.y);
    if (d <= bestDist) {
      bestDist = d;
      best = p.index;
    }
  }
  return best;
}

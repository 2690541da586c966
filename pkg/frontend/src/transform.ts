// Zoom/pan between image pixels and canvas pixels. One uniform scale,
// no rotation: canvas = image * scale + offset.

export interface Point {
  x: number;
  y: number;
}

export interface Transform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export const MIN_SCALE = 0.1;
export const MAX_SCALE = 32;

export function imageToCanvas(t: Transform, p: Point): Point {
  return { x: p.x * t.scale + t.offsetX, y: p.y * t.scale + t.offsetY };
}

export function canvasToImage(t: Transform, p: Point): Point {
  return { x: (p.x - t.offsetX) / t.scale, y: (p.y - t.offsetY) / t.scale };
}

/** Scale about a canvas-space anchor so the pixel under the cursor stays put. */
export function zoomAt(t: Transform, factor: number, anchor: Point): Transform {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, t.scale * factor));
  const k = scale / t.scale;
  return {
    scale,
    offsetX: anchor.x - k * (anchor.x - t.offsetX),
    offsetY: anchor.y - k * (anchor.y - t.offsetY),
  };
}

export function panBy(t: Transform, dx: number, dy: number): Transform {
  return { scale: t.scale, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}

/** Center the image in the canvas with a small margin. */
export function fitImage(
  imageW: number,
  imageH: number,
  canvasW: number,
  canvasH: number,
  margin = 0.95,
): Transform {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, margin * Math.min(canvasW / imageW, canvasH / imageH)));
  return {
    scale,
    offsetX: (canvasW - imageW * scale) / 2,
    offsetY: (canvasH - imageH * scale) / 2,
  };
}

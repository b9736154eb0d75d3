/**
 * Rendering math for the four visualization modes.
 *
 * Drawing goes through the Draw2D subset of CanvasRenderingContext2D so
 * the geometry can be exercised without a rasterizer. Marker positions
 * travel in normalized image coordinates, making cursor-linked symbols
 * line up across differently sized panes.
 */

import type { PairTransform } from "./api.js";
import type { CompareState, Segment } from "./state.js";

export interface Draw2D {
  save(): void;
  restore(): void;
  beginPath(): void;
  rect(x: number, y: number, w: number, h: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  clip(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  drawImage(image: unknown, dx: number, dy: number, dw: number, dh: number): void;
  setTransform(a: number, b: number, c: number, d: number, e: number, f: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
}

export interface PaneGeometry {
  width: number;
  height: number;
}

/** Cursor position in normalized image coordinates. */
export interface NormalizedPoint {
  x: number;
  y: number;
}

export function toNormalized(px: number, py: number, pane: PaneGeometry): NormalizedPoint {
  return {
    x: Math.min(1, Math.max(0, px / pane.width)),
    y: Math.min(1, Math.max(0, py / pane.height)),
  };
}

export function toPane(point: NormalizedPoint, pane: PaneGeometry): { x: number; y: number } {
  return { x: point.x * pane.width, y: point.y * pane.height };
}

/**
 * Canvas matrix (a, b, c, d, e, f) equivalent to the server's similarity
 * transform, which maps the second image onto the first image's frame.
 */
export function transformToMatrix(t: PairTransform): [number, number, number, number, number, number] {
  const cos = t.scale * Math.cos(t.rotation);
  const sin = t.scale * Math.sin(t.rotation);
  return [cos, sin, -sin, cos, t.dx, t.dy];
}

export function applyMatrix(
  m: [number, number, number, number, number, number],
  x: number,
  y: number,
): { x: number; y: number } {
  return { x: m[0] * x + m[2] * y + m[4], y: m[1] * x + m[3] * y + m[5] };
}

/**
 * Overlay split: the vertical bar at `split` (0..1) shows the first image
 * on its left and the registered second image on its right. Bar fully
 * left leaves only the second image visible.
 */
export function overlayRegions(split: number, pane: PaneGeometry) {
  const bar = split * pane.width;
  return {
    first: { x: 0, y: 0, width: bar, height: pane.height },
    second: { x: bar, y: 0, width: pane.width - bar, height: pane.height },
    barX: bar,
  };
}

function drawRegisteredSecond(
  draw: Draw2D,
  image: unknown,
  transform: PairTransform | null,
  pane: PaneGeometry,
  displayScale: number,
): void {
  if (transform) {
    const m = transformToMatrix(transform);
    // display scale first, then the registration transform in image space
    draw.setTransform(
      m[0] * displayScale,
      m[1] * displayScale,
      m[2] * displayScale,
      m[3] * displayScale,
      m[4] * displayScale,
      m[5] * displayScale,
    );
    draw.drawImage(image, 0, 0, (image as { width: number }).width, (image as { height: number }).height);
    draw.setTransform(1, 0, 0, 1, 0, 0);
  } else {
    draw.drawImage(image, 0, 0, pane.width, pane.height);
  }
}

export function renderOverlay(
  draw: Draw2D,
  first: unknown,
  second: unknown,
  transform: PairTransform | null,
  state: CompareState,
  pane: PaneGeometry,
  displayScale: number,
): void {
  const regions = overlayRegions(state.overlaySplit, pane);
  draw.clearRect(0, 0, pane.width, pane.height);

  draw.save();
  draw.beginPath();
  draw.rect(regions.second.x, regions.second.y, regions.second.width, regions.second.height);
  draw.clip();
  drawRegisteredSecond(draw, second, transform, pane, displayScale);
  draw.restore();

  draw.save();
  draw.beginPath();
  draw.rect(regions.first.x, regions.first.y, regions.first.width, regions.first.height);
  draw.clip();
  draw.drawImage(first, 0, 0, pane.width, pane.height);
  draw.restore();

  draw.strokeStyle = "#ffffff";
  draw.lineWidth = 2;
  draw.beginPath();
  draw.moveTo(regions.barX, 0);
  draw.lineTo(regions.barX, pane.height);
  draw.stroke();
}

export function renderLoupe(
  draw: Draw2D,
  first: unknown,
  second: unknown,
  transform: PairTransform | null,
  state: CompareState,
  pane: PaneGeometry,
  displayScale: number,
  cursor: NormalizedPoint | null,
): void {
  draw.clearRect(0, 0, pane.width, pane.height);
  draw.drawImage(first, 0, 0, pane.width, pane.height);
  if (!cursor) return;
  const center = toPane(cursor, pane);
  draw.save();
  draw.beginPath();
  draw.arc(center.x, center.y, state.loupeRadius, 0, 2 * Math.PI);
  draw.clip();
  drawRegisteredSecond(draw, second, transform, pane, displayScale);
  draw.restore();
  draw.strokeStyle = "#ffffff";
  draw.lineWidth = 1.5;
  draw.beginPath();
  draw.arc(center.x, center.y, state.loupeRadius, 0, 2 * Math.PI);
  draw.stroke();
}

export function renderFade(
  draw: Draw2D,
  first: unknown,
  second: unknown,
  transform: PairTransform | null,
  state: CompareState,
  pane: PaneGeometry,
  displayScale: number,
): void {
  draw.clearRect(0, 0, pane.width, pane.height);
  draw.globalAlpha = 1;
  draw.drawImage(first, 0, 0, pane.width, pane.height);
  draw.globalAlpha = state.fadeAlpha;
  drawRegisteredSecond(draw, second, transform, pane, displayScale);
  draw.globalAlpha = 1;
}

/** Cross marker segments for one pane, mirrored on both coins. */
export function crossSegments(cursor: NormalizedPoint, pane: PaneGeometry, arm = 14) {
  const p = toPane(cursor, pane);
  return [
    { x1: p.x - arm, y1: p.y, x2: p.x + arm, y2: p.y },
    { x1: p.x, y1: p.y - arm, x2: p.x, y2: p.y + arm },
  ];
}

/** Horizontal marker line spanning the pane at the cursor height. */
export function horizontalSegment(cursor: NormalizedPoint, pane: PaneGeometry) {
  const p = toPane(cursor, pane);
  return { x1: 0, y1: p.y, x2: pane.width, y2: p.y };
}

export function drawMarkerSegments(
  draw: Draw2D,
  segments: { x1: number; y1: number; x2: number; y2: number }[],
  color = "#ff2020",
): void {
  draw.strokeStyle = color;
  draw.lineWidth = 2;
  for (const s of segments) {
    draw.beginPath();
    draw.moveTo(s.x1, s.y1);
    draw.lineTo(s.x2, s.y2);
    draw.stroke();
  }
}

/** User-drawn two-point segments, normalized storage to pane pixels. */
export function segmentsToPane(segments: Segment[], pane: PaneGeometry) {
  return segments.map((s) => {
    const a = toPane({ x: s.x1, y: s.y1 }, pane);
    const b = toPane({ x: s.x2, y: s.y2 }, pane);
    return { x1: a.x, y1: a.y, x2: b.x, y2: b.y };
  });
}

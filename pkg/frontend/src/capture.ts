/**
 * Control-image download: snapshot the current comparison rendering,
 * stamp the attribution watermark, and save it under a name built from
 * the two coin file names.
 */

export const WATERMARK = "(c) ACCADIL";

export interface CaptureCanvas {
  width: number;
  height: number;
  toDataURL(type: string): string;
  getContext(kind: "2d"): CaptureContext | null;
}

export interface CaptureContext {
  font: string;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  fillText(text: string, x: number, y: number): void;
  strokeText(text: string, x: number, y: number): void;
}

export interface CaptureResult {
  filename: string;
  dataUrl: string;
  /** set when the browser zoom was not 100%; the file is still produced */
  zoomWarning: string | null;
}

export function controlImageName(name1: string, name2: string): string {
  return `${name1}-${name2}.png`;
}

/** Browser zoom as a percentage; 100 means unscaled rendering. */
export function zoomPercent(devicePixelRatio: number): number {
  return Math.round(devicePixelRatio * 100);
}

/**
 * Stamp the watermark and serialize the canvas. Fails (returns null) only
 * when the canvas cannot provide a 2d context or data URL.
 */
export function captureControlImage(
  canvas: CaptureCanvas,
  name1: string,
  name2: string,
  currentZoomPercent: number,
): CaptureResult | null {
  const ctx = canvas.getContext("2d");
  if (!ctx) return null;

  ctx.font = "16px sans-serif";
  ctx.lineWidth = 3;
  ctx.strokeStyle = "rgba(0, 0, 0, 0.8)";
  ctx.fillStyle = "rgba(255, 255, 255, 0.95)";
  const x = 10;
  const y = canvas.height - 12;
  ctx.strokeText(WATERMARK, x, y);
  ctx.fillText(WATERMARK, x, y);

  let dataUrl: string;
  try {
    dataUrl = canvas.toDataURL("image/png");
  } catch {
    return null;
  }

  return {
    filename: controlImageName(name1, name2),
    dataUrl,
    zoomWarning:
      currentZoomPercent === 100
        ? null
        : `Browser zoom is ${currentZoomPercent}%, not 100%: the control image is saved anyway but may not be usable.`,
  };
}

/** Hand the capture to the browser's download machinery. */
export function triggerDownload(doc: Document, result: CaptureResult): void {
  const link = doc.createElement("a");
  link.href = result.dataUrl;
  link.download = result.filename;
  doc.body.appendChild(link);
  link.click();
  link.remove();
}

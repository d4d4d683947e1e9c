// Viewport state for pan/zoom. Zooming never mutates the document; it
// only changes the rectangle requested from the render service.

export interface Viewport {
  x: number;
  y: number;
  w: number;
  h: number;
}

export function fullViewport(width: number, height: number): Viewport {
  return { x: 0, y: 0, w: width, h: height };
}

export function isFull(v: Viewport, width: number, height: number): boolean {
  return v.x === 0 && v.y === 0 && v.w === width && v.h === height;
}

/** Zoom about a document-space anchor point by `factor` (>1 zooms in). */
export function zoomAbout(
  v: Viewport,
  anchorX: number,
  anchorY: number,
  factor: number,
  docW: number,
  docH: number,
): Viewport {
  const w = Math.min(docW, Math.max(docW / 1024, v.w / factor));
  const h = Math.min(docH, Math.max(docH / 1024, v.h / factor));
  const fx = (anchorX - v.x) / v.w;
  const fy = (anchorY - v.y) / v.h;
  return clampViewport(
    { x: anchorX - fx * w, y: anchorY - fy * h, w, h },
    docW,
    docH,
  );
}

export function pan(v: Viewport, dx: number, dy: number,
                    docW: number, docH: number): Viewport {
  return clampViewport({ x: v.x + dx, y: v.y + dy, w: v.w, h: v.h }, docW, docH);
}

export function clampViewport(v: Viewport, docW: number, docH: number): Viewport {
  const w = Math.min(v.w, docW);
  const h = Math.min(v.h, docH);
  return {
    x: Math.min(Math.max(v.x, 0), docW - w),
    y: Math.min(Math.max(v.y, 0), docH - h),
    w,
    h,
  };
}

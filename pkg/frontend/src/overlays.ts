// Primitive overlays on the editing canvas, in the reference legend
// style: diffusion curves solid, Poisson curves dashed, Poisson regions
// hatched loops.

import type { PvgDocument, Spline } from "./types.js";
import { evaluateSpline } from "./spline-fit.js";
import type { Viewport } from "./viewport.js";

export function splinePolyline(spline: Spline, samples = 64): [number, number][] {
  const pts: [number, number][] = [];
  for (let i = 0; i <= samples; i++) {
    pts.push(evaluateSpline(spline, i / samples));
  }
  if (spline.closed) pts.push(pts[0]);
  return pts;
}

function tracePath(
  ctx: CanvasRenderingContext2D,
  pts: [number, number][],
  view: Viewport,
  scaleX: number,
  scaleY: number,
): void {
  ctx.beginPath();
  pts.forEach(([x, y], i) => {
    const px = (x - view.x) * scaleX;
    const py = (y - view.y) * scaleY;
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
}

export function drawOverlays(
  ctx: CanvasRenderingContext2D,
  doc: PvgDocument,
  view: Viewport,
  canvasW: number,
  canvasH: number,
): void {
  const sx = canvasW / view.w;
  const sy = canvasH / view.h;
  ctx.save();
  ctx.lineWidth = 1.5;

  for (const dc of doc.diffusion_curves) {
    ctx.setLineDash([]);
    ctx.strokeStyle = "rgba(30, 30, 30, 0.9)";
    tracePath(ctx, splinePolyline(dc.spline), view, sx, sy);
    ctx.stroke();
  }
  for (const pc of doc.poisson_curves) {
    ctx.setLineDash([6, 4]);
    ctx.strokeStyle = "rgba(200, 40, 40, 0.9)";
    tracePath(ctx, splinePolyline(pc.spline), view, sx, sy);
    ctx.stroke();
  }
  for (const pr of doc.poisson_regions) {
    const pts = splinePolyline(pr.boundary);
    ctx.setLineDash([]);
    ctx.strokeStyle = "rgba(40, 120, 60, 0.9)";
    tracePath(ctx, pts, view, sx, sy);
    ctx.stroke();
    // short hatches along the loop, pointing inward-ish
    ctx.setLineDash([]);
    for (let i = 0; i < pts.length - 1; i += 4) {
      const [x0, y0] = pts[i];
      const [x1, y1] = pts[i + 1];
      const len = Math.hypot(x1 - x0, y1 - y0) || 1;
      const nx = -(y1 - y0) / len;
      const ny = (x1 - x0) / len;
      ctx.beginPath();
      ctx.moveTo((x0 - view.x) * sx, (y0 - view.y) * sy);
      ctx.lineTo((x0 + nx * 4 - view.x) * sx, (y0 + ny * 4 - view.y) * sy);
      ctx.stroke();
    }
  }
  ctx.restore();
}

// Client-side mirror of the engine's structural parse rules, so the UI
// never ships a document the server would reject.

import type { PvgDocument, Spline } from "./types.js";

export interface Problem {
  path: string;
  message: string;
}

function checkSpline(s: Spline, path: string, problems: Problem[]): void {
  if (s.control_points.length < 4) {
    problems.push({ path, message: "spline needs at least 4 control points" });
  }
  for (const [x, y] of s.control_points) {
    if (!Number.isFinite(x) || !Number.isFinite(y)) {
      problems.push({ path, message: "non-finite control point" });
      break;
    }
  }
}

function checkStops(ts: number[], path: string, problems: Problem[]): void {
  if (ts.length === 0) {
    problems.push({ path, message: "needs at least one stop" });
    return;
  }
  for (const t of ts) {
    if (!(t >= 0 && t <= 1)) {
      problems.push({ path, message: `stop parameter ${t} outside [0, 1]` });
      return;
    }
  }
  for (let i = 1; i < ts.length; i++) {
    if (ts[i] <= ts[i - 1]) {
      problems.push({ path, message: "stops must be strictly increasing in t" });
      return;
    }
  }
}

function checkColor(c: number[], path: string, problems: Problem[]): void {
  if (c.length !== 3 || c.some((v) => !(v >= 0 && v <= 1))) {
    problems.push({ path, message: "color components must lie in [0, 1]" });
  }
}

export function validateDocument(doc: PvgDocument): Problem[] {
  const problems: Problem[] = [];
  if (!(doc.canvas.width > 0) || !(doc.canvas.height > 0)) {
    problems.push({ path: "canvas", message: "canvas dimensions must be positive" });
  }
  checkColor(doc.canvas.background, "canvas.background", problems);
  if (doc.canvas.border !== null) {
    checkColor(doc.canvas.border, "canvas.border", problems);
  }
  doc.diffusion_curves.forEach((dc, i) => {
    checkSpline(dc.spline, `diffusion_curves[${i}]`, problems);
    checkStops(dc.left_colors.map((s) => s.t), `diffusion_curves[${i}].left`, problems);
    checkStops(dc.right_colors.map((s) => s.t), `diffusion_curves[${i}].right`, problems);
    for (const s of [...dc.left_colors, ...dc.right_colors]) {
      checkColor(s.color, `diffusion_curves[${i}]`, problems);
    }
  });
  doc.poisson_curves.forEach((pc, i) => {
    checkSpline(pc.spline, `poisson_curves[${i}]`, problems);
    checkStops(pc.laplacian_stops.map((s) => s.t), `poisson_curves[${i}]`, problems);
  });
  doc.poisson_regions.forEach((pr, i) => {
    checkSpline(pr.boundary, `poisson_regions[${i}]`, problems);
    if (!pr.boundary.closed) {
      problems.push({
        path: `poisson_regions[${i}]`,
        message: "PR boundary must be closed",
      });
    }
  });
  return problems;
}

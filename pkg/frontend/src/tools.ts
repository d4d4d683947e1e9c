// Stroke handling: turn a pointer path into a document primitive.

import type {
  EditorTool,
  Point,
  PvgDocument,
  RGB,
} from "./types.js";
import { cloneDocument } from "./types.js";
import { fitSpline, MIN_STROKE_SAMPLES } from "./spline-fit.js";

export interface SketchStyle {
  leftColor: RGB;
  rightColor: RGB;
  laplacian255: number; // initial PC strength, 0-255 scale
  regionLaplacian255: number; // initial PR band strength
}

export const DEFAULT_STYLE: SketchStyle = {
  leftColor: [0.35, 0.45, 0.8],
  rightColor: [0.95, 0.95, 0.95],
  laplacian255: 41,
  regionLaplacian255: 10,
};

export type SketchResult =
  | { ok: true; doc: PvgDocument; kind: "dc" | "pc" | "pr"; index: number;
      autoClosed: boolean }
  | { ok: false; reason: string };

function strokeIsClosed(stroke: Point[]): boolean {
  const [x0, y0] = stroke[0];
  const [x1, y1] = stroke[stroke.length - 1];
  const span = stroke.reduce(
    (acc, [x, y]) => Math.max(acc, Math.hypot(x - x0, y - y0)),
    0,
  );
  return Math.hypot(x1 - x0, y1 - y0) < Math.max(6, 0.15 * span);
}

/**
 * Fit the stroke and append a primitive for the active tool.
 *
 * Strokes with fewer than MIN_STROKE_SAMPLES samples are rejected. An
 * open stroke in draw_pr mode is closed automatically (the caller is
 * expected to have confirmed); the result reports `autoClosed`.
 */
export function sketchPrimitive(
  doc: PvgDocument,
  tool: EditorTool,
  stroke: Point[],
  style: SketchStyle = DEFAULT_STYLE,
): SketchResult {
  if (stroke.length < MIN_STROKE_SAMPLES) {
    return { ok: false, reason: "stroke too short" };
  }
  const out = cloneDocument(doc);
  if (tool.mode === "draw_dc") {
    const spline = fitSpline(stroke, strokeIsClosed(stroke));
    if (!spline) return { ok: false, reason: "stroke too short" };
    out.diffusion_curves.push({
      spline,
      left_colors: [{ t: 0, color: [...style.leftColor] }],
      right_colors: [{ t: 0, color: [...style.rightColor] }],
    });
    return {
      ok: true, doc: out, kind: "dc",
      index: out.diffusion_curves.length - 1, autoClosed: false,
    };
  }
  if (tool.mode === "draw_pc") {
    const spline = fitSpline(stroke, strokeIsClosed(stroke));
    if (!spline) return { ok: false, reason: "stroke too short" };
    const f = style.laplacian255 / 255;
    out.poisson_curves.push({
      spline,
      laplacian_stops: [{ t: 0, f_plus: [f, f, f] }],
    });
    return {
      ok: true, doc: out, kind: "pc",
      index: out.poisson_curves.length - 1, autoClosed: false,
    };
  }
  if (tool.mode === "draw_pr") {
    const autoClosed = !strokeIsClosed(stroke);
    const spline = fitSpline(stroke, true); // PR boundaries are closed
    if (!spline) return { ok: false, reason: "stroke too short" };
    const f = style.regionLaplacian255 / 255;
    out.poisson_regions.push({
      boundary: spline,
      f_outer: [f, f, f],
      delta_outer: [0, 0, 0],
      delta_inner: [0, 0, 0],
    });
    return {
      ok: true, doc: out, kind: "pr",
      index: out.poisson_regions.length - 1, autoClosed,
    };
  }
  return { ok: false, reason: `tool ${tool.mode} does not sketch` };
}

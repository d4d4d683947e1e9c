// Document model mirroring the engine's .pvg.json format.

export type RGB = [number, number, number];
export type Point = [number, number];

export interface Spline {
  closed: boolean;
  control_points: Point[];
}

export interface ColorStop {
  t: number;
  color: RGB;
}

export interface LaplacianStop {
  t: number;
  f_plus: RGB;
}

export interface DiffusionCurve {
  spline: Spline;
  left_colors: ColorStop[];
  right_colors: ColorStop[];
}

export interface PoissonCurve {
  spline: Spline;
  laplacian_stops: LaplacianStop[];
}

export interface PoissonRegion {
  boundary: Spline;
  f_outer: RGB;
  delta_outer: RGB;
  delta_inner: RGB;
}

export interface PvgDocument {
  version: 1;
  canvas: {
    width: number;
    height: number;
    background: RGB;
    border: RGB | null;
  };
  diffusion_curves: DiffusionCurve[];
  poisson_curves: PoissonCurve[];
  poisson_regions: PoissonRegion[];
}

export type ToolMode =
  | "draw_dc"
  | "draw_pc"
  | "draw_pr"
  | "select"
  | "edit_control_points";

export type PrimitiveKind = "dc" | "pc" | "pr";

export interface PrimitiveRef {
  kind: PrimitiveKind;
  index: number;
}

export interface EditorTool {
  mode: ToolMode;
  active: PrimitiveRef | null;
}

export function emptyDocument(width = 256, height = 256): PvgDocument {
  return {
    version: 1,
    canvas: { width, height, background: [1, 1, 1], border: [1, 1, 1] },
    diffusion_curves: [],
    poisson_curves: [],
    poisson_regions: [],
  };
}

export function cloneDocument(doc: PvgDocument): PvgDocument {
  return JSON.parse(JSON.stringify(doc)) as PvgDocument;
}

// Least-squares fit of a uniform cubic B-spline to a pointer stroke,
// matching the engine's evaluation convention: open splines repeat their
// end control points twice (so the curve interpolates the stroke ends),
// closed splines are periodic.

import type { Point, Spline } from "./types.js";

const B = [
  [-1 / 6, 3 / 6, -3 / 6, 1 / 6],
  [3 / 6, -6 / 6, 3 / 6, 0],
  [-3 / 6, 0, 3 / 6, 0],
  [1 / 6, 4 / 6, 1 / 6, 0],
];

function basisWeights(u: number): [number, number, number, number] {
  const u2 = u * u;
  const u3 = u2 * u;
  const out: [number, number, number, number] = [0, 0, 0, 0];
  for (let k = 0; k < 4; k++) {
    out[k] = B[0][k] * u3 + B[1][k] * u2 + B[2][k] * u + B[3][k];
  }
  return out;
}

function chordParams(stroke: Point[]): number[] {
  const t = [0];
  let total = 0;
  for (let i = 1; i < stroke.length; i++) {
    total += Math.hypot(stroke[i][0] - stroke[i - 1][0], stroke[i][1] - stroke[i - 1][1]);
    t.push(total);
  }
  return t.map((v) => (total > 0 ? v / total : 0));
}

/** Row of control-point weights at parameter t for m controls. */
export function basisRow(t: number, m: number, closed: boolean): number[] {
  const row = new Array<number>(m).fill(0);
  const spans = closed ? m : m + 1;
  const u = Math.min(Math.max(t, 0), 1) * spans;
  const span = Math.min(Math.floor(u), spans - 1);
  const w = basisWeights(u - span);
  for (let k = 0; k < 4; k++) {
    let idx: number;
    if (closed) {
      idx = (span + k) % m;
    } else {
      // padded controls [P0, P0, P0..Pm-1, Pm-1, Pm-1]
      idx = Math.min(Math.max(span + k - 2, 0), m - 1);
    }
    row[idx] += w[k];
  }
  return row;
}

function solveDense(a: number[][], b: number[][]): number[][] {
  // Gaussian elimination with partial pivoting; a is square and small
  const n = a.length;
  const m = b[0].length;
  const aug = a.map((row, i) => [...row, ...b[i]]);
  for (let col = 0; col < n; col++) {
    let piv = col;
    for (let r = col + 1; r < n; r++) {
      if (Math.abs(aug[r][col]) > Math.abs(aug[piv][col])) piv = r;
    }
    [aug[col], aug[piv]] = [aug[piv], aug[col]];
    const d = aug[col][col];
    if (Math.abs(d) < 1e-12) continue;
    for (let r = 0; r < n; r++) {
      if (r === col) continue;
      const f = aug[r][col] / d;
      if (f === 0) continue;
      for (let c = col; c < n + m; c++) aug[r][c] -= f * aug[col][c];
    }
  }
  return aug.map((row, i) => {
    const d = row[i] || 1;
    return row.slice(n).map((v) => v / d);
  });
}

export const MIN_STROKE_SAMPLES = 4;

/** One control point per 20 px of stroke, at least the cubic minimum. */
export function controlBudget(strokeLength: number): number {
  return Math.max(4, Math.floor(strokeLength / 20));
}

/**
 * Fit a spline with max(4, length/20) control points.
 * Returns null for strokes shorter than MIN_STROKE_SAMPLES samples.
 */
export function fitSpline(stroke: Point[], closed: boolean): Spline | null {
  if (stroke.length < MIN_STROKE_SAMPLES) {
    return null;
  }
  let length = 0;
  for (let i = 1; i < stroke.length; i++) {
    length += Math.hypot(
      stroke[i][0] - stroke[i - 1][0],
      stroke[i][1] - stroke[i - 1][1],
    );
  }
  const m = Math.min(controlBudget(length), stroke.length);
  const params = chordParams(stroke);
  // normal equations A^T A x = A^T y
  const ata: number[][] = Array.from({ length: m }, () => new Array(m).fill(0));
  const aty: number[][] = Array.from({ length: m }, () => [0, 0]);
  for (let s = 0; s < stroke.length; s++) {
    const row = basisRow(params[s], m, closed);
    for (let i = 0; i < m; i++) {
      if (row[i] === 0) continue;
      for (let j = 0; j < m; j++) {
        if (row[j] !== 0) ata[i][j] += row[i] * row[j];
      }
      aty[i][0] += row[i] * stroke[s][0];
      aty[i][1] += row[i] * stroke[s][1];
    }
  }
  // light Tikhonov term keeps sparse strokes well posed
  for (let i = 0; i < m; i++) ata[i][i] += 1e-9;
  const solved = solveDense(ata, aty);
  const control = solved.map((p) => [p[0], p[1]] as Point);
  if (!closed) {
    control[0] = [...stroke[0]];
    control[m - 1] = [...stroke[stroke.length - 1]];
  }
  return { closed, control_points: control };
}

/** Evaluate the fitted spline (engine convention) for overlays/tests. */
export function evaluateSpline(spline: Spline, t: number): Point {
  const m = spline.control_points.length;
  const row = basisRow(t, m, spline.closed);
  let x = 0;
  let y = 0;
  for (let i = 0; i < m; i++) {
    x += row[i] * spline.control_points[i][0];
    y += row[i] * spline.control_points[i][1];
  }
  return [x, y];
}

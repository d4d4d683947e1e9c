// Slider bindings: Laplacian and halo values live on a [-200, 200] scale
// (0-255 color units per pixel^2); the document stores value/255.

import type { PrimitiveRef, PvgDocument, RGB } from "./types.js";
import { cloneDocument } from "./types.js";

export type ChannelMode = "uniform_tone" | "per_channel";
export type SliderField = "laplacian" | "delta_outer" | "delta_inner";

export interface SliderBinding {
  target: PrimitiveRef;
  field: SliderField;
  channelMode: ChannelMode;
  channel: 0 | 1 | 2; // used only in per_channel mode
}

export const SLIDER_MIN = -200;
export const SLIDER_MAX = 200;

export function clampSlider(value: number): number {
  return Math.min(Math.max(value, SLIDER_MIN), SLIDER_MAX);
}

function applyChannels(current: RGB, value255: number, binding: SliderBinding): RGB {
  const v = clampSlider(value255) / 255;
  if (binding.channelMode === "uniform_tone") {
    return [v, v, v];
  }
  const next: RGB = [...current];
  next[binding.channel] = v;
  return next;
}

/** Pure update: returns a new document with the slider value applied. */
export function applySlider(
  doc: PvgDocument,
  binding: SliderBinding,
  value255: number,
): PvgDocument {
  const out = cloneDocument(doc);
  const { kind, index } = binding.target;
  if (kind === "pc") {
    // a PC slider writes f_plus only; the other side is implied
    const pc = out.poisson_curves[index];
    if (!pc) throw new Error(`no poisson curve ${index}`);
    pc.laplacian_stops = pc.laplacian_stops.map((s) => ({
      t: s.t,
      f_plus: applyChannels(s.f_plus, value255, binding),
    }));
    return out;
  }
  if (kind === "pr") {
    const pr = out.poisson_regions[index];
    if (!pr) throw new Error(`no poisson region ${index}`);
    if (binding.field === "delta_outer") {
      pr.delta_outer = applyChannels(pr.delta_outer, value255, binding);
    } else if (binding.field === "delta_inner") {
      pr.delta_inner = applyChannels(pr.delta_inner, value255, binding);
    } else {
      pr.f_outer = applyChannels(pr.f_outer, value255, binding);
    }
    return out;
  }
  throw new Error("sliders bind to Poisson curves and regions only");
}

/** Current slider position for a binding, on the 0-255 scale. */
export function readSlider(doc: PvgDocument, binding: SliderBinding): number {
  const { kind, index } = binding.target;
  let triple: RGB;
  if (kind === "pc") {
    triple = doc.poisson_curves[index].laplacian_stops[0].f_plus;
  } else if (binding.field === "delta_outer") {
    triple = doc.poisson_regions[index].delta_outer;
  } else if (binding.field === "delta_inner") {
    triple = doc.poisson_regions[index].delta_inner;
  } else {
    triple = doc.poisson_regions[index].f_outer;
  }
  const ch = binding.channelMode === "uniform_tone" ? 0 : binding.channel;
  return triple[ch] * 255;
}

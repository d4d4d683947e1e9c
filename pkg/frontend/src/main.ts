// Editor wiring: canvas, toolbar, sliders, image element, render loop.
//
// Start the engine first (`pvg-serve --port 8765`), then open index.html.

import { ApiClient } from "./api.js";
import { debounce } from "./debounce.js";
import { drawOverlays } from "./overlays.js";
import { RenderLoop } from "./render-loop.js";
import { applySlider, clampSlider, SliderBinding } from "./sliders.js";
import { DEFAULT_STYLE, sketchPrimitive } from "./tools.js";
import type { EditorTool, Point, PvgDocument, ToolMode } from "./types.js";
import { emptyDocument } from "./types.js";
import { validateDocument } from "./validate.js";
import { fullViewport, isFull, pan, Viewport, zoomAbout } from "./viewport.js";

const SERVICE = (window as any).PVG_SERVICE_URL ?? "http://127.0.0.1:8765";
const SESSION = "editor";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function toast(message: string): void {
  const box = el<HTMLDivElement>("toast");
  box.textContent = message;
  box.classList.add("visible");
  setTimeout(() => box.classList.remove("visible"), 2200);
}

async function boot(): Promise<void> {
  const api = new ApiClient(SERVICE, SESSION);
  const image = el<HTMLImageElement>("render");
  const overlay = el<HTMLCanvasElement>("overlay");
  const diagBox = el<HTMLUListElement>("diagnostics");
  const ctx = overlay.getContext("2d")!;

  let doc: PvgDocument = (await api.getDocument().catch(() => null))
    ?? emptyDocument(256, 256);
  let view: Viewport = fullViewport(doc.canvas.width, doc.canvas.height);
  const tool: EditorTool = { mode: "draw_dc", active: null };

  const loop = new RenderLoop(api, () => [overlay.width, overlay.height], {
    onImage(result) {
      image.src = URL.createObjectURL(result.blob);
    },
    onDiagnostics(diags) {
      diagBox.innerHTML = "";
      for (const d of diags) {
        const li = document.createElement("li");
        li.className = d.severity;
        li.textContent = `[${d.code}] ${d.message}`;
        diagBox.appendChild(li);
      }
    },
    onError(err) {
      toast(String(err));
    },
  });

  const redrawOverlay = () => {
    ctx.clearRect(0, 0, overlay.width, overlay.height);
    drawOverlays(ctx, doc, view, overlay.width, overlay.height);
  };

  const requestViewportRender = debounce(async () => {
    if (isFull(view, doc.canvas.width, doc.canvas.height)) {
      loop.submit(doc);
      return;
    }
    try {
      const res = await api.render(overlay.width, overlay.height,
                                   [view.x, view.y, view.w, view.h]);
      image.src = URL.createObjectURL(res.blob);
    } catch (err) {
      toast(String(err));
    }
  }, 100);

  const commit = (next: PvgDocument) => {
    const problems = validateDocument(next);
    if (problems.length) {
      toast(problems[0].message);
      return;
    }
    doc = next;
    redrawOverlay();
    loop.submit(doc);
  };

  // toolbar
  for (const mode of ["draw_dc", "draw_pc", "draw_pr", "select"] as ToolMode[]) {
    el<HTMLButtonElement>(`tool-${mode}`).addEventListener("click", () => {
      tool.mode = mode;
      document.querySelectorAll(".tool").forEach((b) => b.classList.remove("on"));
      el(`tool-${mode}`).classList.add("on");
    });
  }

  // sketching
  let stroke: Point[] | null = null;
  const toDoc = (ev: PointerEvent): Point => {
    const r = overlay.getBoundingClientRect();
    return [
      view.x + ((ev.clientX - r.left) / r.width) * view.w,
      view.y + ((ev.clientY - r.top) / r.height) * view.h,
    ];
  };
  overlay.addEventListener("pointerdown", (ev) => {
    if (tool.mode === "select") return;
    stroke = [toDoc(ev)];
    overlay.setPointerCapture(ev.pointerId);
  });
  overlay.addEventListener("pointermove", (ev) => {
    if (!stroke) return;
    stroke.push(toDoc(ev));
    redrawOverlay();
    ctx.save();
    ctx.strokeStyle = "rgba(80, 80, 220, 0.6)";
    ctx.beginPath();
    stroke.forEach(([x, y], i) => {
      const px = ((x - view.x) / view.w) * overlay.width;
      const py = ((y - view.y) / view.h) * overlay.height;
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    ctx.restore();
  });
  overlay.addEventListener("pointerup", () => {
    if (!stroke) return;
    const result = sketchPrimitive(doc, tool, stroke, DEFAULT_STYLE);
    stroke = null;
    if (!result.ok) {
      toast(result.reason);
      redrawOverlay();
      return;
    }
    if (result.autoClosed && !window.confirm("Close the region boundary?")) {
      redrawOverlay();
      return;
    }
    tool.active = { kind: result.kind, index: result.index };
    commit(result.doc);
  });

  // sliders: Laplacian + halo increments for the active primitive
  const bindSlider = (id: string, field: SliderBinding["field"]) => {
    const input = el<HTMLInputElement>(id);
    input.addEventListener("input", () => {
      if (!tool.active || tool.active.kind === "dc") {
        return;
      }
      const binding: SliderBinding = {
        target: tool.active,
        field,
        channelMode: "uniform_tone",
        channel: 0,
      };
      try {
        commit(applySlider(doc, binding, clampSlider(Number(input.value))));
      } catch (err) {
        toast(String(err));
      }
    });
  };
  bindSlider("slider-laplacian", "laplacian");
  bindSlider("slider-delta-outer", "delta_outer");
  bindSlider("slider-delta-inner", "delta_inner");

  // zoom and pan
  overlay.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const [ax, ay] = toDoc(ev as unknown as PointerEvent);
    const factor = ev.deltaY < 0 ? 1.25 : 0.8;
    view = zoomAbout(view, ax, ay, factor, doc.canvas.width, doc.canvas.height);
    redrawOverlay();
    requestViewportRender();
  });
  window.addEventListener("keydown", (ev) => {
    const step = view.w * 0.1;
    const moves: Record<string, [number, number]> = {
      ArrowLeft: [-step, 0], ArrowRight: [step, 0],
      ArrowUp: [0, -step], ArrowDown: [0, step],
    };
    if (ev.key in moves) {
      view = pan(view, ...moves[ev.key], doc.canvas.width, doc.canvas.height);
      redrawOverlay();
      requestViewportRender();
    }
    if (ev.key === "0") {
      view = fullViewport(doc.canvas.width, doc.canvas.height);
      redrawOverlay();
      requestViewportRender();
    }
  });

  redrawOverlay();
  loop.submit(doc);
}

boot().catch((err) => {
  console.error(err);
  const box = document.getElementById("toast");
  if (box) {
    box.textContent = `cannot reach the render service: ${err}`;
    box.classList.add("visible");
  }
});

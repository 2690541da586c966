// Application shell: session lifecycle, pointer handling, and rendering.
// Everything observable by tests (transform, selection, queue idling,
// overlay SVG) is exposed on the returned App object.

import { ApiClient, ApiError, type Correction, type SessionOut } from "./api.js";
import { renderGrowthPanel } from "./growthPanel.js";
import { hitTest, overlayPoints, renderOverlay, type OverlayPoint } from "./overlay.js";
import { SerialQueue } from "./queue.js";
import {
  canvasToImage,
  fitImage,
  imageToCanvas,
  panBy,
  zoomAt,
  type Point,
  type Transform,
} from "./transform.js";

export interface AppOptions {
  canvasWidth?: number;
  canvasHeight?: number;
}

export interface PatientMeta {
  age?: number;
  sex?: "F" | "M";
  patient_id?: string;
}

interface QueuedCorrection extends Correction {
  session_id: string;
}

export interface App {
  readonly root: HTMLElement;
  readonly overlay: SVGSVGElement;
  readonly growthSvg: SVGSVGElement;
  readonly statusLine: HTMLElement;
  openImage(base64: string, meta?: PatientMeta): Promise<SessionOut>;
  session(): SessionOut | null;
  points(): OverlayPoint[];
  selected(): number | null;
  select(index: number | null): void;
  correct(index: number, imagePoint: Point): void;
  getTransform(): Transform;
  zoom(factor: number, anchor?: Point): void;
  fit(): void;
  idle(): Promise<void>;
  queueDepth(): number;
}

const CLICK_SLOP_PX = 3;

export function initApp(root: HTMLElement, api: ApiClient, options: AppOptions = {}): App {
  const doc = root.ownerDocument;
  const canvasW = options.canvasWidth ?? root.clientWidth;
  const canvasH = options.canvasHeight ?? root.clientHeight;
  const width = canvasW > 0 ? canvasW : 900;
  const height = canvasH > 0 ? canvasH : 640;

  root.innerHTML = `
    <div class="toolbar">
      <label class="upload-label">Image <input type="file" accept="image/*" class="upload"></label>
      <button class="zoom-in" title="zoom in">+</button>
      <button class="zoom-out" title="zoom out">-</button>
      <button class="zoom-fit" title="fit image">fit</button>
      <span class="health">connecting...</span>
    </div>
    <div class="workspace">
      <div class="viewport" style="width:${width}px;height:${height}px">
        <img class="backdrop" alt="">
        <svg class="overlay" width="${width}" height="${height}"></svg>
      </div>
      <div class="sidebar">
        <div class="status">upload an image to start a session</div>
        <svg class="growth"></svg>
        <dl class="cvm"></dl>
      </div>
    </div>`;

  const viewport = root.querySelector<HTMLDivElement>(".viewport")!;
  const backdrop = root.querySelector<HTMLImageElement>(".backdrop")!;
  const overlay = root.querySelector<SVGSVGElement>(".overlay")!;
  const growthSvg = root.querySelector<SVGSVGElement>(".growth")!;
  const cvmList = root.querySelector<HTMLDListElement>(".cvm")!;
  const statusLine = root.querySelector<HTMLDivElement>(".status")!;
  const healthSpan = root.querySelector<HTMLSpanElement>(".health")!;

  let transform: Transform = { scale: 1, offsetX: 0, offsetY: 0 };
  let current: SessionOut | null = null;
  let currentPoints: OverlayPoint[] = [];
  let selectedIndex: number | null = null;
  let patientAge: number | null = null;

  const queue = new SerialQueue<QueuedCorrection>(sendCorrection, (err, payload) => {
    const why = err instanceof ApiError ? err.message : String(err);
    setStatus(`correction for #${payload.keypoint_index} failed (${why})`, payload);
  });

  function setStatus(text: string, retry?: QueuedCorrection): void {
    statusLine.textContent = text;
    if (retry) {
      const button = doc.createElement("button");
      button.className = "retry";
      button.textContent = "retry";
      button.addEventListener("click", () => queue.push(retry), { once: true });
      statusLine.append(" ", button);
    }
  }

  function render(): void {
    backdrop.style.position = "absolute";
    backdrop.style.left = `${transform.offsetX}px`;
    backdrop.style.top = `${transform.offsetY}px`;
    if (current) {
      backdrop.style.width = `${current.width * transform.scale}px`;
      backdrop.style.height = `${current.height * transform.scale}px`;
    }
    renderOverlay(overlay, currentPoints, transform, selectedIndex);
  }

  function applySession(session: SessionOut): void {
    current = session;
    currentPoints = overlayPoints(session);
    render();
    const round = session.rounds[session.rounds.length - 1]?.round_index ?? 0;
    setStatus(`session ${session.session_id.slice(0, 8)} | round ${round}`);
  }

  async function refreshPanels(): Promise<void> {
    if (!current || current.keypoint_names.length !== 13) return;
    try {
      const cvm = await api.cvm(current.session_id);
      const sex = current.sex === "M" ? "M" : "F";
      const curve = await api.growthCurve(sex, cvm.stage_feature);
      renderGrowthPanel(growthSvg, curve, cvm, patientAge);
      cvmList.innerHTML = "";
      for (const [name, value] of Object.entries(cvm.features)) {
        const dt = doc.createElement("dt");
        dt.textContent = name;
        const dd = doc.createElement("dd");
        dd.textContent = value.toFixed(4);
        cvmList.append(dt, dd);
      }
      if (cvm.stage) {
        const dt = doc.createElement("dt");
        dt.textContent = "growth stage";
        const dd = doc.createElement("dd");
        dd.textContent = cvm.stage;
        cvmList.append(dt, dd);
      }
    } catch (err) {
      // measurement panel is best-effort; the annotation loop still works
      if (!(err instanceof ApiError)) throw err;
    }
  }

  async function sendCorrection(payload: QueuedCorrection): Promise<void> {
    if (!current || current.session_id !== payload.session_id) return; // stale
    const session = await api.submitCorrection(payload.session_id, {
      keypoint_index: payload.keypoint_index,
      x: payload.x,
      y: payload.y,
    });
    applySession(session);
    await refreshPanels();
  }

  async function openImage(base64: string, meta: PatientMeta = {}): Promise<SessionOut> {
    setStatus("running round-0 prediction...");
    const session = await api.createSession({ image_base64: base64, ...meta });
    patientAge = meta.age ?? null;
    selectedIndex = null;
    backdrop.src = `data:image/png;base64,${base64}`;
    transform = fitImage(session.width, session.height, width, height);
    applySession(session);
    await refreshPanels();
    return session;
  }

  function correct(index: number, imagePoint: Point): void {
    if (!current) return;
    queue.push({
      session_id: current.session_id,
      keypoint_index: index,
      x: imagePoint.x,
      y: imagePoint.y,
    });
  }

  function canvasPoint(event: MouseEvent): Point {
    const rect = viewport.getBoundingClientRect();
    return { x: event.clientX - rect.left, y: event.clientY - rect.top };
  }

  function handleClick(p: Point): void {
    if (!current) return;
    const hit = hitTest(currentPoints, transform, p);
    if (hit !== null) {
      selectedIndex = hit === selectedIndex ? null : hit;
      render();
      setStatus(
        selectedIndex === null
          ? "selection cleared"
          : `selected #${selectedIndex} (${currentPoints[selectedIndex]?.name}); click the correct location`,
      );
      return;
    }
    if (selectedIndex !== null) {
      const target = canvasToImage(transform, p);
      const index = selectedIndex;
      selectedIndex = null;
      correct(index, target);
    }
  }

  let down: { start: Point; last: Point; moved: boolean } | null = null;
  overlay.addEventListener("mousedown", (event) => {
    const p = canvasPoint(event);
    down = { start: p, last: p, moved: false };
  });
  overlay.addEventListener("mousemove", (event) => {
    if (!down) return;
    const p = canvasPoint(event);
    if (Math.hypot(p.x - down.start.x, p.y - down.start.y) > CLICK_SLOP_PX) down.moved = true;
    if (down.moved) {
      transform = panBy(transform, p.x - down.last.x, p.y - down.last.y);
      render();
    }
    down.last = p;
  });
  overlay.addEventListener("mouseup", (event) => {
    const wasDrag = down?.moved ?? false;
    down = null;
    if (!wasDrag) handleClick(canvasPoint(event));
  });
  overlay.addEventListener("wheel", (event) => {
    event.preventDefault();
    transform = zoomAt(transform, event.deltaY < 0 ? 1.25 : 0.8, canvasPoint(event));
    render();
  });

  root.querySelector<HTMLButtonElement>(".zoom-in")!.addEventListener("click", () => {
    transform = zoomAt(transform, 1.25, { x: width / 2, y: height / 2 });
    render();
  });
  root.querySelector<HTMLButtonElement>(".zoom-out")!.addEventListener("click", () => {
    transform = zoomAt(transform, 0.8, { x: width / 2, y: height / 2 });
    render();
  });
  root.querySelector<HTMLButtonElement>(".zoom-fit")!.addEventListener("click", () => {
    if (current) {
      transform = fitImage(current.width, current.height, width, height);
      render();
    }
  });

  const upload = root.querySelector<HTMLInputElement>(".upload")!;
  upload.addEventListener("change", () => {
    const file = upload.files?.[0];
    if (!file) return;
    const reader = new FileReader();
    reader.onload = () => {
      const url = String(reader.result);
      const base64 = url.slice(url.indexOf(",") + 1);
      void openImage(base64).catch((err) => setStatus(`upload failed: ${err}`));
    };
    reader.readAsDataURL(file);
  });

  void api
    .health()
    .then((h) => {
      healthSpan.textContent = `${h.model_variant} | ${h.num_keypoints} keypoints | ${h.sessions} sessions`;
    })
    .catch(() => {
      healthSpan.textContent = "service unreachable";
      setStatus("cannot reach the annotation service");
    });

  return {
    root,
    overlay,
    growthSvg,
    statusLine,
    openImage,
    session: () => current,
    points: () => currentPoints,
    selected: () => selectedIndex,
    select: (index) => {
      selectedIndex = index;
      render();
    },
    correct,
    getTransform: () => ({ ...transform }),
    zoom: (factor, anchor) => {
      transform = zoomAt(transform, factor, anchor ?? { x: width / 2, y: height / 2 });
      render();
    },
    fit: () => {
      if (current) transform = fitImage(current.width, current.height, width, height);
      render();
    },
    idle: () => queue.idle(),
    queueDepth: () => queue.depth,
  };
}

// kept for callers that want the same transform math the app uses
export { canvasToImage, imageToCanvas };

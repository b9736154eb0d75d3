/**
 * Compare page: ranked pair list, four visualization modes, note buttons,
 * the distance graph with the current-pair marker, and comments.
 */

import { ApiClient, CurvePayload, PairEntry } from "./api.js";
import { showBanner } from "./banner.js";
import { captureControlImage, triggerDownload, zoomPercent } from "./capture.js";
import { bindKeys } from "./keyboard.js";
import {
  crossSegments,
  drawMarkerSegments,
  horizontalSegment,
  NormalizedPoint,
  renderFade,
  renderLoupe,
  renderOverlay,
  segmentsToPane,
  toNormalized,
} from "./modes.js";
import { colorForNote, NOTE_BUTTONS } from "./notes.js";
import { CompareState, Mode, PAGE_SIZE, SideBySideSubmode } from "./state.js";

const MODES: { id: Mode; label: string }[] = [
  { id: "overlay", label: "Overlay" },
  { id: "side-by-side", label: "Side by side" },
  { id: "loupe", label: "Loupe" },
  { id: "fade", label: "Fade" },
];

const SUBMODES: { id: SideBySideSubmode; label: string }[] = [
  { id: "cross", label: "Cross" },
  { id: "horizontal", label: "Horizontal" },
  { id: "two-points", label: "Two points" },
];

export function renderCompare(root: HTMLElement, api: ApiClient, datasetId: string): () => void {
  root.innerHTML = `
    <div class="compare">
      <aside class="pair-panel">
        <div class="toolbar">
          <a href="#/">&larr; Dashboard</a>
          <button id="btn-shortcuts">Shortcuts</button>
          <button id="btn-save">Save...</button>
          <button id="btn-load-more">Load more pairs</button>
        </div>
        <input id="pair-search" type="search" placeholder="Search pairs by file name" />
        <ol id="pair-list" class="pair-list"></ol>
      </aside>
      <section class="view-panel">
        <header>
          <span id="dataset-name" class="dataset-name"></span>
          <span id="pair-number"></span>
          <span id="pair-names" class="pair-names"></span>
          <button id="btn-capture" title="Download a control image (F2)">Control image</button>
        </header>
        <div id="canvas-zone" class="canvas-zone">
          <canvas id="pane-a" width="440" height="440"></canvas>
          <canvas id="pane-b" width="440" height="440" class="hidden"></canvas>
        </div>
        <div class="mode-row">
          <span id="mode-picker"></span>
          <span id="submode-picker" class="hidden"></span>
          <input id="overlay-slider" type="range" min="0" max="100" value="50" />
          <input id="fade-slider" type="range" min="0" max="100" value="50" class="hidden" />
          <button id="btn-clear-segments" class="hidden">Clear segments</button>
        </div>
        <div id="note-buttons" class="note-row"></div>
        <canvas id="distance-graph" width="860" height="130"></canvas>
        <div class="nav-row">
          <button id="btn-previous">&larr; Previous</button>
          <button id="btn-next">Next &rarr;</button>
        </div>
        <textarea id="comment-box" placeholder="Comment on this pair"></textarea>
      </section>
    </div>`;

  const state = new CompareState();
  let datasetName = "";
  let curve: CurvePayload | null = null;
  let cursor: NormalizedPoint | null = null;
  const imageCache = new Map<string, HTMLImageElement>();

  const pairList = root.querySelector<HTMLOListElement>("#pair-list")!;
  const paneA = root.querySelector<HTMLCanvasElement>("#pane-a")!;
  const paneB = root.querySelector<HTMLCanvasElement>("#pane-b")!;
  const graph = root.querySelector<HTMLCanvasElement>("#distance-graph")!;
  const commentBox = root.querySelector<HTMLTextAreaElement>("#comment-box")!;
  const captureButton = root.querySelector<HTMLButtonElement>("#btn-capture")!;
  const overlaySlider = root.querySelector<HTMLInputElement>("#overlay-slider")!;
  const fadeSlider = root.querySelector<HTMLInputElement>("#fade-slider")!;
  const clearSegmentsButton = root.querySelector<HTMLButtonElement>("#btn-clear-segments")!;
  const searchBox = root.querySelector<HTMLInputElement>("#pair-search")!;

  function pane(): { width: number; height: number } {
    return { width: paneA.width, height: paneA.height };
  }

  async function loadImage(name: string): Promise<HTMLImageElement> {
    const cached = imageCache.get(name);
    if (cached) return cached;
    const blob = await api.fetchImage(datasetId, name);
    const img = new Image();
    img.src = URL.createObjectURL(blob);
    await new Promise<void>((resolve, reject) => {
      img.onload = () => resolve();
      img.onerror = () => reject(new Error(`image ${name} failed to load`));
    });
    imageCache.set(name, img);
    return img;
  }

  function rowFor(index: number, entry: PairEntry): HTMLLIElement {
    const li = document.createElement("li");
    li.dataset.index = String(index);
    li.innerHTML = `<span class="note-dot"></span><span>${entry.name1} / ${entry.name2}</span><span class="distance">${entry.distance.toFixed(4)}</span>`;
    applyRowColor(li, entry);
    li.addEventListener("click", () => {
      if (!guardComment()) return;
      state.goTo(index);
      syncPair();
    });
    return li;
  }

  function applyRowColor(li: HTMLLIElement, entry: PairEntry): void {
    const dot = li.querySelector<HTMLElement>(".note-dot")!;
    dot.style.backgroundColor = colorForNote(entry.note);
    dot.title = entry.note;
    li.dataset.note = entry.note;
  }

  function refreshRowColors(): void {
    pairList.querySelectorAll("li").forEach((li) => {
      const index = Number(li.dataset.index);
      const entry = state.pairs[index];
      if (entry) applyRowColor(li, entry);
    });
  }

  async function loadNextPage(): Promise<void> {
    try {
      const page = await api.pairs(datasetId, state.nextOffset(), PAGE_SIZE);
      const start = state.pairs.length;
      state.addPage(page.entries, page.total);
      page.entries.forEach((entry, i) => pairList.appendChild(rowFor(start + i, entry)));
      root.querySelector<HTMLButtonElement>("#btn-load-more")!.disabled = state.allLoaded;
    } catch (err) {
      showBanner(`Could not load pairs: ${(err as Error).message}`);
    }
  }

  function guardComment(): boolean {
    if (!state.commentDirty) return true;
    return window.confirm("The comment was not saved. Leave this pair anyway?");
  }

  async function syncPair(): Promise<void> {
    const entry = state.currentPair();
    if (!entry) return;
    root.querySelector("#pair-number")!.textContent = `pair #${state.currentRank()}`;
    root.querySelector("#pair-names")!.textContent = `${entry.name1} / ${entry.name2}`;
    commentBox.value = state.commentDraft;
    pairList.querySelectorAll("li").forEach((li) => {
      li.classList.toggle("current", Number(li.dataset.index) === state.currentIndex);
    });
    drawGraph();
    await drawPanes();
  }

  async function drawPanes(): Promise<void> {
    const entry = state.currentPair();
    if (!entry) return;
    let first: HTMLImageElement;
    let second: HTMLImageElement;
    try {
      [first, second] = await Promise.all([loadImage(entry.name1), loadImage(entry.name2)]);
    } catch (err) {
      showBanner((err as Error).message);
      return;
    }
    const geometry = pane();
    const displayScale = geometry.width / first.width;
    const ctxA = paneA.getContext("2d");
    if (!ctxA) return;

    const sideBySide = state.mode === "side-by-side";
    paneB.classList.toggle("hidden", !sideBySide);
    overlaySlider.classList.toggle("hidden", state.mode !== "overlay");
    fadeSlider.classList.toggle("hidden", state.mode !== "fade");
    root.querySelector("#submode-picker")!.classList.toggle("hidden", !sideBySide);
    clearSegmentsButton.classList.toggle(
      "hidden",
      !(sideBySide && state.submode === "two-points"),
    );
    captureButton.disabled = !state.canCapture();

    if (state.mode === "overlay") {
      renderOverlay(ctxA, first, second, entry.transform, state, geometry, displayScale);
    } else if (state.mode === "loupe") {
      renderLoupe(ctxA, first, second, entry.transform, state, geometry, displayScale, cursor);
    } else if (state.mode === "fade") {
      renderFade(ctxA, first, second, entry.transform, state, geometry, displayScale);
    } else {
      const ctxB = paneB.getContext("2d");
      if (!ctxB) return;
      ctxA.clearRect(0, 0, geometry.width, geometry.height);
      ctxB.clearRect(0, 0, geometry.width, geometry.height);
      ctxA.drawImage(first, 0, 0, geometry.width, geometry.height);
      ctxB.drawImage(second, 0, 0, geometry.width, geometry.height);
      for (const ctx of [ctxA, ctxB]) {
        if (state.submode === "cross" && cursor) {
          drawMarkerSegments(ctx, crossSegments(cursor, geometry));
        } else if (state.submode === "horizontal" && cursor) {
          drawMarkerSegments(ctx, [horizontalSegment(cursor, geometry)]);
        } else if (state.submode === "two-points") {
          drawMarkerSegments(ctx, segmentsToPane(state.segments, geometry));
          if (state.pendingPoint) {
            drawMarkerSegments(ctx, crossSegments(state.pendingPoint, geometry, 6));
          }
        }
      }
    }
  }

  function drawGraph(): void {
    const ctx = graph.getContext("2d");
    if (!ctx || !curve || curve.points.length === 0) return;
    const { width, height } = graph;
    const pad = 8;
    ctx.clearRect(0, 0, width, height);
    const n = curve.points.length;
    const toX = (rank: number) => pad + ((rank - 1) / Math.max(1, n - 1)) * (width - 2 * pad);
    const toY = (d: number) => height - pad - d * (height - 2 * pad);
    ctx.strokeStyle = "#4477aa";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    curve.points.forEach(([rank, distance], i) => {
      if (i === 0) ctx.moveTo(toX(rank), toY(distance));
      else ctx.lineTo(toX(rank), toY(distance));
    });
    ctx.stroke();
    const rank = state.currentRank();
    const point = curve.points[rank - 1];
    if (point) {
      ctx.fillStyle = "#e02020";
      ctx.beginPath();
      ctx.arc(toX(rank), toY(point[1]), 4, 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  async function setNote(note: string): Promise<void> {
    const entry = state.currentPair();
    if (!entry) return;
    try {
      const response = await api.setEvaluation(
        datasetId, entry.name1, entry.name2, note, commentBox.value,
      );
      state.applyEvaluation(
        response.evaluation.name1,
        response.evaluation.name2,
        response.evaluation.note,
        response.evaluation.comment,
        response.summary,
      );
      refreshRowColors();
    } catch (err) {
      showBanner(`Evaluation not saved: ${(err as Error).message}`);
    }
  }

  function capture(): void {
    if (!state.canCapture()) return;
    const entry = state.currentPair();
    if (!entry) return;
    const result = captureControlImage(
      paneA, entry.name1, entry.name2, zoomPercent(window.devicePixelRatio),
    );
    if (!result) {
      showBanner("Control image capture failed.");
      return;
    }
    if (result.zoomWarning) showBanner(result.zoomWarning);
    triggerDownload(document, result);
    void drawPanes();
  }

  // mode picker
  const modePicker = root.querySelector<HTMLElement>("#mode-picker")!;
  for (const mode of MODES) {
    const button = document.createElement("button");
    button.textContent = mode.label;
    button.dataset.mode = mode.id;
    button.addEventListener("click", () => {
      state.setMode(mode.id);
      modePicker.querySelectorAll("button").forEach((b) => b.classList.toggle("active", b === button));
      void drawPanes();
    });
    modePicker.appendChild(button);
  }
  modePicker.querySelector("button")!.classList.add("active");

  const submodePicker = root.querySelector<HTMLElement>("#submode-picker")!;
  for (const submode of SUBMODES) {
    const button = document.createElement("button");
    button.textContent = submode.label;
    button.dataset.submode = submode.id;
    button.addEventListener("click", () => {
      state.submode = submode.id;
      submodePicker.querySelectorAll("button").forEach((b) => b.classList.toggle("active", b === button));
      void drawPanes();
    });
    submodePicker.appendChild(button);
  }
  submodePicker.querySelector("button")!.classList.add("active");

  // note buttons
  const noteRow = root.querySelector<HTMLElement>("#note-buttons")!;
  for (const label of NOTE_BUTTONS) {
    const button = document.createElement("button");
    button.textContent = label;
    button.style.borderColor = colorForNote(label);
    button.addEventListener("click", () => void setNote(label));
    noteRow.appendChild(button);
  }

  // wiring
  root.querySelector("#btn-load-more")!.addEventListener("click", () => void loadNextPage());
  root.querySelector("#btn-previous")!.addEventListener("click", () => {
    if (guardComment() && state.goPrevious()) void syncPair();
  });
  root.querySelector("#btn-next")!.addEventListener("click", () => {
    if (guardComment() && state.goNext()) void syncPair();
  });
  root.querySelector("#btn-save")!.addEventListener("click", () => {
    const entry = state.currentPair();
    if (entry) void setNote(entry.note);
  });
  root.querySelector("#btn-shortcuts")!.addEventListener("click", () => {
    showBanner("Shortcuts: F2 control image, +/- loupe size, arrow keys previous/next pair.");
  });
  captureButton.addEventListener("click", capture);
  clearSegmentsButton.addEventListener("click", () => {
    state.clearSegments();
    void drawPanes();
  });
  commentBox.addEventListener("input", () => state.editComment(commentBox.value));
  overlaySlider.addEventListener("input", () => {
    state.setOverlaySplit(Number(overlaySlider.value) / 100);
    void drawPanes();
  });
  fadeSlider.addEventListener("input", () => {
    state.setFadeAlpha(Number(fadeSlider.value) / 100);
    void drawPanes();
  });
  searchBox.addEventListener("input", () => {
    const needle = searchBox.value.toLowerCase();
    pairList.querySelectorAll("li").forEach((li) => {
      const entry = state.pairs[Number(li.dataset.index)];
      const hit =
        !needle ||
        entry.name1.toLowerCase().includes(needle) ||
        entry.name2.toLowerCase().includes(needle);
      li.classList.toggle("hidden", !hit);
    });
  });

  paneA.addEventListener("mousemove", (event) => {
    const rect = paneA.getBoundingClientRect();
    cursor = toNormalized(event.clientX - rect.left, event.clientY - rect.top, {
      width: rect.width,
      height: rect.height,
    });
    if (state.mode === "loupe" || state.mode === "side-by-side") void drawPanes();
  });
  paneA.addEventListener("click", (event) => {
    if (state.mode !== "side-by-side" || state.submode !== "two-points") return;
    const rect = paneA.getBoundingClientRect();
    const p = toNormalized(event.clientX - rect.left, event.clientY - rect.top, {
      width: rect.width,
      height: rect.height,
    });
    const outcome = state.addTwoPointsClick(p.x, p.y);
    if (outcome === "rejected") showBanner("At most five segments can be drawn.");
    void drawPanes();
  });

  const unbindKeys = bindKeys(document, state, (action) => {
    if (action === "capture") capture();
    else if (action === "loupe-grow" && state.adjustLoupe(1)) void drawPanes();
    else if (action === "loupe-shrink" && state.adjustLoupe(-1)) void drawPanes();
    else if (action === "previous-pair" && guardComment() && state.goPrevious()) void syncPair();
    else if (action === "next-pair" && guardComment() && state.goNext()) void syncPair();
  });

  // initial load: dataset name, first 50 pairs, the distance curve
  void (async () => {
    try {
      const detail = await api.datasetDetail(datasetId);
      datasetName = detail.ticket.name;
      root.querySelector("#dataset-name")!.textContent = datasetName;
      state.summary = detail.summary;
      curve = await api.curve(datasetId);
      await loadNextPage();
      state.goTo(0);
      await syncPair();
    } catch (err) {
      showBanner(`Could not open the dataset: ${(err as Error).message}`);
    }
  })();

  return () => {
    unbindKeys();
    for (const img of imageCache.values()) URL.revokeObjectURL(img.src);
  };
}

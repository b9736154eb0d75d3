/**
 * Cluster view: the 2-D embedding of the distance matrix, colored by
 * provisional cluster. These groupings are work-in-progress aids, so the
 * page always carries a banner saying they must not be relied on yet.
 */

import { ApiClient } from "./api.js";
import { showBanner } from "./banner.js";

const PALETTE = [
  "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee",
  "#aa3377", "#bbbbbb", "#994455", "#6699cc", "#997700",
];

export function renderClusterView(root: HTMLElement, api: ApiClient, datasetId: string): void {
  root.innerHTML = `
    <div class="cluster-view">
      <div class="toolbar">
        <a href="#/">&larr; Dashboard</a>
        <label>threshold
          <input id="cluster-threshold" type="number" min="0.05" max="0.95" step="0.05" value="0.5" />
        </label>
      </div>
      <p id="provisional-banner" class="provisional-banner">
        Cluster results are provisional: the grouping tools are still in
        development and must not be taken into account yet.
      </p>
      <canvas id="scatter" width="720" height="540"></canvas>
      <div id="hover-name" class="muted"></div>
    </div>`;

  const canvas = root.querySelector<HTMLCanvasElement>("#scatter")!;
  const hover = root.querySelector<HTMLElement>("#hover-name")!;
  const thresholdInput = root.querySelector<HTMLInputElement>("#cluster-threshold")!;

  let dots: { x: number; y: number; name: string; color: string }[] = [];

  async function draw(): Promise<void> {
    try {
      const [embedding, clusters] = await Promise.all([
        api.embedding(datasetId),
        api.clusters(datasetId, Number(thresholdInput.value)),
      ]);
      const clusterOf = new Map(clusters.labels.map((l) => [l.name, l.cluster_id]));
      const xs = embedding.points.map((p) => p.x);
      const ys = embedding.points.map((p) => p.y);
      const pad = 30;
      const spanX = Math.max(1e-9, Math.max(...xs) - Math.min(...xs));
      const spanY = Math.max(1e-9, Math.max(...ys) - Math.min(...ys));
      const ctx = canvas.getContext("2d");
      if (!ctx) return;
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      dots = embedding.points.map((p) => {
        const x = pad + ((p.x - Math.min(...xs)) / spanX) * (canvas.width - 2 * pad);
        const y = pad + ((p.y - Math.min(...ys)) / spanY) * (canvas.height - 2 * pad);
        const color = PALETTE[(clusterOf.get(p.name) ?? 0) % PALETTE.length];
        ctx.fillStyle = color;
        ctx.beginPath();
        ctx.arc(x, y, 6, 0, 2 * Math.PI);
        ctx.fill();
        return { x, y, name: p.name, color };
      });
    } catch (err) {
      showBanner(`Cluster view failed: ${(err as Error).message}`);
    }
  }

  canvas.addEventListener("mousemove", (event) => {
    const rect = canvas.getBoundingClientRect();
    const mx = event.clientX - rect.left;
    const my = event.clientY - rect.top;
    const near = dots.find((d) => Math.hypot(d.x - mx, d.y - my) < 8);
    hover.textContent = near ? near.name : "";
  });
  thresholdInput.addEventListener("change", () => void draw());

  void draw();
}

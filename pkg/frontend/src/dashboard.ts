/**
 * Dashboard: the two dataset lists on the left (single type, treasures),
 * the selected dataset's characteristics on the right, and the three
 * actions (Compare, Download results, Cluster View).
 */

import { ApiClient, DatasetListItem } from "./api.js";
import { NOTE_LABELS } from "./notes.js";
import { showBanner } from "./banner.js";

export function renderDashboard(root: HTMLElement, api: ApiClient): void {
  root.innerHTML = `
    <div class="dashboard">
      <section class="dataset-lists">
        <h2>Single type</h2>
        <ul id="single-type-list" class="dataset-list"></ul>
        <h2>Treasures</h2>
        <ul id="treasures-list" class="dataset-list"></ul>
        <form id="upload-form" class="upload-form">
          <input type="text" id="upload-name" placeholder="type name" required />
          <input type="file" id="upload-file" accept=".zip" required />
          <button type="submit" title="Upload a single-type zip">+</button>
        </form>
      </section>
      <section class="characteristics">
        <div id="dataset-actions" class="actions hidden">
          <button id="btn-compare">Compare</button>
          <button id="btn-download">Download results</button>
          <button id="btn-clusters">Cluster View</button>
        </div>
        <div id="dataset-info"><p class="muted">Select a computed dataset.</p></div>
      </section>
    </div>`;

  const singleList = root.querySelector<HTMLUListElement>("#single-type-list")!;
  const treasureList = root.querySelector<HTMLUListElement>("#treasures-list")!;
  const info = root.querySelector<HTMLElement>("#dataset-info")!;
  const actions = root.querySelector<HTMLElement>("#dataset-actions")!;

  let selected: DatasetListItem | null = null;

  function renderList(list: HTMLUListElement, items: DatasetListItem[]): void {
    list.innerHTML = "";
    for (const item of items) {
      const li = document.createElement("li");
      li.textContent = item.computing ? `${item.name} (computing...)` : item.name;
      li.dataset.id = item.id;
      li.classList.toggle("computing", item.computing);
      if (!item.computing) {
        li.addEventListener("click", () => select(item));
      }
      list.appendChild(li);
    }
  }

  async function select(item: DatasetListItem): Promise<void> {
    selected = item;
    try {
      const detail = await api.datasetDetail(item.id);
      const summary = detail.summary;
      if (!summary) {
        info.innerHTML = `<p class="muted">${item.name} is not computed yet.</p>`;
        actions.classList.add("hidden");
        return;
      }
      const rows = NOTE_LABELS.map(
        (label) =>
          `<tr><td>${label}</td><td>${summary.categories[label] ?? 0}</td></tr>`,
      ).join("");
      const warnings = detail.warnings.length
        ? `<p class="warning">${detail.warnings.join("<br>")}</p>`
        : "";
      info.innerHTML = `
        <h2>${item.name}</h2>
        <table class="summary-table">
          <tr><td>Coins</td><td id="summary-coins">${summary.coins}</td></tr>
          <tr><td>Potential links</td><td id="summary-links">${summary.potential_links}</td></tr>
        </table>
        <h3>Category</h3>
        <table class="summary-table" id="category-table">${rows}</table>
        ${warnings}`;
      actions.classList.remove("hidden");
    } catch (err) {
      showBanner(`Could not load dataset: ${(err as Error).message}`);
    }
  }

  async function refresh(): Promise<void> {
    try {
      const lists = await api.listDatasets();
      renderList(singleList, lists.single_type);
      renderList(treasureList, lists.treasures);
    } catch (err) {
      showBanner(`Could not list datasets: ${(err as Error).message}`);
    }
  }

  root.querySelector<HTMLButtonElement>("#btn-compare")!.addEventListener("click", () => {
    if (selected) window.location.hash = `#/compare/${selected.id}`;
  });
  root.querySelector<HTMLButtonElement>("#btn-clusters")!.addEventListener("click", () => {
    if (selected) window.location.hash = `#/clusters/${selected.id}`;
  });
  root.querySelector<HTMLButtonElement>("#btn-download")!.addEventListener("click", async () => {
    if (!selected) return;
    try {
      const { filename, blob } = await api.fetchExport(selected.id);
      const url = URL.createObjectURL(blob);
      const link = document.createElement("a");
      link.href = url;
      link.download = filename;
      document.body.appendChild(link);
      link.click();
      link.remove();
      URL.revokeObjectURL(url);
    } catch (err) {
      showBanner(`Download failed: ${(err as Error).message}`);
    }
  });

  root.querySelector<HTMLFormElement>("#upload-form")!.addEventListener("submit", async (event) => {
    event.preventDefault();
    const name = root.querySelector<HTMLInputElement>("#upload-name")!.value.trim();
    const fileInput = root.querySelector<HTMLInputElement>("#upload-file")!;
    const file = fileInput.files?.[0];
    if (!name || !file) return;
    const form = new FormData();
    form.append("name", name);
    form.append("archive", file);
    try {
      const headers: Record<string, string> = {};
      const token = localStorage.getItem("dielink-token") ?? "";
      if (token) headers["Authorization"] = `Bearer ${token}`;
      const response = await fetch("/api/datasets", { method: "POST", body: form, headers });
      if (!response.ok) {
        const body = await response.json();
        showBanner(`Upload rejected: ${body.message ?? response.status}`);
        return;
      }
      await refresh();
    } catch (err) {
      showBanner(`Upload failed: ${(err as Error).message}`);
    }
  });

  void refresh();
}

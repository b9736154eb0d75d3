/** Hash-routed single-page shell: dashboard, compare, cluster view. */

import { ApiClient } from "./api.js";
import { renderClusterView } from "./clusterview.js";
import { renderCompare } from "./compare.js";
import { renderDashboard } from "./dashboard.js";

const api = new ApiClient("", localStorage.getItem("dielink-token") ?? "");

let teardown: (() => void) | null = null;

function route(): void {
  const root = document.getElementById("app");
  if (!root) return;
  if (teardown) {
    teardown();
    teardown = null;
  }
  const hash = window.location.hash || "#/";
  const compareMatch = /^#\/compare\/(.+)$/.exec(hash);
  const clusterMatch = /^#\/clusters\/(.+)$/.exec(hash);
  if (compareMatch) {
    teardown = renderCompare(root, api, compareMatch[1]);
  } else if (clusterMatch) {
    renderClusterView(root, api, clusterMatch[1]);
  } else {
    renderDashboard(root, api);
  }
}

function wireTokenBox(): void {
  const box = document.getElementById("token-box") as HTMLInputElement | null;
  if (!box) return;
  box.value = localStorage.getItem("dielink-token") ?? "";
  box.addEventListener("change", () => {
    localStorage.setItem("dielink-token", box.value);
    api.setToken(box.value);
    route();
  });
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", () => {
  wireTokenBox();
  route();
});

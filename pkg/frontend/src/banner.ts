/** Dismissible error banners surfaced for API failures. */

export function showBanner(message: string): void {
  const host = document.getElementById("banners");
  if (!host) return;
  const banner = document.createElement("div");
  banner.className = "banner";
  const text = document.createElement("span");
  text.textContent = message;
  const close = document.createElement("button");
  close.textContent = "x";
  close.addEventListener("click", () => banner.remove());
  banner.append(text, close);
  host.appendChild(banner);
}

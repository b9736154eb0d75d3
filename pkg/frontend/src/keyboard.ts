/**
 * Keyboard contract for the compare page:
 *   F2          capture the control image (never in overlay mode)
 *   + / -       loupe radius (only while the loupe is active)
 *   ArrowLeft   previous pair
 *   ArrowRight  next pair
 */

import type { CompareState } from "./state.js";

export type KeyAction =
  | "capture"
  | "loupe-grow"
  | "loupe-shrink"
  | "previous-pair"
  | "next-pair";

export function routeKey(key: string, state: CompareState): KeyAction | null {
  switch (key) {
    case "F2":
      return state.canCapture() ? "capture" : null;
    case "+":
    case "=":
      return state.mode === "loupe" ? "loupe-grow" : null;
    case "-":
      return state.mode === "loupe" ? "loupe-shrink" : null;
    case "ArrowLeft":
      return "previous-pair";
    case "ArrowRight":
      return "next-pair";
    default:
      return null;
  }
}

export function bindKeys(
  target: { addEventListener: Document["addEventListener"]; removeEventListener: Document["removeEventListener"] },
  state: CompareState,
  act: (action: KeyAction) => void,
): () => void {
  const onKeyDown = (event: Event) => {
    const key = (event as KeyboardEvent).key;
    const element = (event as KeyboardEvent).target as HTMLElement | null;
    // typing in the comment box must not steal navigation keys
    if (element && (element.tagName === "TEXTAREA" || element.tagName === "INPUT")) return;
    const action = routeKey(key, state);
    if (action) {
      event.preventDefault();
      act(action);
    }
  };
  target.addEventListener("keydown", onKeyDown);
  return () => target.removeEventListener("keydown", onKeyDown);
}

/**
 * Compare-page state: the ranked pair window, the current pair, and the
 * visualization mode. Pure logic, no DOM.
 */

import type { PairEntry, Summary } from "./api.js";

export type Mode = "overlay" | "side-by-side" | "loupe" | "fade";
export type SideBySideSubmode = "cross" | "horizontal" | "two-points";

export const PAGE_SIZE = 50;

export const LOUPE_MIN = 20;
export const LOUPE_MAX = 200;
export const LOUPE_STEP = 10;

export const MAX_SEGMENTS = 5;

/** One endpoint pair in normalized image coordinates ([0,1] x [0,1]). */
export interface Segment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export class CompareState {
  pairs: PairEntry[] = [];
  total = 0;
  currentIndex = 0;

  mode: Mode = "overlay";
  submode: SideBySideSubmode = "cross";
  loupeRadius = 60;
  fadeAlpha = 0.5;
  overlaySplit = 0.5;
  segments: Segment[] = [];
  pendingPoint: { x: number; y: number } | null = null;

  summary: Summary | null = null;
  commentDraft = "";
  commentDirty = false;

  /** Append one server page; order is the server's ranked order. */
  addPage(entries: PairEntry[], total: number): void {
    this.pairs.push(...entries);
    this.total = total;
  }

  get loadedCount(): number {
    return this.pairs.length;
  }

  get allLoaded(): boolean {
    return this.pairs.length >= this.total;
  }

  nextOffset(): number {
    return this.pairs.length;
  }

  currentPair(): PairEntry | null {
    return this.pairs[this.currentIndex] ?? null;
  }

  /** 1-based global rank of the displayed pair (the red dot's x). */
  currentRank(): number {
    return this.currentIndex + 1;
  }

  canGoNext(): boolean {
    return this.currentIndex + 1 < this.pairs.length;
  }

  canGoPrevious(): boolean {
    return this.currentIndex > 0;
  }

  goNext(): boolean {
    if (!this.canGoNext()) return false;
    this.currentIndex += 1;
    this.resetPairTools();
    return true;
  }

  goPrevious(): boolean {
    if (!this.canGoPrevious()) return false;
    this.currentIndex -= 1;
    this.resetPairTools();
    return true;
  }

  goTo(index: number): boolean {
    if (index < 0 || index >= this.pairs.length) return false;
    this.currentIndex = index;
    this.resetPairTools();
    return true;
  }

  private resetPairTools(): void {
    this.segments = [];
    this.pendingPoint = null;
    this.commentDraft = this.currentPair()?.comment ?? "";
    this.commentDirty = false;
  }

  setMode(mode: Mode): void {
    this.mode = mode;
    this.pendingPoint = null;
  }

  /** Keyboard +/- only act on the loupe while the loupe is active. */
  adjustLoupe(direction: 1 | -1): boolean {
    if (this.mode !== "loupe") return false;
    const next = this.loupeRadius + direction * LOUPE_STEP;
    this.loupeRadius = Math.min(LOUPE_MAX, Math.max(LOUPE_MIN, next));
    return true;
  }

  setFadeAlpha(alpha: number): void {
    this.fadeAlpha = Math.min(1, Math.max(0, alpha));
  }

  setOverlaySplit(fraction: number): void {
    this.overlaySplit = Math.min(1, Math.max(0, fraction));
  }

  /** Two clicks make a segment; at most five segments are kept. */
  addTwoPointsClick(x: number, y: number): "pending" | "added" | "rejected" {
    if (this.pendingPoint === null) {
      if (this.segments.length >= MAX_SEGMENTS) return "rejected";
      this.pendingPoint = { x, y };
      return "pending";
    }
    if (this.segments.length >= MAX_SEGMENTS) {
      this.pendingPoint = null;
      return "rejected";
    }
    this.segments.push({ x1: this.pendingPoint.x, y1: this.pendingPoint.y, x2: x, y2: y });
    this.pendingPoint = null;
    return "added";
  }

  clearSegments(): void {
    this.segments = [];
    this.pendingPoint = null;
  }

  /** Control-image capture exists for every mode except the overlay. */
  canCapture(): boolean {
    return this.mode !== "overlay";
  }

  /** Server responses are authoritative; counts are never bumped locally. */
  applyEvaluation(name1: string, name2: string, note: string, comment: string, summary: Summary): void {
    for (const pair of this.pairs) {
      if (pair.name1 === name1 && pair.name2 === name2) {
        pair.note = note;
        pair.comment = comment;
      }
    }
    this.summary = summary;
    if (this.currentPair()?.name1 === name1 && this.currentPair()?.name2 === name2) {
      this.commentDraft = comment;
      this.commentDirty = false;
    }
  }

  editComment(text: string): void {
    this.commentDraft = text;
    this.commentDirty = text !== (this.currentPair()?.comment ?? "");
  }
}

/** The six review categories and the list palette that recalls them. */

export const NOTE_LABELS = [
  "Not evaluated",
  "Linked",
  "Probably linked",
  "Don't know",
  "Probably not linked",
  "Not linked",
] as const;

export type NoteLabel = (typeof NOTE_LABELS)[number];

/** Buttons shown under the images: everything except the default state. */
export const NOTE_BUTTONS: NoteLabel[] = [
  "Linked",
  "Probably linked",
  "Don't know",
  "Probably not linked",
  "Not linked",
];

/** Documented palette, one distinct color per category. */
export const NOTE_COLORS: Record<NoteLabel, string> = {
  "Not evaluated": "#9e9e9e",
  Linked: "#2e7d32",
  "Probably linked": "#8bc34a",
  "Don't know": "#fbc02d",
  "Probably not linked": "#ef6c00",
  "Not linked": "#c62828",
};

export function colorForNote(note: string): string {
  return NOTE_COLORS[note as NoteLabel] ?? NOTE_COLORS["Not evaluated"];
}

export function isNoteLabel(value: string): value is NoteLabel {
  return (NOTE_LABELS as readonly string[]).includes(value);
}

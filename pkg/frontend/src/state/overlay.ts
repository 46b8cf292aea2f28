// Highlight overlay state: which answer's source spans are painted.
// Invariant: the overlay only ever shows spans belonging to the active
// answer; starting a new stream or activating a different answer replaces
// everything, so stale highlights cannot linger.

import type { HighlightSpan } from "../api/types";

export interface OverlayState {
  activeAnswerId: string | null;
  spans: HighlightSpan[];
}

export const EMPTY_OVERLAY: OverlayState = { activeAnswerId: null, spans: [] };

export type OverlayEvent =
  | { type: "activate"; answerId: string; spans: HighlightSpan[] }
  | { type: "stream_started" }
  | { type: "clear" };

export function overlayReducer(state: OverlayState, event: OverlayEvent): OverlayState {
  switch (event.type) {
    case "activate":
      return { activeAnswerId: event.answerId, spans: event.spans };
    case "stream_started":
    case "clear":
      return EMPTY_OVERLAY;
  }
}

/** Spans to paint on one page, sorted and clamped to the page text length. */
export function spansForPage(
  state: OverlayState,
  page: number,
  charCount: number,
): HighlightSpan[] {
  return state.spans
    .filter((s) => s.page === page && s.start < charCount)
    .map((s) => ({ ...s, end: Math.min(s.end, charCount) }))
    .sort((a, b) => a.start - b.start);
}

/**
 * Split page text into alternating plain/highlight segments for rendering.
 * Overlapping spans merge; each highlighted segment keeps the strongest
 * (max-confidence) method for styling.
 */
export function segmentPage(
  text: string,
  spans: HighlightSpan[],
): { text: string; span: HighlightSpan | null }[] {
  const segments: { text: string; span: HighlightSpan | null }[] = [];
  let cursor = 0;
  for (const span of spans) {
    const start = Math.max(span.start, cursor);
    if (start >= span.end) continue;
    if (start > cursor) segments.push({ text: text.slice(cursor, start), span: null });
    segments.push({ text: text.slice(start, span.end), span });
    cursor = span.end;
  }
  if (cursor < text.length) segments.push({ text: text.slice(cursor), span: null });
  return segments;
}

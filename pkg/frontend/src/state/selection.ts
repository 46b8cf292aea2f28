// Maps DOM selections inside a page's text layer to server character
// offsets. The text layer renders the server page text verbatim (possibly
// split across nodes by highlight marks), so the offset of a DOM position is
// the length of the text between the start of the page root and that point.

import type { ViewerSelection } from "../api/types";

export type SelectionOutcome =
  | { ok: true; selection: ViewerSelection }
  | { ok: false; reason: "empty" | "outside" | "cross_page" };

function pageRootOf(node: Node | null): HTMLElement | null {
  for (let cur = node; cur; cur = cur.parentNode) {
    if (cur instanceof HTMLElement && cur.dataset.pageNumber) return cur;
  }
  return null;
}

/** Character offset of the DOM position (node, offset) within root's text. */
export function charOffsetWithin(root: HTMLElement, node: Node, offset: number): number {
  const range = root.ownerDocument.createRange();
  range.selectNodeContents(root);
  range.setEnd(node, offset);
  return range.toString().length;
}

/**
 * Resolve the current window selection to server page coordinates.
 * Selections crossing page roots are reported, not resolved: the action
 * buttons disable on them.
 */
export function resolveSelection(selection: Selection | null): SelectionOutcome {
  if (!selection || selection.isCollapsed || selection.rangeCount === 0) {
    return { ok: false, reason: "empty" };
  }
  const range = selection.getRangeAt(0);
  const startRoot = pageRootOf(range.startContainer);
  const endRoot = pageRootOf(range.endContainer);
  if (!startRoot || !endRoot) return { ok: false, reason: "outside" };
  if (startRoot !== endRoot) return { ok: false, reason: "cross_page" };

  const start = charOffsetWithin(startRoot, range.startContainer, range.startOffset);
  const end = charOffsetWithin(startRoot, range.endContainer, range.endOffset);
  if (end <= start) return { ok: false, reason: "empty" };
  const pageText = startRoot.textContent ?? "";
  return {
    ok: true,
    selection: {
      page: Number(startRoot.dataset.pageNumber),
      start,
      end,
      text: pageText.slice(start, end),
    },
  };
}

import { describe, expect, it } from "vitest";
import { charOffsetWithin, resolveSelection } from "../src/state/selection";

const PAGE_TEXT =
  "Photosynthesis converts light energy.\nPlants use chlorophyll to capture sunlight.";

function mountPage(page: number, html?: string): HTMLElement {
  const root = document.createElement("div");
  root.className = "page-text";
  root.dataset.pageNumber = String(page);
  if (html !== undefined) root.innerHTML = html;
  else root.textContent = PAGE_TEXT;
  document.body.appendChild(root);
  return root;
}

function selectRange(
  startNode: Node,
  startOffset: number,
  endNode: Node,
  endOffset: number,
): Selection {
  const range = document.createRange();
  range.setStart(startNode, startOffset);
  range.setEnd(endNode, endOffset);
  const selection = window.getSelection()!;
  selection.removeAllRanges();
  selection.addRange(range);
  return selection;
}

describe("selection offsets", () => {
  afterEach(() => {
    document.body.innerHTML = "";
    window.getSelection()?.removeAllRanges();
  });

  it("resolves offsets that reslice to the selected text", () => {
    const root = mountPage(2);
    const textNode = root.firstChild!;
    const start = PAGE_TEXT.indexOf("chlorophyll");
    const end = start + "chlorophyll to capture".length;
    const outcome = resolveSelection(selectRange(textNode, start, textNode, end));
    expect(outcome.ok).toBe(true);
    if (outcome.ok) {
      expect(outcome.selection.page).toBe(2);
      expect(PAGE_TEXT.slice(outcome.selection.start, outcome.selection.end)).toBe(
        "chlorophyll to capture",
      );
      expect(outcome.selection.text).toBe("chlorophyll to capture");
    }
  });

  it("stays correct when highlights split the text into segments", () => {
    // same server text, but rendered as [span][mark][span]
    const cut1 = PAGE_TEXT.indexOf("light");
    const cut2 = cut1 + "light energy".length;
    const root = mountPage(1, "");
    const mk = (tag: string, text: string) => {
      const el = document.createElement(tag);
      el.textContent = text;
      root.appendChild(el);
    };
    mk("span", PAGE_TEXT.slice(0, cut1));
    mk("mark", PAGE_TEXT.slice(cut1, cut2));
    mk("span", PAGE_TEXT.slice(cut2));
    expect(root.textContent).toBe(PAGE_TEXT);

    // select from inside the mark into the trailing span
    const markText = root.childNodes[1].firstChild!;
    const tailText = root.childNodes[2].firstChild!;
    const outcome = resolveSelection(selectRange(markText, 6, tailText, 8));
    expect(outcome.ok).toBe(true);
    if (outcome.ok) {
      const { start, end } = outcome.selection;
      expect(PAGE_TEXT.slice(start, end)).toBe(outcome.selection.text);
      expect(PAGE_TEXT.slice(start, end)).toContain("energy");
    }
  });

  it("reports cross-page selections", () => {
    const a = mountPage(1);
    const b = mountPage(2);
    const outcome = resolveSelection(
      selectRange(a.firstChild!, 0, b.firstChild!, 5),
    );
    expect(outcome).toEqual({ ok: false, reason: "cross_page" });
  });

  it("reports collapsed selections as empty", () => {
    const root = mountPage(1);
    const outcome = resolveSelection(selectRange(root.firstChild!, 3, root.firstChild!, 3));
    expect(outcome).toEqual({ ok: false, reason: "empty" });
  });

  it("reports selections outside any page", () => {
    const stray = document.createElement("p");
    stray.textContent = "not part of the reading";
    document.body.appendChild(stray);
    const outcome = resolveSelection(selectRange(stray.firstChild!, 0, stray.firstChild!, 4));
    expect(outcome).toEqual({ ok: false, reason: "outside" });
  });

  it("charOffsetWithin counts across nested elements", () => {
    const root = mountPage(1, "<span>abc</span><mark>def</mark><span>ghi</span>");
    const last = root.childNodes[2].firstChild!;
    expect(charOffsetWithin(root, last, 2)).toBe(8);
  });
});

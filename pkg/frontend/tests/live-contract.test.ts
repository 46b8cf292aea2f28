// @vitest-environment node
//
// Contract test against the real backend: boots the Python server and drives
// the full journey through the TypeScript client, proving both sides agree
// on every wire shape. Requires the backend package to be installed
// (pip install -e ..); set TUTORKIT_SKIP_LIVE=1 to skip.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api/client";
import type { Answer } from "../src/api/types";

const SKIP = process.env.TUTORKIT_SKIP_LIVE === "1";
const PORT = 8917;

let server: ChildProcess | null = null;
let client: ApiClient;
let pdfBytes: Buffer;

function generateFixturePdf(dir: string): Buffer {
  const path = join(dir, "fixture.pdf");
  const script = `
import io
from reportlab.lib.pagesizes import letter
from reportlab.pdfgen import canvas
c = canvas.Canvas(${JSON.stringify(path)}, pagesize=letter, invariant=1)
c.setTitle("Live Contract")
pages = [
    ["Photosynthesis converts light energy into chemical energy inside leaves.",
     "Plants use chlorophyll pigments to capture sunlight for the reaction."],
    ["Cellular respiration releases stored energy from glucose molecules.",
     "Mitochondria act as the powerhouse organelles inside living cells."],
]
for lines in pages:
    t = c.beginText(72, 720)
    for line in lines:
        t.textLine(line)
    c.drawText(t)
    c.showPage()
c.save()
`;
  const result = spawnSync("python3", ["-c", script]);
  if (result.status !== 0) {
    throw new Error(`fixture generation failed: ${result.stderr}`);
  }
  return readFileSync(path);
}

async function waitForServer(base: string): Promise<void> {
  const deadline = Date.now() + 20_000;
  for (;;) {
    try {
      await fetch(`${base}/documents`);
      return;
    } catch {
      if (Date.now() > deadline) throw new Error("backend did not come up");
      if (server?.exitCode !== null) throw new Error("backend exited during startup");
      await new Promise((r) => setTimeout(r, 100));
    }
  }
}

describe.skipIf(SKIP)("live backend contract", () => {
  beforeAll(async () => {
    const workdir = mkdtempSync(join(tmpdir(), "tutorkit-live-"));
    pdfBytes = generateFixturePdf(workdir);
    server = spawn(
      "python3",
      [
        "-m",
        "tutorkit",
        "--port",
        String(PORT),
        "--data-dir",
        join(workdir, "data"),
        "--mock-llm",
        "--seed",
        "11",
        "--log-level",
        "warning",
      ],
      { stdio: "ignore" },
    );
    client = new ApiClient(`http://127.0.0.1:${PORT}`);
    await waitForServer(`http://127.0.0.1:${PORT}`);
  }, 30_000);

  afterAll(() => {
    server?.kill();
  });

  it("runs the full journey over real HTTP", async () => {
    const blob = new Blob([new Uint8Array(pdfBytes)], { type: "application/pdf" });
    const uploaded = await client.uploadDocument(blob, "live.pdf");
    expect(uploaded.pages).toBe(2);
    expect(uploaded.sections.map((s) => s.label)).toEqual(["Page 1", "Page 2"]);

    const page2 = await client.getPage(uploaded.doc_id, 2);
    expect(page2.char_count).toBe(page2.text.length);
    expect(page2.text).toContain("Mitochondria");

    await client.saveProfile("sam", ["sailing"]);
    expect((await client.getProfile("sam")).interests).toEqual(["sailing"]);

    const sessionId = await client.createSession("sam", uploaded.doc_id);
    const deltas: string[] = [];
    let answer: Answer | null = null;
    await client.chat(sessionId, "glucose energy mitochondria", {
      onDelta: (t) => deltas.push(t),
      onAnswer: (a) => {
        answer = a;
      },
      onError: (m) => {
        throw new Error(m);
      },
    });
    expect(answer).not.toBeNull();
    expect(deltas.join("")).toBe(answer!.text);
    expect(answer!.references.length).toBeGreaterThan(0);
    const ref = answer!.references[0];
    expect(ref.spans.length).toBeGreaterThan(0);
    // the highlight span reslices the page to (a prefix of) the verbatim text
    const page = await client.getPage(uploaded.doc_id, ref.spans[0].page);
    const sliced = page.text.slice(ref.spans[0].start, ref.spans[0].end);
    expect(ref.verbatim).toContain(sliced.split("\n")[0]);

    const sel = {
      page: 2,
      start: page2.text.indexOf("Cellular respiration"),
      end: page2.text.indexOf("glucose molecules.") + "glucose molecules.".length,
      text: "",
    };
    sel.text = page2.text.slice(sel.start, sel.end);
    const actionDeltas: string[] = [];
    let actionAnswer: Answer | null = null;
    await client.selectionAction(uploaded.doc_id, "summarize", sel, {
      onDelta: (t) => actionDeltas.push(t),
      onAnswer: (a) => {
        actionAnswer = a;
      },
      onError: (m) => {
        throw new Error(m);
      },
    });
    expect(actionAnswer).not.toBeNull();
    expect(actionDeltas.join("")).toBe(actionAnswer!.text);

    const card = await client.nextQuizCard(uploaded.doc_id, "sam", "Page 1");
    expect(card.box).toBe(1);
    expect("answer_key" in card).toBe(false);
    const graded = await client.answerQuizCard(card.card_id, "sam", "incorrect");
    expect(graded.box).toBe(1);
    expect(graded.answer_key.length).toBeGreaterThan(0);
  }, 30_000);
});

// Thin typed wrappers over the backend HTTP surface.

import { readSse } from "./sse";
import type {
  Answer,
  DocumentManifest,
  PageResponse,
  Profile,
  QuizAnswerResult,
  QuizCardView,
  UploadResult,
  ViewerSelection,
} from "./types";

export interface StreamCallbacks {
  onDelta: (text: string) => void;
  onAnswer: (answer: Answer) => void;
  onError: (message: string) => void;
}

async function expectOk(resp: Response): Promise<Response> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new Error(`${resp.status}: ${detail}`);
  }
  return resp;
}

async function streamAnswer(resp: Response, callbacks: StreamCallbacks): Promise<void> {
  await expectOk(resp);
  let sawTerminal = false;
  await readSse(resp, (event) => {
    if (event.event === "delta") {
      callbacks.onDelta((event.data as { text: string }).text);
    } else if (event.event === "answer") {
      sawTerminal = true;
      callbacks.onAnswer(event.data as Answer);
    } else if (event.event === "error") {
      sawTerminal = true;
      callbacks.onError((event.data as { message: string }).message);
    }
  });
  if (!sawTerminal) callbacks.onError("stream closed before an answer arrived");
}

export class ApiClient {
  constructor(private base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  async uploadDocument(file: File | Blob, name: string): Promise<UploadResult> {
    const form = new FormData();
    form.append("file", file, name);
    const resp = await expectOk(
      await fetch(this.url("/documents"), { method: "POST", body: form }),
    );
    return resp.json();
  }

  async listDocuments(): Promise<DocumentManifest[]> {
    return (await expectOk(await fetch(this.url("/documents")))).json();
  }

  async getDocument(docId: string): Promise<DocumentManifest> {
    return (await expectOk(await fetch(this.url(`/documents/${docId}`)))).json();
  }

  async getPage(docId: string, pageNumber: number): Promise<PageResponse> {
    return (
      await expectOk(await fetch(this.url(`/documents/${docId}/pages/${pageNumber}`)))
    ).json();
  }

  async createSession(learnerId: string, docId: string): Promise<string> {
    const resp = await expectOk(
      await fetch(this.url("/sessions"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ learner_id: learnerId, doc_id: docId }),
      }),
    );
    return (await resp.json()).session_id;
  }

  async chat(sessionId: string, query: string, callbacks: StreamCallbacks): Promise<void> {
    const resp = await fetch(this.url(`/sessions/${sessionId}/chat`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ query }),
    });
    await streamAnswer(resp, callbacks);
  }

  async selectionAction(
    docId: string,
    kind: "summarize" | "explain",
    selection: ViewerSelection,
    callbacks: StreamCallbacks,
    learnerId?: string,
  ): Promise<void> {
    const resp = await fetch(this.url(`/documents/${docId}/actions`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        kind,
        selection: { page: selection.page, start: selection.start, end: selection.end },
        learner_id: learnerId ?? null,
      }),
    });
    await streamAnswer(resp, callbacks);
  }

  async nextQuizCard(docId: string, learnerId: string, section: string): Promise<QuizCardView> {
    const resp = await expectOk(
      await fetch(this.url(`/documents/${docId}/quiz/next`), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ learner_id: learnerId, section }),
      }),
    );
    return resp.json();
  }

  async answerQuizCard(
    cardId: string,
    learnerId: string,
    result: "correct" | "incorrect",
  ): Promise<QuizAnswerResult> {
    const resp = await expectOk(
      await fetch(this.url(`/quiz/${cardId}/answer`), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ learner_id: learnerId, result }),
      }),
    );
    return resp.json();
  }

  async getProfile(learnerId: string): Promise<Profile> {
    return (await expectOk(await fetch(this.url(`/profiles/${learnerId}`)))).json();
  }

  async saveProfile(learnerId: string, interests: string[]): Promise<void> {
    await expectOk(
      await fetch(this.url(`/profiles/${learnerId}`), {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ interests }),
      }),
    );
  }
}

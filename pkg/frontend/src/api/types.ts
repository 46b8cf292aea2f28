// Wire types mirroring the backend's JSON bodies (snake_case preserved).

export interface SectionRange {
  label: string;
  start_page: number;
  end_page: number;
}

export interface DocumentManifest {
  doc_id: string;
  title: string;
  created_at: string;
  page_count: number;
  section_map: SectionRange[];
}

export interface UploadResult {
  doc_id: string;
  title: string;
  pages: number;
  sections: SectionRange[];
}

export interface PageResponse {
  page_number: number;
  text: string;
  char_count: number;
}

export interface HighlightSpan {
  page: number;
  start: number;
  end: number;
  confidence: number;
  method: "exact" | "fuzzy";
}

export interface Reference {
  chunk_id: string;
  verbatim: string;
  summary: string;
  score: number;
  spans: HighlightSpan[];
}

export interface Answer {
  answer_id: string;
  text: string;
  references: Reference[];
  finish_reason: string;
  created_at: string;
}

export interface QuizCardView {
  card_id: string;
  doc_id: string;
  section_label: string;
  question: string;
  box: number;
  last_result: string;
  seen_count: number;
  created_ordinal: number;
}

export interface QuizAnswerResult {
  box: number;
  answer_key: string;
}

export interface Profile {
  learner_id: string;
  interests: string[];
  display_name: string | null;
}

/** A user text selection in server page coordinates. */
export interface ViewerSelection {
  page: number;
  start: number;
  end: number;
  /** Client-side copy for display only; the server re-slices by offsets. */
  text: string;
}

/** JSON shapes exchanged with the summarization service. */

export interface DataRef {
  dimensions: string[];
  start: number; // canonical time (epoch days or ordinal rank)
  end: number;
  label: string;
  kind: "point" | "range" | "comparison";
  patch_ids: string[];
}

export interface SentenceFlags {
  unverifiable: boolean;
  edited: boolean;
}

export interface Sentence {
  index: number;
  text: string;
  level: "L1" | "L2" | "L3";
  refs: DataRef[];
  flags: SentenceFlags;
}

export interface SummaryDoc {
  schema_version: string;
  source: string;
  chart_id: string;
  sentences: Sentence[];
}

export interface JobStatus {
  id: string;
  state: string; // queued | running:<stage> | done | failed
  created: number;
  updated: number;
  error: string;
  chat_versions: number;
}

export interface ChatResponse {
  version: number;
  summary: SummaryDoc;
  edited: number[];
  unverifiable: number[];
}

export interface ChartSpecSubset {
  title?: string | { text?: string };
  mark: string | { type?: string };
  encoding: {
    x: { field: string; type?: string; axis?: { title?: string } };
    y: { field: string; type?: string; axis?: { title?: string } };
    color?: { field: string };
  };
  data?: { values?: Record<string, unknown>[] };
}

/** Wire types for the annotation service.
 *
 * These mirror the service's JSON bodies field for field; the UI never
 * derives or recomputes any of the numbers it displays.
 */

export const TAGS = ["correct", "incorrect", "irrelevant", "missing"] as const;

export type TagValue = (typeof TAGS)[number];

export type SessionState = "open" | "submitted";

export interface LdpView {
  index: number;
  text: string;
  citation: string | null;
  human_tag: TagValue | null;
  /** Hidden (null) until the session is submitted. */
  machine_tag: TagValue | null;
}

export interface AddedLdpView {
  text: string;
  tag: TagValue;
}

export interface SessionView {
  session_id: string;
  qa_id: string;
  reviewer_id: string;
  state: SessionState;
  version: number;
  question: string;
  answer: string;
  contract_id: string;
  contract_text: string;
  ldps: LdpView[];
  added_ldps: AddedLdpView[];
}

export interface ScoreView {
  correctness: number | null;
  precision: number | null;
  recall: number | null;
  f1: number | null;
}

export interface AlignmentPair {
  machine_index: number;
  human_index: number;
  similarity: number;
  machine_tag: TagValue;
  human_tag: TagValue;
  agree: boolean;
}

export interface AlignmentView {
  pairs: AlignmentPair[];
  unmatched_machine: { machine_index: number; tag: TagValue }[];
  unmatched_human: { human_index: number; tag: TagValue }[];
  accuracy: number;
  adjusted_accuracy: number;
  similarity_threshold: number;
  adjusted_similarity_threshold: number;
}

export interface SubmitResult {
  session: SessionView;
  scores: ScoreView;
  alignment: AlignmentView;
  review: Record<string, unknown>;
}

export interface TriageView {
  total: number;
  cleared: string[];
  flagged: string[];
  relevance_threshold: number;
  correctness_threshold: number;
}

export interface ErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}

/** Payload shapes of the /v1 API. The UI holds no reconciliation logic: these
 * are renderings of what the server decided, never inputs to local rules. */

export interface FieldView {
  name: string;
  value: string;
  institution: string;
  role?: string;
  qualifier?: string;
}

export interface RecordView {
  kind: "record" | "entity";
  ref: string;
  institution?: string;
  authority?: string;
  display_title?: { text: string; origin: string };
  all_titles?: { text: string; institution: string; role: string }[];
  fields?: FieldView[];
}

export interface CandidateCard {
  id: string;
  left: string;
  right: string;
  score: number;
  signals: { name_score: number; date_verdict: string; class_verdict: string };
  confidence: string;
  left_view: RecordView;
  right_view: RecordView;
}

export interface QueueResponse {
  institution: string;
  candidates: CandidateCard[];
}

export type AssociativeKind = "copy_of" | "preparatory_for" | "part_of" | "related";

export type TitlePayload = { mark: string } | { create: string };

export type VerdictChoice =
  | { verdict: "accept_equivalent"; preferredTitle?: TitlePayload }
  | { verdict: "accept_associative"; kind: AssociativeKind; preferredTitle?: TitlePayload }
  | { verdict: "reject" }
  | { verdict: "defer" };

export interface DecisionAck {
  sequence: number;
  candidate_id: string;
  status: string;
}

export interface FacetNode {
  uri: string;
  label: string;
  artwork_count: number;
  certainty: string;
  children: FacetNode[];
}

export interface FacetTree {
  roots: FacetNode[];
}

export interface Stats {
  header: { tool: string; version: string; config_hash: string };
  candidates: {
    by_status: Record<string, number>;
    by_confidence: Record<string, number>;
  };
  decisions: {
    count: number;
    by_verdict: Record<string, number>;
    preferred_titles: { marked: number; created: number };
  };
  inconsistency: { conflicted: number; eligible: number; rate: number | null };
}

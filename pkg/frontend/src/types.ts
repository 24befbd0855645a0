/** Payload shapes of the review service API. */

export type IntervalPair = [number, number];

export type Verdict = 'accept' | 'adjust' | 'reject_no_visibility';

export interface ClipSummary {
  clip_id: string;
  object_category: string;
  semantic_group: string;
  anomaly_status: 'normal' | 'abnormal';
  defect_type: string;
  candidates: IntervalPair[];
  status: 'pending' | 'done';
  latest_verdict: Verdict | null;
  final_intervals: IntervalPair[] | null;
}

export interface ClipsPage {
  clips: ClipSummary[];
  page: number;
  page_size: number;
  total: number;
  pending: number;
  done: number;
}

export interface ClipDetail extends ClipSummary {
  gt_intervals: IntervalPair[];
  n_frames: number;
  fps: number;
  duration_sec: number;
  decisions: StoredDecision[];
}

export interface DecisionRequest {
  reviewer_id: string;
  verdict: Verdict;
  final_intervals?: IntervalPair[];
  note?: string;
}

export interface StoredDecision {
  clip_id: string;
  reviewer_id: string;
  verdict: Verdict;
  final_intervals: IntervalPair[];
  note: string;
  timestamp: string;
  decision_seq: number;
}

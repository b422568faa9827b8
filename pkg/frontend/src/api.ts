// Typed client for the review API. Every method rejects with ApiError on a
// non-2xx response so views can show a retryable banner.

export interface MeetingSummary {
  id: string;
  title: string;
  recorded_at: string | null;
  status: string;
  created_at: string;
  utterance_count: number;
  decision_count: number;
}

export interface DecisionItem {
  id: string;
  meeting_id: string;
  utterance_id: string;
  utterance_index: number;
  original_text: string;
  rewritten_text: string;
  degraded: boolean;
  created_at: string;
  context_token_count: number;
  model_versions: { detector: string; rewriter: string };
}

export interface DecisionsPayload {
  meeting_id: string;
  status: string;
  decisions: DecisionItem[];
}

export interface TranscriptUtterance {
  id: string;
  index: number;
  speaker: string;
  text: string;
  start: number | null;
  end: number | null;
  tag: string | null;
}

export interface TranscriptPayload {
  meeting_id: string;
  title: string;
  anchor: string | null;
  anchor_found: boolean;
  utterances: TranscriptUtterance[];
}

export interface JobPayload {
  meeting_id: string;
  run_id: string;
  state: string;
  error: string | null;
  timings: Record<string, number>;
  created_at: string;
  updated_at: string;
}

export interface ApiClient {
  listMeetings(): Promise<MeetingSummary[]>;
  getDecisions(meetingId: string): Promise<DecisionsPayload>;
  getTranscript(meetingId: string, anchor: string | null): Promise<TranscriptPayload>;
  startProcessing(meetingId: string): Promise<JobPayload>;
  getJob(meetingId: string): Promise<JobPayload>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const error = (body as { error?: { code?: string; message?: string } } | null)?.error;
    throw new ApiError(
      response.status,
      error?.code ?? "unknown",
      error?.message ?? `request failed with status ${response.status}`,
    );
  }
  return body as T;
}

export function httpApi(base = ""): ApiClient {
  return {
    async listMeetings() {
      const body = await request<{ meetings: MeetingSummary[] }>(`${base}/meetings`);
      return body.meetings;
    },
    getDecisions(meetingId) {
      return request<DecisionsPayload>(`${base}/meetings/${encodeURIComponent(meetingId)}/decisions`);
    },
    getTranscript(meetingId, anchor) {
      const query = anchor === null ? "" : `?anchor=${encodeURIComponent(anchor)}`;
      return request<TranscriptPayload>(
        `${base}/meetings/${encodeURIComponent(meetingId)}/transcript${query}`,
      );
    },
    async startProcessing(meetingId) {
      const body = await request<{ job: JobPayload }>(
        `${base}/meetings/${encodeURIComponent(meetingId)}/process`,
        { method: "POST" },
      );
      return body.job;
    },
    async getJob(meetingId) {
      const body = await request<{ job: JobPayload }>(
        `${base}/meetings/${encodeURIComponent(meetingId)}/job`,
      );
      return body.job;
    },
  };
}

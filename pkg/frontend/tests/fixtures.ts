import type {
  ApiClient,
  DecisionItem,
  DecisionsPayload,
  JobPayload,
  MeetingSummary,
  TranscriptPayload,
  TranscriptUtterance,
} from "../src/api.js";

export function meetingSummary(id: string, overrides: Partial<MeetingSummary> = {}): MeetingSummary {
  return {
    id,
    title: `Meeting ${id}`,
    recorded_at: null,
    status: "processed",
    created_at: "2024-06-01T10:00:00+00:00",
    utterance_count: 20,
    decision_count: 2,
    ...overrides,
  };
}

export function decisionItem(
  meetingId: string,
  index: number,
  overrides: Partial<DecisionItem> = {},
): DecisionItem {
  return {
    id: `${meetingId}-d${index}`,
    meeting_id: meetingId,
    utterance_id: `${meetingId}:u${index}`,
    utterance_index: index,
    original_text: `okay so we will do thing ${index}`,
    rewritten_text: `we will do thing ${index}`,
    degraded: false,
    created_at: "2024-06-01T10:05:00+00:00",
    context_token_count: 40,
    model_versions: { detector: "fixture-det", rewriter: "fixture-rw" },
    ...overrides,
  };
}

export function utterances(meetingId: string, count: number): TranscriptUtterance[] {
  const rows: TranscriptUtterance[] = [];
  for (let i = 0; i < count; i += 1) {
    rows.push({
      id: `${meetingId}:u${i}`,
      index: i,
      speaker: `speaker_${i % 3}`,
      text: `utterance number ${i}`,
      start: null,
      end: null,
      tag: null,
    });
  }
  return rows;
}

export interface FixtureData {
  meetings: MeetingSummary[];
  decisions: Map<string, DecisionsPayload>;
  transcripts: Map<string, TranscriptUtterance[]>;
  jobs: Map<string, JobPayload>;
}

export function fixtureData(): FixtureData {
  return {
    meetings: [],
    decisions: new Map(),
    transcripts: new Map(),
    jobs: new Map(),
  };
}

export function doneJob(meetingId: string, overrides: Partial<JobPayload> = {}): JobPayload {
  return {
    meeting_id: meetingId,
    run_id: "run-1",
    state: "done",
    error: null,
    timings: {},
    created_at: "2024-06-01T10:04:00+00:00",
    updated_at: "2024-06-01T10:05:00+00:00",
    ...overrides,
  };
}

export function fixtureApi(data: FixtureData): ApiClient {
  return {
    async listMeetings() {
      return data.meetings;
    },
    async getDecisions(meetingId) {
      const payload = data.decisions.get(meetingId);
      if (payload === undefined) {
        throw new Error(`no decisions fixture for ${meetingId}`);
      }
      return payload;
    },
    async getTranscript(meetingId, anchor) {
      const rows = data.transcripts.get(meetingId);
      if (rows === undefined) {
        throw new Error(`no transcript fixture for ${meetingId}`);
      }
      const found = anchor !== null && rows.some((row) => row.id === anchor);
      return {
        meeting_id: meetingId,
        title: `Meeting ${meetingId}`,
        anchor,
        anchor_found: found,
        utterances: rows,
      } satisfies TranscriptPayload;
    },
    async startProcessing(meetingId) {
      const job = data.jobs.get(meetingId);
      if (job === undefined) {
        throw new Error(`no job fixture for ${meetingId}`);
      }
      return job;
    },
    async getJob(meetingId) {
      const job = data.jobs.get(meetingId);
      if (job === undefined) {
        throw new Error(`no job fixture for ${meetingId}`);
      }
      return job;
    },
  };
}

// jsdom reports zero for all layout reads, so the transcript geometry is
// stubbed at the prototype: each utterance row is 100px tall, the viewer
// shows 250px, and content height is 100px per row.
export const ROW_HEIGHT = 100;
export const VIEWER_HEIGHT = 250;

export function stubGeometry(): () => void {
  const defineGetter = (
    proto: object,
    name: string,
    get: (this: HTMLElement) => number,
  ): void => {
    Object.defineProperty(proto, name, { configurable: true, get });
  };

  defineGetter(HTMLElement.prototype, "offsetTop", function () {
    if (!this.classList.contains("utterance")) {
      return 0;
    }
    const parent = this.parentElement;
    const index = parent === null ? 0 : Array.prototype.indexOf.call(parent.children, this);
    return ROW_HEIGHT * index;
  });
  defineGetter(HTMLElement.prototype, "offsetHeight", function () {
    return this.classList.contains("utterance") ? ROW_HEIGHT : 0;
  });
  defineGetter(HTMLElement.prototype, "clientHeight", function () {
    return this.classList.contains("transcript-viewer") ? VIEWER_HEIGHT : 0;
  });
  defineGetter(HTMLElement.prototype, "scrollHeight", function () {
    if (!this.classList.contains("transcript-viewer")) {
      return 0;
    }
    const list = this.querySelector(".utterance-list");
    return list === null ? 0 : ROW_HEIGHT * list.children.length;
  });
  Object.defineProperty(HTMLElement.prototype, "scrollTop", {
    configurable: true,
    writable: true,
    value: 0,
  });

  return () => {
    for (const name of ["offsetTop", "offsetHeight", "clientHeight", "scrollHeight", "scrollTop"]) {
      delete (HTMLElement.prototype as unknown as Record<string, unknown>)[name];
    }
  };
}

// DOM builders for the three screens. Views never fetch; they take payloads
// plus callbacks, so tests can drive them with fixtures.

import type {
  DecisionItem,
  DecisionsPayload,
  MeetingSummary,
  TranscriptPayload,
} from "./api.js";
import type { Route } from "./router.js";

export type Navigate = (route: Route) => void;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderErrorBanner(message: string, retry: () => void): HTMLElement {
  const banner = el("div", "banner banner-error");
  banner.append(el("span", "banner-text", message));
  const button = el("button", "retry", "Retry");
  button.type = "button";
  button.addEventListener("click", retry);
  banner.append(button);
  return banner;
}

export function renderMeetingList(meetings: MeetingSummary[], navigate: Navigate): HTMLElement {
  const section = el("section", "screen meetings");
  section.append(el("h1", undefined, "Meetings"));
  if (meetings.length === 0) {
    section.append(el("p", "empty-state", "No meetings uploaded yet."));
    return section;
  }
  const list = el("ul", "meeting-list");
  for (const meeting of meetings) {
    const row = el("li", "meeting-row");
    row.dataset.meetingId = meeting.id;
    const title = el("span", "meeting-title", meeting.title);
    const status = el("span", `meeting-status status-${meeting.status}`, meeting.status);
    const counts = el(
      "span",
      "meeting-counts",
      `${meeting.utterance_count} utterances, ${meeting.decision_count} decisions`,
    );
    row.append(title, status, counts);
    row.addEventListener("click", () => {
      navigate({ kind: "decisions", meetingId: meeting.id });
    });
    list.append(row);
  }
  section.append(list);
  return section;
}

function renderDecisionEntry(item: DecisionItem, navigate: Navigate): HTMLElement {
  const entry = el("li", item.degraded ? "decision degraded" : "decision");
  entry.dataset.utteranceId = item.utterance_id;

  const rewritten = el("p", "rewritten", item.rewritten_text);
  entry.append(rewritten);
  if (item.degraded) {
    entry.append(el("span", "degraded-marker", "rewrite unavailable, showing original"));
  }

  const original = el("p", "original hidden", item.original_text);
  const toggle = el("button", "toggle-original", "Show original");
  toggle.type = "button";
  toggle.addEventListener("click", (event) => {
    event.stopPropagation();
    const nowHidden = original.classList.toggle("hidden");
    toggle.textContent = nowHidden ? "Show original" : "Hide original";
  });
  entry.append(toggle, original);

  entry.addEventListener("click", () => {
    navigate({ kind: "transcript", meetingId: item.meeting_id, anchor: item.utterance_id });
  });
  return entry;
}

export function renderDecisions(
  payload: DecisionsPayload,
  navigate: Navigate,
  startProcessing: () => void,
): HTMLElement {
  const section = el("section", "screen decisions");
  const heading = el("h1", undefined, `Decisions for ${payload.meeting_id}`);
  section.append(heading);

  const back = el("a", "back-link", "All meetings");
  back.href = "#/meetings";
  section.append(back);

  if (payload.status !== "processed") {
    const prompt = el("div", "process-prompt");
    prompt.append(el("p", undefined, "This meeting has not been processed yet."));
    const run = el("button", "run-processing", "Run processing");
    run.type = "button";
    run.addEventListener("click", startProcessing);
    prompt.append(run);
    section.append(prompt);
    return section;
  }

  if (payload.decisions.length === 0) {
    section.append(el("p", "empty-state", "No decisions were detected in this meeting."));
    return section;
  }

  const list = el("ul", "decision-list");
  for (const item of payload.decisions) {
    list.append(renderDecisionEntry(item, navigate));
  }
  section.append(list);
  return section;
}

// Scroll offset that puts the anchor's bottom edge at the viewer's bottom
// edge, clamped to the scrollable range.
export function anchorScrollTop(
  anchorTop: number,
  anchorHeight: number,
  viewerHeight: number,
  maxScroll: number,
): number {
  const wanted = anchorTop + anchorHeight - viewerHeight;
  return Math.max(0, Math.min(wanted, maxScroll));
}

export function positionAnchor(viewer: HTMLElement, anchorId: string): boolean {
  let target: HTMLElement | null = null;
  for (const row of viewer.querySelectorAll<HTMLElement>("[data-utterance-id]")) {
    if (row.dataset.utteranceId === anchorId) {
      target = row;
      break;
    }
  }
  if (target === null) {
    viewer.scrollTop = 0;
    return false;
  }
  const maxScroll = Math.max(0, viewer.scrollHeight - viewer.clientHeight);
  viewer.scrollTop = anchorScrollTop(
    target.offsetTop,
    target.offsetHeight,
    viewer.clientHeight,
    maxScroll,
  );
  return true;
}

export function renderTranscript(payload: TranscriptPayload, navigate: Navigate): HTMLElement {
  const section = el("section", "screen transcript");
  section.append(el("h1", undefined, payload.title));

  const back = el("a", "back-link", "Back to decisions");
  back.href = `#/meetings/${encodeURIComponent(payload.meeting_id)}/decisions`;
  section.append(back);

  if (payload.anchor !== null && !payload.anchor_found) {
    section.append(
      el("div", "banner banner-warning", `Utterance ${payload.anchor} is not in this transcript.`),
    );
  }

  const viewer = el("div", "transcript-viewer");
  const list = el("ol", "utterance-list");
  for (const utterance of payload.utterances) {
    const row = el("li", "utterance");
    row.dataset.utteranceId = utterance.id;
    if (utterance.tag === "TD") {
      row.classList.add("tagged-decision");
    }
    if (payload.anchor_found && utterance.id === payload.anchor) {
      row.classList.add("anchored");
    }
    row.append(el("span", "speaker", utterance.speaker));
    row.append(el("span", "utterance-text", utterance.text));
    row.addEventListener("click", () => {
      navigate({ kind: "transcript", meetingId: payload.meeting_id, anchor: utterance.id });
    });
    list.append(row);
  }
  viewer.append(list);
  section.append(viewer);
  return section;
}

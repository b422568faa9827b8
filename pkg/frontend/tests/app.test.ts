import { afterEach, beforeEach, describe, expect, it } from "vitest";

import type { ApiClient, DecisionsPayload, MeetingSummary } from "../src/api.js";
import { createApp, type AppHandle } from "../src/app.js";
import {
  ROW_HEIGHT,
  VIEWER_HEIGHT,
  decisionItem,
  doneJob,
  fixtureApi,
  fixtureData,
  meetingSummary,
  stubGeometry,
  utterances,
} from "./fixtures.js";

function seededData() {
  const data = fixtureData();
  data.meetings = [
    meetingSummary("m1"),
    meetingSummary("m2", { status: "uploaded", decision_count: 0 }),
    meetingSummary("m3"),
  ];
  data.decisions.set("m1", {
    meeting_id: "m1",
    status: "processed",
    decisions: [decisionItem("m1", 7), decisionItem("m1", 12, { degraded: true })],
  });
  data.transcripts.set("m1", utterances("m1", 20));
  return data;
}

async function settle(app: AppHandle): Promise<void> {
  await app.idle();
  await new Promise((resolve) => setTimeout(resolve, 0));
  await app.idle();
}

describe("app", () => {
  let root: HTMLElement;
  let app: AppHandle | null = null;
  let restoreGeometry: () => void;

  beforeEach(() => {
    restoreGeometry = stubGeometry();
    window.location.hash = "";
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app") as HTMLElement;
  });

  afterEach(() => {
    app?.dispose();
    app = null;
    restoreGeometry();
  });

  function start(api: ApiClient): AppHandle {
    app = createApp(root, api, window);
    return app;
  }

  it("renders one row per fixture meeting on the list screen", async () => {
    const handle = start(fixtureApi(seededData()));
    await settle(handle);
    expect(window.location.hash).toBe("#/meetings");
    const rows = root.querySelectorAll(".meeting-row");
    expect(rows).toHaveLength(3);
    const ids = Array.from(rows, (row) => (row as HTMLElement).dataset.meetingId);
    expect(ids).toEqual(["m1", "m2", "m3"]);
  });

  it("shows the empty state when no meetings exist", async () => {
    const handle = start(fixtureApi(fixtureData()));
    await settle(handle);
    expect(root.querySelector(".empty-state")).not.toBeNull();
  });

  it("opens a meeting's decisions from the list", async () => {
    const handle = start(fixtureApi(seededData()));
    await settle(handle);
    root.querySelector<HTMLElement>('[data-meeting-id="m1"]')?.click();
    await settle(handle);
    expect(window.location.hash).toBe("#/meetings/m1/decisions");
    const entries = root.querySelectorAll(".decision");
    expect(entries).toHaveLength(2);
    expect(entries[0]?.querySelector(".rewritten")?.textContent).toBe("we will do thing 7");
  });

  it("marks degraded decisions visibly", async () => {
    const handle = start(fixtureApi(seededData()));
    await handle.navigate({ kind: "decisions", meetingId: "m1" });
    await settle(handle);
    const degraded = root.querySelector<HTMLElement>('[data-utterance-id="m1:u12"]');
    expect(degraded?.classList.contains("degraded")).toBe(true);
    const marker = degraded?.querySelector<HTMLElement>(".degraded-marker");
    expect(marker).not.toBeNull();
    expect(marker?.classList.contains("hidden")).toBe(false);
    expect(marker?.textContent).toContain("original");
  });

  it("clicking a decision opens the transcript anchored at viewport bottom", async () => {
    const handle = start(fixtureApi(seededData()));
    await handle.navigate({ kind: "decisions", meetingId: "m1" });
    await settle(handle);
    root.querySelector<HTMLElement>('[data-utterance-id="m1:u7"]')?.click();
    await settle(handle);

    expect(window.location.hash).toBe("#/meetings/m1/transcript?anchor=m1%3Au7");
    const viewer = root.querySelector<HTMLElement>(".transcript-viewer");
    expect(viewer).not.toBeNull();
    const anchored = root.querySelectorAll<HTMLElement>(".utterance.anchored");
    expect(anchored).toHaveLength(1);
    expect(anchored[0]?.dataset.utteranceId).toBe("m1:u7");
    // Bottom edge of row 7 is (7 + 1) * 100; the viewer shows 250px.
    expect(viewer?.scrollTop).toBe(8 * ROW_HEIGHT - VIEWER_HEIGHT);
  });

  it("clamps the scroll for an anchor on the last utterance", async () => {
    const handle = start(fixtureApi(seededData()));
    await handle.navigate({ kind: "transcript", meetingId: "m1", anchor: "m1:u19" });
    await settle(handle);
    const viewer = root.querySelector<HTMLElement>(".transcript-viewer");
    const maxScroll = 20 * ROW_HEIGHT - VIEWER_HEIGHT;
    expect(viewer?.scrollTop).toBe(maxScroll);
  });

  it("warns and stays at the top when the anchor is missing", async () => {
    const handle = start(fixtureApi(seededData()));
    await handle.navigate({ kind: "transcript", meetingId: "m1", anchor: "m1:u99" });
    await settle(handle);
    expect(root.querySelector(".banner-warning")?.textContent).toContain("m1:u99");
    const viewer = root.querySelector<HTMLElement>(".transcript-viewer");
    expect(viewer?.scrollTop).toBe(0);
    expect(root.querySelector(".utterance.anchored")).toBeNull();
  });

  it("renders transcript text byte for byte", async () => {
    const data = seededData();
    const weird = "  spaced  text\twith tabs ";
    data.transcripts.get("m1")![3]!.text = weird;
    const handle = start(fixtureApi(data));
    await handle.navigate({ kind: "transcript", meetingId: "m1", anchor: null });
    await settle(handle);
    const cells = root.querySelectorAll(".utterance-text");
    expect(cells[3]?.textContent).toBe(weird);
  });

  it("discards responses that arrive after a newer navigation", async () => {
    const data = seededData();
    let release!: (payload: DecisionsPayload) => void;
    const blocked = new Promise<DecisionsPayload>((resolve) => {
      release = resolve;
    });
    const api: ApiClient = {
      ...fixtureApi(data),
      getDecisions: () => blocked,
    };
    const handle = start(api);
    await settle(handle);

    const slow = handle.show({ kind: "decisions", meetingId: "m1" });
    await handle.show({ kind: "meetings" });
    release({ meeting_id: "m1", status: "processed", decisions: [] });
    await slow;

    expect(root.querySelector(".screen.meetings")).not.toBeNull();
    expect(root.querySelector(".screen.decisions")).toBeNull();
  });

  it("shows a retryable error banner when a fetch fails", async () => {
    const data = seededData();
    let failures = 1;
    const api: ApiClient = {
      ...fixtureApi(data),
      listMeetings: async (): Promise<MeetingSummary[]> => {
        if (failures > 0) {
          failures -= 1;
          throw new Error("backend unreachable");
        }
        return data.meetings;
      },
    };
    const handle = start(api);
    await settle(handle);
    expect(root.querySelector(".banner-error")?.textContent).toContain("backend unreachable");

    root.querySelector<HTMLElement>(".retry")?.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    await settle(handle);
    expect(root.querySelectorAll(".meeting-row")).toHaveLength(3);
  });

  it("runs processing from the decisions screen and refreshes", async () => {
    const data = seededData();
    data.decisions.set("m2", { meeting_id: "m2", status: "uploaded", decisions: [] });
    data.jobs.set("m2", doneJob("m2"));
    const base = fixtureApi(data);
    const api: ApiClient = {
      ...base,
      startProcessing: async (meetingId) => {
        data.decisions.set("m2", {
          meeting_id: "m2",
          status: "processed",
          decisions: [decisionItem("m2", 4)],
        });
        return base.startProcessing(meetingId);
      },
    };
    const handle = start(api);
    await handle.navigate({ kind: "decisions", meetingId: "m2" });
    await settle(handle);
    expect(root.querySelector(".run-processing")).not.toBeNull();

    root.querySelector<HTMLElement>(".run-processing")?.click();
    await settle(handle);
    expect(root.querySelector(".run-processing")).toBeNull();
    const entries = root.querySelectorAll(".decision");
    expect(entries).toHaveLength(1);
    expect(entries[0]?.querySelector(".rewritten")?.textContent).toBe("we will do thing 4");
  });
});

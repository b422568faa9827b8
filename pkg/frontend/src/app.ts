// Wires routes to API calls and swaps screens into the root element. Each
// render gets a sequence number; responses arriving after a newer render
// started are discarded, so slow fetches never overwrite the current screen.

import type { ApiClient } from "./api.js";
import { parseRoute, routeToHash, type Route } from "./router.js";
import {
  positionAnchor,
  renderDecisions,
  renderErrorBanner,
  renderMeetingList,
  renderTranscript,
} from "./views.js";

export interface AppHandle {
  show(route: Route): Promise<void>;
  navigate(route: Route): Promise<void>;
  idle(): Promise<void>;
  dispose(): void;
}

const JOB_POLL_MS = 500;

export function createApp(root: HTMLElement, api: ApiClient, win: Window = window): AppHandle {
  let seq = 0;
  let renderedHash: string | null = null;
  let lastRender: Promise<void> = Promise.resolve();

  function mount(screen: HTMLElement, hash: string): void {
    root.replaceChildren(screen);
    renderedHash = hash;
  }

  const navigate = (route: Route): Promise<void> => {
    const hash = routeToHash(route);
    if (win.location.hash !== hash) {
      win.location.hash = hash;
    }
    lastRender = show(route);
    return lastRender;
  };

  async function runProcessing(meetingId: string): Promise<void> {
    try {
      let job = await api.startProcessing(meetingId);
      while (job.state !== "done" && job.state !== "failed") {
        await new Promise((resolve) => win.setTimeout(resolve, JOB_POLL_MS));
        job = await api.getJob(meetingId);
      }
      if (job.state === "failed") {
        root.prepend(
          renderErrorBanner(`Processing failed: ${job.error ?? "unknown error"}`, () => {
            void runProcessing(meetingId);
          }),
        );
        return;
      }
    } catch (error) {
      root.prepend(
        renderErrorBanner(describeError(error), () => {
          void runProcessing(meetingId);
        }),
      );
      return;
    }
    await navigate({ kind: "decisions", meetingId });
  }

  async function show(route: Route): Promise<void> {
    const mySeq = ++seq;
    const hash = routeToHash(route);
    try {
      if (route.kind === "meetings") {
        const meetings = await api.listMeetings();
        if (mySeq !== seq) {
          return;
        }
        mount(renderMeetingList(meetings, navigate), hash);
      } else if (route.kind === "decisions") {
        const payload = await api.getDecisions(route.meetingId);
        if (mySeq !== seq) {
          return;
        }
        mount(
          renderDecisions(payload, navigate, () => {
            void runProcessing(route.meetingId);
          }),
          hash,
        );
      } else {
        const payload = await api.getTranscript(route.meetingId, route.anchor);
        if (mySeq !== seq) {
          return;
        }
        mount(renderTranscript(payload, navigate), hash);
        const viewer = root.querySelector<HTMLElement>(".transcript-viewer");
        if (viewer !== null && payload.anchor !== null && payload.anchor_found) {
          positionAnchor(viewer, payload.anchor);
        }
      }
    } catch (error) {
      if (mySeq !== seq) {
        return;
      }
      mount(
        renderErrorBanner(describeError(error), () => {
          void show(route);
        }),
        hash,
      );
    }
  }

  const onHashChange = (): void => {
    const hash = win.location.hash;
    if (hash === renderedHash) {
      return;
    }
    lastRender = show(parseRoute(hash));
  };
  win.addEventListener("hashchange", onHashChange);

  if (win.location.hash === "") {
    win.location.hash = "#/meetings";
  }
  lastRender = show(parseRoute(win.location.hash));

  return {
    show(route) {
      lastRender = show(route);
      return lastRender;
    },
    navigate,
    idle() {
      return lastRender;
    },
    dispose() {
      win.removeEventListener("hashchange", onHashChange);
    },
  };
}

function describeError(error: unknown): string {
  if (error instanceof Error) {
    return error.message;
  }
  return String(error);
}

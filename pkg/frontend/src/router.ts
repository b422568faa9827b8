// Hash-based routes so the page works from a static file mount with no
// server-side rewrite rules.

export type Route =
  | { kind: "meetings" }
  | { kind: "decisions"; meetingId: string }
  | { kind: "transcript"; meetingId: string; anchor: string | null };

export function parseRoute(hash: string): Route {
  const raw = hash.startsWith("#") ? hash.slice(1) : hash;
  const [path, query = ""] = raw.split("?", 2) as [string, string?];
  const parts = path.split("/").filter((part) => part.length > 0);
  if (parts[0] !== "meetings" || parts.length === 1) {
    return { kind: "meetings" };
  }
  const meetingId = decodeURIComponent(parts[1] ?? "");
  if (meetingId === "") {
    return { kind: "meetings" };
  }
  if (parts[2] === "transcript") {
    const params = new URLSearchParams(query);
    const anchor = params.get("anchor");
    return { kind: "transcript", meetingId, anchor: anchor === "" ? null : anchor };
  }
  return { kind: "decisions", meetingId };
}

export function routeToHash(route: Route): string {
  switch (route.kind) {
    case "meetings":
      return "#/meetings";
    case "decisions":
      return `#/meetings/${encodeURIComponent(route.meetingId)}/decisions`;
    case "transcript": {
      const base = `#/meetings/${encodeURIComponent(route.meetingId)}/transcript`;
      if (route.anchor === null) {
        return base;
      }
      return `${base}?anchor=${encodeURIComponent(route.anchor)}`;
    }
  }
}

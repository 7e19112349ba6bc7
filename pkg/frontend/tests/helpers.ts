import { readFileSync } from "node:fs";

import type { FetchFn } from "../src/api.js";
import type { AppHost } from "../src/app.js";

export function fixture<T = any>(name: string): T {
  return JSON.parse(
    readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf8"),
  ) as T;
}

export const MODEL_ID: string = fixture("summary.json").model_id;

export interface RecordedCall {
  method: string;
  url: string;
  body: any;
}

/** A fetch routed entirely onto the recorded service fixtures. */
export function fixtureFetch(): { fetchFn: FetchFn; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];

  const respond = (doc: unknown, status = 200): Response =>
    new Response(JSON.stringify(doc), {
      status,
      headers: { "content-type": "application/json" },
    });

  const fetchFn: FetchFn = async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    calls.push({ method, url, body });
    const u = new URL(url);
    const path = u.pathname;

    if (method === "POST" && path === "/models") {
      return respond(fixture("summary.json"), 201);
    }
    if (method === "GET" && /^\/models\/[^/]+$/.test(path)) {
      return respond(fixture("summary.json"));
    }
    if (method === "GET" && path.endsWith("/instances")) {
      return respond(fixture("instances_test.json"));
    }
    if (method === "GET" && path.endsWith("/rules")) {
      return respond(fixture("rules_default.json"));
    }
    if (method === "GET" && path.endsWith("/render")) {
      const view = u.searchParams.get("view");
      if (view === "global") {
        return respond(
          u.searchParams.get("order-rows") === "class-and-coverage"
            ? fixture("render_global_ordered.json")
            : fixture("render_global.json"),
        );
      }
      if (view === "local") return respond(fixture("render_local_x13.json"));
      if (view === "changes") return respond(fixture("render_changes_x13.json"));
    }
    if (method === "POST" && path.endsWith("/explain/local")) {
      return respond(fixture("local_x13.json"));
    }
    if (method === "POST" && path.endsWith("/explain/changes")) {
      return respond(fixture("changes_x13.json"));
    }
    if (method === "POST" && path.endsWith("/whatif")) {
      if (body && "tree_id" in body) return respond(fixture("whatif_tree1.json"));
      return respond(fixture("whatif_edit.json"));
    }
    return respond({ error: `no fixture for ${method} ${path}`, path: "$" }, 404);
  };

  return { fetchFn, calls };
}

/** Captures everything the app renders and navigates to. */
export class CaptureHost implements AppHost {
  html = "";
  hash = "";
  renders: string[] = [];

  render(html: string): void {
    this.html = html;
    this.renders.push(html);
  }

  setHash(hash: string): void {
    this.hash = hash;
  }
}

export const X13 = [6.9, 3.1, 4.9, 1.5];

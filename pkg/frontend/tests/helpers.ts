import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { expect } from "vitest";
import { fmt, resolve } from "../src/format.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", `${name}.json`), "utf8")) as T;
}

export interface Recorded {
  method: string;
  url: string;
  body: unknown;
}

interface Route {
  method: string;
  pattern: RegExp;
  respond: (request: Recorded) => { status: number; body: unknown };
}

/** Replaces global fetch; every request must match a registered route. */
export class FetchStub {
  readonly calls: Recorded[] = [];
  private readonly routes: Route[] = [];

  on(
    method: string,
    pattern: string | RegExp,
    body: unknown | ((request: Recorded) => { status: number; body: unknown }),
    status = 200,
  ): this {
    const regex =
      typeof pattern === "string"
        ? new RegExp(`^${pattern.replace(/[.*+?^${}()|[\]\\]/g, "\\$&")}$`)
        : pattern;
    const respond =
      typeof body === "function"
        ? (body as (request: Recorded) => { status: number; body: unknown })
        : () => ({ status, body });
    this.routes.push({ method, pattern: regex, respond });
    return this;
  }

  install(): void {
    (globalThis as { fetch: unknown }).fetch = async (
      url: string | URL,
      init?: { method?: string; body?: string },
    ) => {
      const record: Recorded = {
        method: init?.method ?? "GET",
        url: String(url),
        body: init?.body === undefined ? undefined : JSON.parse(init.body),
      };
      this.calls.push(record);
      for (const route of this.routes) {
        if (route.method === record.method && route.pattern.test(record.url)) {
          const { status, body } = route.respond(record);
          return {
            ok: status < 400,
            status,
            text: async () => JSON.stringify(body),
          };
        }
      }
      throw new Error(`unhandled request: ${record.method} ${record.url}`);
    };
  }

  requests(method: string, urlPart: string): Recorded[] {
    return this.calls.filter(
      (call) => call.method === method && call.url.includes(urlPart),
    );
  }
}

/**
 * Single-source-of-truth check: every text node containing a digit must sit
 * under a `data-src` element whose path resolves, in the recorded response
 * body for that source, to exactly the displayed text.  Editor widgets that
 * echo user input are marked `data-editor` and excluded.
 *
 * Returns the number of verified cells so callers can assert the walk was
 * not vacuous.
 */
export function checkNumericCells(
  root: Element,
  bodies: Record<string, unknown>,
): number {
  let checked = 0;
  const walker = root.ownerDocument.createTreeWalker(root, 4 /* SHOW_TEXT */);
  for (let node = walker.nextNode(); node !== null; node = walker.nextNode()) {
    const text = node.textContent ?? "";
    if (!/[0-9]/.test(text)) continue;
    const parent = node.parentElement;
    expect(parent, `numeric text ${JSON.stringify(text)} outside any element`).not.toBeNull();
    if (parent!.closest("[data-editor]") !== null) continue;
    const tagged = parent!.closest("[data-src]");
    expect(
      tagged,
      `numeric text ${JSON.stringify(text)} has no data-src ancestor`,
    ).not.toBeNull();
    const spec = tagged!.getAttribute("data-src")!;
    const colon = spec.indexOf(":");
    expect(colon, `malformed data-src ${JSON.stringify(spec)}`).toBeGreaterThan(0);
    const source = spec.slice(0, colon);
    const path = spec.slice(colon + 1);
    expect(
      Object.prototype.hasOwnProperty.call(bodies, source),
      `data-src ${JSON.stringify(spec)} names unknown response ${JSON.stringify(source)}`,
    ).toBe(true);
    const expected = fmt(resolve(bodies[source], path));
    expect(tagged!.textContent, `mismatch for ${spec}`).toBe(expected);
    checked += 1;
  }
  return checked;
}

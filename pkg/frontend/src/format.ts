/** Path-based value extraction and display formatting.
 *
 * Every numeric cell the UI renders is produced by `resolve`-ing a path in
 * a stored service response and passing the result through `fmt`.  The
 * tests re-resolve each cell's `data-src` against the intercepted response
 * bodies with these same two functions, so a cell that displays anything
 * the service did not send cannot pass.
 */

/** A displayable leaf of a service response. */
export type Leaf = number | string | boolean | null | string[];

/** Look up a dotted path; a trailing `!` on the final segment returns the
 * segment itself (after checking it exists as a key), which lets labels
 * that are response KEYS — node names, set labels — carry a source too. */
export function resolve(body: unknown, path: string): Leaf {
  const segments = path.split(".");
  let current: unknown = body;
  for (let i = 0; i < segments.length; i += 1) {
    let seg = segments[i]!;
    const last = i === segments.length - 1;
    if (last && seg.endsWith("!")) {
      seg = seg.slice(0, -1);
      if (current === null || typeof current !== "object" || !(seg in current)) {
        throw new Error(`no key ${seg} at ${path}`);
      }
      return seg;
    }
    if (current === null || typeof current !== "object") {
      throw new Error(`dead end at ${seg} in ${path}`);
    }
    if (Array.isArray(current)) {
      const idx = Number(seg);
      if (!Number.isInteger(idx) || idx < 0 || idx >= current.length) {
        throw new Error(`bad index ${seg} in ${path}`);
      }
      current = current[idx];
    } else {
      const rec = current as Record<string, unknown>;
      if (!(seg in rec)) {
        throw new Error(`no key ${seg} in ${path}`);
      }
      current = rec[seg];
    }
  }
  if (!isLeaf(current)) {
    throw new Error(`${path} is not a displayable leaf`);
  }
  return current;
}

function isLeaf(v: unknown): v is Leaf {
  if (v === null) return true;
  const t = typeof v;
  if (t === "number" || t === "string" || t === "boolean") return true;
  return Array.isArray(v) && v.every((x) => typeof x === "string");
}

/** Canonical display form: numbers to at most six decimals, category sets
 * joined with `+`, null as a dash. */
export function fmt(value: Leaf): string {
  if (value === null) return "—";
  if (typeof value === "number") {
    if (Number.isInteger(value)) return String(value);
    return String(Math.round(value * 1e6) / 1e6);
  }
  if (typeof value === "boolean") return value ? "yes" : "no";
  if (Array.isArray(value)) return value.join("+");
  return value;
}

/** Collect the paths of every numeric leaf in a response body. */
export function numericLeaves(body: unknown, prefix = ""): string[] {
  if (typeof body === "number") return [prefix];
  if (body === null || typeof body !== "object") return [];
  const out: string[] = [];
  if (Array.isArray(body)) {
    body.forEach((item, i) => {
      out.push(...numericLeaves(item, prefix === "" ? String(i) : `${prefix}.${i}`));
    });
    return out;
  }
  for (const [key, item] of Object.entries(body)) {
    out.push(...numericLeaves(item, prefix === "" ? key : `${prefix}.${key}`));
  }
  return out;
}

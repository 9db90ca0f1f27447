/** Client-side view state: selections, editors, and the response registry. */

import type { DeckDraft } from "./deck.js";
import type { RequirementsSpec } from "./types.js";

/** Responses shown on screen, keyed by a short source name.  Rendered
 * numeric cells carry `data-src="<source>:<path>"` pointing back into one
 * of these bodies. */
export class Sources {
  private readonly bodies = new Map<string, unknown>();

  set(name: string, body: unknown): void {
    this.bodies.set(name, body);
  }

  get(name: string): unknown {
    if (!this.bodies.has(name)) throw new Error(`no source ${name}`);
    return this.bodies.get(name);
  }

  has(name: string): boolean {
    return this.bodies.has(name);
  }

  delete(name: string): void {
    this.bodies.delete(name);
  }
}

export interface ViewState {
  projectId: string | null;
  revision: number;
  /** node whose tables are highlighted (all node panels stay rendered) */
  selectedNode: string | null;
  /** deck under edit, addressed by category and node */
  editing: { category: string; node: string } | null;
  deckDraft: DeckDraft | null;
  deckErrors: string[];
  requirements: RequirementsSpec | null;
  /** a mutation was rejected because another change won the revision race */
  conflict: boolean;
  jobId: string | null;
  jobStatus: string | null;
}

export function initialState(): ViewState {
  return {
    projectId: null,
    revision: 0,
    selectedNode: null,
    editing: null,
    deckDraft: null,
    deckErrors: [],
    requirements: null,
    conflict: false,
    jobId: null,
    jobStatus: null,
  };
}

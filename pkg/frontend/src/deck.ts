/** Card-deck editor state and client-side STRUCTURAL validation.
 *
 * Only shape rules are checked here (card placement, interval sanity); all
 * numeric feasibility questions stay on the server so the two can never
 * disagree about them.
 */

import type { DeckSpec, Interval } from "./types.js";

export interface DeckDraft {
  levels: string[][];
  gaps: Interval[];
  z: Interval;
}

export type CardKind = "criterion" | "pair" | "shadow";

export interface ParsedCard {
  kind: CardKind;
  members: string[];
}

export function parseCard(token: string): ParsedCard {
  if (token.startsWith("pair:")) {
    const members = token.slice(5).split("+");
    return { kind: "pair", members };
  }
  if (token.startsWith("shadow:")) {
    return { kind: "shadow", members: [token.slice(7)] };
  }
  return { kind: "criterion", members: [token] };
}

export function fromSpec(spec: DeckSpec): DeckDraft {
  const z: Interval = typeof spec.z === "number" ? [spec.z, spec.z] : [...spec.z];
  return {
    levels: spec.levels.map((level) => [...level]),
    gaps: spec.gaps.map((gap) => [...gap]),
    z,
  };
}

export function toSpec(draft: DeckDraft): DeckSpec {
  const [lo, hi] = draft.z;
  return {
    levels: draft.levels.map((level) => [...level]),
    gaps: draft.gaps.map((gap) => [...gap]),
    z: lo === hi ? lo : [lo, hi],
  };
}

function levelOf(draft: DeckDraft, token: string): number {
  return draft.levels.findIndex((level) => level.includes(token));
}

/** Move a card to another level (least important = level 0). */
export function moveCard(draft: DeckDraft, token: string, target: number): DeckDraft {
  const from = levelOf(draft, token);
  if (from < 0 || target < 0 || target >= draft.levels.length || target === from) {
    return draft;
  }
  const levels = draft.levels.map((level) => level.filter((c) => c !== token));
  levels[target] = [...levels[target]!, token];
  return { ...draft, levels };
}

/** Insert an empty level before `index`, splitting the neighbouring gap. */
export function insertLevel(draft: DeckDraft, index: number): DeckDraft {
  if (index < 0 || index > draft.levels.length) return draft;
  const levels = [...draft.levels.map((level) => [...level])];
  levels.splice(index, 0, []);
  const gaps = [...draft.gaps.map((gap): Interval => [...gap])];
  const at = Math.min(index, gaps.length);
  gaps.splice(at, 0, [0, 0]);
  return { ...draft, levels, gaps };
}

/** Drop an empty level and the gap after it. */
export function removeLevel(draft: DeckDraft, index: number): DeckDraft {
  if (index < 0 || index >= draft.levels.length) return draft;
  if (draft.levels[index]!.length > 0) return draft;
  const levels = draft.levels.filter((_, i) => i !== index);
  const gaps = draft.gaps.filter((_, i) => i !== Math.min(index, draft.gaps.length - 1));
  return { ...draft, levels, gaps };
}

export function setGap(draft: DeckDraft, index: number, gap: Interval): DeckDraft {
  if (index < 0 || index >= draft.gaps.length) return draft;
  const gaps = draft.gaps.map((g, i): Interval => (i === index ? [...gap] : [...g]));
  return { ...draft, gaps };
}

export function setZ(draft: DeckDraft, z: Interval): DeckDraft {
  return { ...draft, z: [...z] };
}

/** Structural errors that block submission; empty when the draft may be
 * posted (the server still owns every numeric feasibility question). */
export function validateDeck(draft: DeckDraft): string[] {
  const errors: string[] = [];
  const populated = draft.levels.filter((level) => level.length > 0);
  if (populated.length < 2) {
    errors.push("a deck needs at least two non-empty levels");
  }
  if (draft.gaps.length !== draft.levels.length - 1) {
    errors.push("one blank-card interval is needed between consecutive levels");
  }
  draft.gaps.forEach(([lo, hi], i) => {
    if (!Number.isInteger(lo) || !Number.isInteger(hi) || lo < 0 || lo > hi) {
      errors.push(`blank-card interval ${i + 1} must be whole numbers with lo ≤ hi`);
    }
  });
  const [zLo, zHi] = draft.z;
  if (!(zLo > 1)) errors.push("the top-to-bottom ratio must exceed 1");
  if (zLo > zHi) errors.push("the ratio interval must have lo ≤ hi");

  const seen = new Set<string>();
  for (const level of draft.levels) {
    for (const token of level) {
      if (seen.has(token)) errors.push(`${token} appears twice`);
      seen.add(token);
    }
  }

  for (const token of seen) {
    const card = parseCard(token);
    const at = levelOf(draft, token);
    if (card.kind === "shadow") {
      const base = card.members[0]!;
      const baseAt = levelOf(draft, `${base}`);
      if (baseAt < 0) {
        errors.push(`shadow card ${token} has no base card`);
      } else if (at >= baseAt) {
        errors.push(`shadow card ${token} must sit below ${base}`);
      }
    }
    if (card.kind === "pair") {
      for (const member of card.members) {
        const memberAt = levelOf(draft, member);
        if (memberAt < 0) {
          errors.push(`pair card ${token} has no card for ${member}`);
        } else if (at <= memberAt) {
          errors.push(`pair card ${token} must sit above ${member}`);
        }
      }
    }
  }
  return errors;
}

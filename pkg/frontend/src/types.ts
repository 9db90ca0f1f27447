/** Service payload shapes, mirrored from the HTTP API. */

export type Interval = [number, number];

export interface DeckSpec {
  levels: string[][];
  gaps: Interval[];
  z: number | Interval;
}

export interface InteractionSpec {
  kind: "strengthening" | "weakening" | "antagonistic";
  first: string;
  second: string;
}

export interface RequirementsSpec {
  exactly_one: boolean;
  min_per_category: Record<string, number>;
  max_per_category: Record<string, number>;
  max_dummy: number | null;
}

export interface HierarchyNode {
  name: string;
  scale?: string;
  simdis?: string;
  children?: HierarchyNode[];
}

export interface DocumentSpec {
  hierarchy: HierarchyNode;
  scales: Record<string, unknown>;
  simdis_functions: Record<string, unknown>;
  actions: Record<string, Record<string, number>>;
  categories: Record<
    string,
    {
      reference_actions: Record<string, Record<string, number>>;
      likeness_thresholds: number | Record<string, number>;
    }
  >;
  dummy_category: string;
  interactions: InteractionSpec[];
  srf: Record<string, Record<string, DeckSpec>>;
  smaa: { samples: number; seed: number; burn_in: number; thinning: number };
  requirements: RequirementsSpec;
}

export interface ProjectRef {
  id: string;
  revision: number;
}

export interface ProjectDetail extends ProjectRef {
  document: DocumentSpec;
}

export interface FeasibilityReport {
  revision: number;
  categories: Record<string, { feasible: boolean; epsilon: number | null }>;
}

export interface NodeCell {
  marginals: Record<string, number>;
  sets: Record<string, { count: number; pct: number }>;
}

export interface Distribution {
  samples: number;
  seed: number;
  categories: string[];
  dummy: string;
  actions: string[];
  nodes: Record<string, Record<string, NodeCell>>;
}

export interface JobStatus {
  job: string;
  status: "queued" | "running" | "done" | "failed";
  revision: number;
  samples: number;
  seed: number;
  result?: Distribution;
  error?: string;
}

export interface ClassifyResult {
  revision: number;
  node: string;
  samples: number;
  seed: number;
  loss: number;
  count: number;
  optima: Record<string, string[]>[];
}

export interface DocumentEdit {
  decks?: Record<string, Record<string, DeckSpec>>;
  likeness_thresholds?: Record<string, number | Record<string, number>>;
  requirements?: RequirementsSpec;
}

export interface WhatIfResult {
  revision: number;
  samples: number;
  seed: number;
  base: Distribution;
  changed: Distribution;
  marginal_deltas: Record<string, Record<string, Record<string, number>>>;
}

export interface PreviewRequest {
  criteria: string[];
  interactions: InteractionSpec[];
  deck: DeckSpec;
  total?: number;
}

export interface PreviewResult {
  unit: number;
  scale: number;
  total: number;
  weights: Record<string, number>;
  pair_values: Record<string, number>;
  shadow_values: Record<string, number>;
  mutual: { first: string; second: string; value: number }[];
  antagonistic: { first: string; second: string; value: number }[];
  net_flows: Record<string, number>;
}

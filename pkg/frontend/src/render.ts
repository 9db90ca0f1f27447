/** DOM construction.
 *
 * Every displayed number is produced by `cell`, which resolves a path in a
 * stored service response and tags the element with `data-src` so tests
 * (and curious users) can trace it back.  Editor widgets that echo user
 * input are wrapped in `data-editor` containers and never display computed
 * numbers.
 */

import { fmt, resolve } from "./format.js";
import type { DeckDraft } from "./deck.js";
import type { Sources, ViewState } from "./state.js";
import type {
  ClassifyResult,
  Distribution,
  DocumentSpec,
  FeasibilityReport,
  HierarchyNode,
  PreviewResult,
  ProjectRef,
  RequirementsSpec,
  WhatIfResult,
} from "./types.js";

export interface Handlers {
  openProject(id: string): void;
  selectNode(node: string): void;
  openDeck(category: string, node: string): void;
  moveCard(token: string, target: number): void;
  setGap(index: number, lo: number, hi: number): void;
  setZ(lo: number, hi: number): void;
  previewDeck(): void;
  saveDeck(): void;
  closeDeck(): void;
  runSampling(samples: number, seed: number): void;
  classify(node: string, samples: number, seed: number): void;
  whatIf(category: string, node: string, value: number): void;
  saveRequirements(requirements: RequirementsSpec): void;
  reload(): void;
}

const noop = () => undefined;

export function withDefaults(partial: Partial<Handlers>): Handlers {
  return {
    openProject: noop,
    selectNode: noop,
    openDeck: noop,
    moveCard: noop,
    setGap: noop,
    setZ: noop,
    previewDeck: noop,
    saveDeck: noop,
    closeDeck: noop,
    runSampling: noop,
    classify: noop,
    whatIf: noop,
    saveRequirements: noop,
    reload: noop,
    ...partial,
  };
}

type Child = Node | string;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  for (const child of children) node.append(child);
  return node;
}

/** A displayed value traced to `<source>:<path>` in a service response. */
function cell(
  sources: Sources,
  source: string,
  path: string,
  tag: keyof HTMLElementTagNameMap = "td",
): HTMLElement {
  const node = el(tag, { "data-src": `${source}:${path}`, class: "num" });
  node.textContent = fmt(resolve(sources.get(source), path));
  return node;
}

function button(label: string, onClick: () => void, cls = "act"): HTMLButtonElement {
  const node = el("button", { class: cls, type: "button", "data-editor": "true" });
  node.textContent = label;
  node.addEventListener("click", onClick);
  return node;
}

function numberInput(name: string, value: number, step = "any"): HTMLInputElement {
  return el("input", {
    type: "number",
    name,
    step,
    value: String(value),
    "data-editor": "true",
  });
}

function inputValue(scope: HTMLElement, name: string): number {
  const node = scope.querySelector<HTMLInputElement>(`input[name="${name}"]`);
  return node === null ? NaN : Number(node.value);
}

function nonElementary(node: HierarchyNode, out: string[] = []): string[] {
  if (node.children !== undefined && node.children.length > 0) {
    out.push(node.name);
    for (const child of node.children) nonElementary(child, out);
  }
  return out;
}

// --- project picker ---------------------------------------------------------

export function renderProjectPicker(sources: Sources, handlers: Handlers): HTMLElement {
  const projects = sources.get("projects") as ProjectRef[];
  const body = el("tbody");
  projects.forEach((project, i) => {
    body.append(
      el(
        "tr",
        {},
        cell(sources, "projects", `${i}.id`, "td"),
        cell(sources, "projects", `${i}.revision`, "td"),
        el("td", {}, button("open", () => handlers.openProject(project.id))),
      ),
    );
  });
  return el(
    "section",
    { class: "picker" },
    el("h2", {}, "projects"),
    el(
      "table",
      {},
      el("thead", {}, el("tr", {}, el("th", {}, "id"), el("th", {}, "rev"), el("th"))),
      body,
    ),
  );
}

// --- feasibility ------------------------------------------------------------

export function renderFeasibility(sources: Sources): HTMLElement {
  const report = sources.get("feasibility") as FeasibilityReport;
  const list = el("ul", { class: "feasibility" });
  for (const category of Object.keys(report.categories).sort()) {
    const entry = report.categories[category]!;
    const item = el(
      "li",
      { class: entry.feasible ? "ok" : "bad" },
      cell(sources, "feasibility", `categories.${category}!`, "span"),
      " feasible ",
      cell(sources, "feasibility", `categories.${category}.feasible`, "span"),
      " · slack ",
      cell(sources, "feasibility", `categories.${category}.epsilon`, "span"),
    );
    list.append(item);
  }
  return el("section", { class: "feasibility-panel" }, el("h3", {}, "deck feasibility"), list);
}

// --- probability explorer ----------------------------------------------------

function renderNodePanel(sources: Sources, node: string, handlers: Handlers): HTMLElement {
  const dist = sources.get("smaa") as Distribution;
  const columns = [...dist.categories, dist.dummy];
  const head = el("tr", {}, el("th", {}, "action"));
  dist.categories.forEach((_, i) => head.append(cell(sources, "smaa", `categories.${i}`, "th")));
  head.append(cell(sources, "smaa", "dummy", "th"));
  head.append(el("th", {}, "assignment sets"));

  const body = el("tbody");
  dist.actions.forEach((action, i) => {
    const row = el("tr", {}, cell(sources, "smaa", `actions.${i}`, "th"));
    for (const column of columns) {
      const marginal = cell(sources, "smaa", `nodes.${node}.${action}.marginals.${column}`);
      const pct = dist.nodes[node]![action]!.marginals[column]!;
      marginal.style.background = `rgba(31, 119, 180, ${(pct / 250).toFixed(3)})`;
      row.append(marginal);
    }
    const sets = el("td", { class: "sets" });
    for (const label of Object.keys(dist.nodes[node]![action]!.sets).sort()) {
      sets.append(
        el(
          "span",
          { class: "set" },
          cell(sources, "smaa", `nodes.${node}.${action}.sets.${label}!`, "span"),
          " ",
          cell(sources, "smaa", `nodes.${node}.${action}.sets.${label}.pct`, "span"),
        ),
      );
    }
    row.append(sets);
    body.append(row);
  });

  return el(
    "section",
    { class: "node-panel", "data-node": node },
    el(
      "h3",
      {},
      cell(sources, "smaa", `nodes.${node}!`, "span"),
      button("focus", () => handlers.selectNode(node), "focus"),
    ),
    el("table", {}, el("thead", {}, head), body),
  );
}

export function renderExplorer(sources: Sources, handlers: Handlers): HTMLElement {
  const dist = sources.get("smaa") as Distribution;
  const wrap = el(
    "section",
    { class: "explorer" },
    el(
      "h2",
      {},
      "assignment probabilities · ",
      cell(sources, "smaa", "samples", "span"),
      " samples · seed ",
      cell(sources, "smaa", "seed", "span"),
    ),
  );
  for (const node of Object.keys(dist.nodes)) {
    wrap.append(renderNodePanel(sources, node, handlers));
  }
  return wrap;
}

// --- what-if ----------------------------------------------------------------

export function renderWhatIf(sources: Sources, node: string): HTMLElement {
  const result = sources.get("whatif") as WhatIfResult;
  const columns = [...result.base.categories, result.base.dummy];
  const head = el("tr", {}, el("th", {}, "action"));
  for (let i = 0; i < columns.length; i += 1) {
    const source =
      i < result.base.categories.length ? `base.categories.${i}` : "base.dummy";
    const th = el("th", { class: "group" }, cell(sources, "whatif", source, "span"));
    th.setAttribute("colspan", "3");
    head.append(th);
  }
  const subHead = el("tr", {}, el("th"));
  for (const _ of columns) {
    subHead.append(el("th", {}, "base"), el("th", {}, "changed"), el("th", {}, "Δ"));
  }

  const body = el("tbody");
  result.base.actions.forEach((action, i) => {
    const row = el("tr", {}, cell(sources, "whatif", `base.actions.${i}`, "th"));
    for (const column of columns) {
      row.append(
        cell(sources, "whatif", `base.nodes.${node}.${action}.marginals.${column}`),
        cell(sources, "whatif", `changed.nodes.${node}.${action}.marginals.${column}`),
        cell(sources, "whatif", `marginal_deltas.${node}.${action}.${column}`),
      );
    }
    body.append(row);
  });

  return el(
    "section",
    { class: "whatif-result" },
    el(
      "h3",
      {},
      "what-if at ",
      cell(sources, "whatif", `marginal_deltas.${node}!`, "span"),
      " · ",
      cell(sources, "whatif", "samples", "span"),
      " samples",
    ),
    el("table", {}, el("thead", {}, head, subHead), body),
  );
}

// --- classification ----------------------------------------------------------

export function renderClassification(sources: Sources): HTMLElement {
  const result = sources.get("classify") as ClassifyResult;
  const actions = Object.keys(result.optima[0] ?? {}).sort();
  const head = el("tr", {});
  for (const action of actions) {
    head.append(cell(sources, "classify", `optima.0.${action}!`, "th"));
  }
  const body = el("tbody");
  result.optima.forEach((_, i) => {
    const row = el("tr", {});
    for (const action of actions) {
      row.append(cell(sources, "classify", `optima.${i}.${action}`));
    }
    body.append(row);
  });
  return el(
    "section",
    { class: "classification" },
    el(
      "h3",
      {},
      "loss-minimal classifications at ",
      cell(sources, "classify", "node", "span"),
    ),
    el(
      "p",
      {},
      "loss ",
      cell(sources, "classify", "loss", "span"),
      " · optima ",
      cell(sources, "classify", "count", "span"),
      " · ",
      cell(sources, "classify", "samples", "span"),
      " samples · seed ",
      cell(sources, "classify", "seed", "span"),
    ),
    el("table", {}, el("thead", {}, head), body),
  );
}

// --- deck editor ---------------------------------------------------------------

export function renderDeckEditor(
  sources: Sources,
  state: ViewState,
  handlers: Handlers,
): HTMLElement {
  const editing = state.editing!;
  const draft = state.deckDraft!;
  const box = el("section", { class: "deck-editor", "data-editor": "true" });
  box.append(
    el(
      "h3",
      {},
      "deck · ",
      cell(sources, "project", `document.categories.${editing.category}!`, "span"),
      " / ",
      cell(sources, "project", `document.srf.${editing.category}.${editing.node}!`, "span"),
    ),
  );

  const levels = el("div", { class: "levels" });
  for (let index = draft.levels.length - 1; index >= 0; index -= 1) {
    const row = el("div", { class: "level", "data-level": String(index) });
    for (const token of draft.levels[index]!) {
      const chip = el("span", { class: "chip", draggable: "true" }, token);
      chip.addEventListener("dragstart", (event) => {
        (event as DragEvent).dataTransfer?.setData("text/plain", token);
      });
      row.append(
        chip,
        button("raise", () => handlers.moveCard(token, index + 1), "mini"),
        button("lower", () => handlers.moveCard(token, index - 1), "mini"),
      );
    }
    row.addEventListener("dragover", (event) => event.preventDefault());
    row.addEventListener("drop", (event) => {
      event.preventDefault();
      const token = (event as DragEvent).dataTransfer?.getData("text/plain");
      if (token !== undefined && token !== "") handlers.moveCard(token, index);
    });
    levels.append(row);
    if (index > 0) {
      const gap = draft.gaps[index - 1]!;
      const lo = numberInput(`gap-lo-${index - 1}`, gap[0], "1");
      const hi = numberInput(`gap-hi-${index - 1}`, gap[1], "1");
      const update = () =>
        handlers.setGap(index - 1, Number(lo.value), Number(hi.value));
      lo.addEventListener("change", update);
      hi.addEventListener("change", update);
      levels.append(el("div", { class: "gap" }, "blank cards ", lo, " to ", hi));
    }
  }
  box.append(levels);

  const zLo = numberInput("z-lo", draft.z[0]);
  const zHi = numberInput("z-hi", draft.z[1]);
  const updateZ = () => handlers.setZ(Number(zLo.value), Number(zHi.value));
  zLo.addEventListener("change", updateZ);
  zHi.addEventListener("change", updateZ);
  box.append(el("div", { class: "ratio" }, "extreme-importance ratio ", zLo, " to ", zHi));

  const errors = el("ul", { class: "deck-errors" });
  for (const message of state.deckErrors) errors.append(el("li", {}, message));
  box.append(errors);

  box.append(
    el(
      "div",
      { class: "deck-actions" },
      button("preview weights", () => handlers.previewDeck()),
      button("save deck", () => handlers.saveDeck()),
      button("close", () => handlers.closeDeck()),
    ),
  );
  return box;
}

// --- deck preview -------------------------------------------------------------

export function renderPreview(sources: Sources): HTMLElement {
  const preview = sources.get("preview") as PreviewResult;
  const box = el("section", { class: "preview" }, el("h3", {}, "deck preview"));
  box.append(
    el(
      "p",
      {},
      "unit ",
      cell(sources, "preview", "unit", "span"),
      " · scale ",
      cell(sources, "preview", "scale", "span"),
      " · total ",
      cell(sources, "preview", "total", "span"),
    ),
  );

  const weightHead = el(
    "tr",
    {},
    el("th", {}, "criterion"),
    el("th", {}, "weight"),
    el("th", {}, "net flow"),
  );
  const weightBody = el("tbody");
  for (const name of Object.keys(preview.weights).sort()) {
    weightBody.append(
      el(
        "tr",
        {},
        cell(sources, "preview", `weights.${name}!`, "th"),
        cell(sources, "preview", `weights.${name}`),
        cell(sources, "preview", `net_flows.${name}`),
      ),
    );
  }
  box.append(
    el("table", { class: "preview-weights" }, el("thead", {}, weightHead), weightBody),
  );

  const extras = el("tbody");
  for (const name of Object.keys(preview.shadow_values).sort()) {
    extras.append(
      el(
        "tr",
        {},
        el("th", {}, "shadow of ", cell(sources, "preview", `shadow_values.${name}!`, "span")),
        cell(sources, "preview", `shadow_values.${name}`),
      ),
    );
  }
  for (const name of Object.keys(preview.pair_values).sort()) {
    extras.append(
      el(
        "tr",
        {},
        el("th", {}, "pair card ", cell(sources, "preview", `pair_values.${name}!`, "span")),
        cell(sources, "preview", `pair_values.${name}`),
      ),
    );
  }
  preview.mutual.forEach((entry, i) => {
    extras.append(
      el(
        "tr",
        {},
        el(
          "th",
          {},
          "interaction ",
          cell(sources, "preview", `mutual.${i}.first`, "span"),
          " with ",
          cell(sources, "preview", `mutual.${i}.second`, "span"),
        ),
        cell(sources, "preview", `mutual.${i}.value`),
      ),
    );
  });
  preview.antagonistic.forEach((entry, i) => {
    extras.append(
      el(
        "tr",
        {},
        el(
          "th",
          {},
          "antagonism on ",
          cell(sources, "preview", `antagonistic.${i}.first`, "span"),
          " from ",
          cell(sources, "preview", `antagonistic.${i}.second`, "span"),
        ),
        cell(sources, "preview", `antagonistic.${i}.value`),
      ),
    );
  });
  box.append(el("table", { class: "preview-extras" }, extras));
  return box;
}

// --- forms --------------------------------------------------------------------

function samplingForm(document_: DocumentSpec, handlers: Handlers): HTMLElement {
  const box = el("div", { class: "run-controls", "data-editor": "true" });
  const samples = numberInput("samples", document_.smaa.samples, "1");
  const seed = numberInput("seed", document_.smaa.seed, "1");
  box.append(
    "samples ",
    samples,
    " seed ",
    seed,
    button("run sampling", () =>
      handlers.runSampling(Number(samples.value), Number(seed.value)),
    ),
  );
  return box;
}

function classifyForm(
  document_: DocumentSpec,
  sources: Sources,
  handlers: Handlers,
): HTMLElement {
  const box = el("div", { class: "classify-controls", "data-editor": "true" });
  const select = el("select", { name: "classify-node" });
  for (const node of nonElementary(document_.hierarchy)) {
    select.append(el("option", { value: node }, node));
  }
  const samples = numberInput("classify-samples", document_.smaa.samples, "1");
  const seed = numberInput("classify-seed", document_.smaa.seed, "1");
  box.append(
    "node ",
    select,
    " samples ",
    samples,
    " seed ",
    seed,
    button("classify", () =>
      handlers.classify(select.value, Number(samples.value), Number(seed.value)),
    ),
  );
  return box;
}

function requirementsForm(document_: DocumentSpec, handlers: Handlers): HTMLElement {
  const current = document_.requirements;
  const actionCount = Object.keys(document_.actions).length;
  const box = el("div", { class: "requirements", "data-editor": "true" });
  const categories = Object.keys(document_.categories).sort();
  const mins = new Map<string, HTMLInputElement>();
  const maxes = new Map<string, HTMLInputElement>();
  for (const category of categories) {
    const min = numberInput(`min-${category}`, current.min_per_category[category] ?? 0, "1");
    const max = numberInput(
      `max-${category}`,
      current.max_per_category[category] ?? actionCount,
      "1",
    );
    mins.set(category, min);
    maxes.set(category, max);
    box.append(el("span", { class: "req" }, `${category} between `, min, " and ", max, " "));
  }
  const maxDummy = numberInput("max-dummy", current.max_dummy ?? actionCount, "1");
  const exactlyOne = el("input", {
    type: "checkbox",
    name: "exactly-one",
    "data-editor": "true",
  });
  exactlyOne.checked = current.exactly_one;
  box.append(
    " unassigned at most ",
    maxDummy,
    " · one category per action ",
    exactlyOne,
    button("save requirements", () =>
      handlers.saveRequirements({
        exactly_one: exactlyOne.checked,
        min_per_category: Object.fromEntries(
          categories.map((c) => [c, Number(mins.get(c)!.value)]),
        ),
        max_per_category: Object.fromEntries(
          categories.map((c) => [c, Number(maxes.get(c)!.value)]),
        ),
        max_dummy: Number(maxDummy.value),
      }),
    ),
  );
  return box;
}

function whatIfForm(document_: DocumentSpec, handlers: Handlers): HTMLElement {
  const box = el("div", { class: "whatif-controls", "data-editor": "true" });
  const category = el("select", { name: "whatif-category" });
  for (const name of Object.keys(document_.categories).sort()) {
    category.append(el("option", { value: name }, name));
  }
  const node = el("select", { name: "whatif-node" });
  for (const name of nonElementary(document_.hierarchy)) {
    node.append(el("option", { value: name }, name));
  }
  const threshold = numberInput("whatif-threshold", 0.8);
  box.append(
    "raise threshold of ",
    category,
    " at ",
    node,
    " to ",
    threshold,
    button("compare", () =>
      handlers.whatIf(category.value, node.value, Number(threshold.value)),
    ),
  );
  return box;
}

function deckList(
  sources: Sources,
  document_: DocumentSpec,
  handlers: Handlers,
): HTMLElement {
  const box = el("div", { class: "deck-list" });
  for (const category of Object.keys(document_.srf).sort()) {
    const row = el(
      "div",
      { class: "deck-row" },
      cell(sources, "project", `document.srf.${category}!`, "span"),
    );
    for (const node of Object.keys(document_.srf[category]!)) {
      row.append(button(`edit ${node}`, () => handlers.openDeck(category, node), "mini"));
    }
    box.append(row);
  }
  return box;
}

// --- whole screen ---------------------------------------------------------------

export function renderApp(
  sources: Sources,
  state: ViewState,
  partial: Partial<Handlers> = {},
): HTMLElement {
  const handlers = withDefaults(partial);
  const root = el("main", { class: "app" });

  if (state.conflict) {
    root.append(
      el(
        "div",
        { class: "conflict" },
        "another change to this project landed first — reload to continue ",
        button("reload", () => handlers.reload()),
      ),
    );
  }

  if (!sources.has("project")) {
    if (sources.has("projects")) root.append(renderProjectPicker(sources, handlers));
    return root;
  }

  const document_ = (sources.get("project") as { document: DocumentSpec }).document;
  root.append(
    el(
      "header",
      {},
      el(
        "h2",
        {},
        "project ",
        cell(sources, "project", "id", "span"),
        " · revision ",
        cell(sources, "project", "revision", "span"),
      ),
    ),
  );

  root.append(deckList(sources, document_, handlers));
  if (state.editing !== null && state.deckDraft !== null) {
    root.append(renderDeckEditor(sources, state, handlers));
  }
  if (sources.has("preview")) root.append(renderPreview(sources));
  if (sources.has("feasibility")) root.append(renderFeasibility(sources));

  root.append(samplingForm(document_, handlers));
  if (sources.has("job")) {
    root.append(
      el(
        "p",
        { class: "job" },
        "sampling ",
        cell(sources, "job", "status", "span"),
        " · ",
        cell(sources, "job", "samples", "span"),
        " samples · seed ",
        cell(sources, "job", "seed", "span"),
      ),
    );
  }
  if (sources.has("smaa")) root.append(renderExplorer(sources, handlers));

  root.append(whatIfForm(document_, handlers));
  if (sources.has("whatif")) {
    const dist = sources.get("whatif") as WhatIfResult;
    const node =
      state.selectedNode !== null && state.selectedNode in dist.marginal_deltas
        ? state.selectedNode
        : Object.keys(dist.marginal_deltas)[0]!;
    root.append(renderWhatIf(sources, node));
  }

  root.append(requirementsForm(document_, handlers));
  root.append(classifyForm(document_, sources, handlers));
  if (sources.has("classify")) root.append(renderClassification(sources));

  return root;
}

/** Application controller: owns the API client, the stored service
 * responses, and the view state; re-renders after every transition.
 *
 * All numbers shown to the user come from stored responses — the
 * controller never post-processes a numeric result.
 */

import { Api, ApiError } from "./api.js";
import {
  fromSpec,
  moveCard,
  setGap,
  setZ,
  toSpec,
  validateDeck,
} from "./deck.js";
import { renderApp, type Handlers } from "./render.js";
import { initialState, Sources, type ViewState } from "./state.js";
import type {
  DocumentSpec,
  InteractionSpec,
  JobStatus,
  ProjectDetail,
  RequirementsSpec,
} from "./types.js";

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export interface AppOptions {
  root: HTMLElement;
  api?: Api;
  /** Delay between job polls, milliseconds.  Tests pass 0. */
  pollDelay?: number;
}

export class App {
  readonly api: Api;
  readonly root: HTMLElement;
  readonly sources = new Sources();
  state: ViewState = initialState();
  private readonly pollDelay: number;

  constructor(options: AppOptions) {
    this.api = options.api ?? new Api();
    this.root = options.root;
    this.pollDelay = options.pollDelay ?? 400;
  }

  render(): void {
    this.root.replaceChildren(renderApp(this.sources, this.state, this.handlers()));
  }

  private handlers(): Partial<Handlers> {
    return {
      openProject: (id) => void this.open(id),
      selectNode: (node) => {
        this.state.selectedNode = node;
        this.render();
      },
      openDeck: (category, node) => this.openDeck(category, node),
      moveCard: (token, target) => this.editDraft((d) => moveCard(d, token, target)),
      setGap: (index, lo, hi) => this.editDraft((d) => setGap(d, index, [lo, hi])),
      setZ: (lo, hi) => this.editDraft((d) => setZ(d, [lo, hi])),
      previewDeck: () => void this.previewDeck(),
      saveDeck: () => void this.saveDeck(),
      closeDeck: () => {
        this.state.editing = null;
        this.state.deckDraft = null;
        this.state.deckErrors = [];
        this.sources.delete("preview");
        this.render();
      },
      runSampling: (samples, seed) => void this.runSampling(samples, seed),
      classify: (node, samples, seed) => void this.classify(node, samples, seed),
      whatIf: (category, node, value) => void this.whatIf(category, node, value),
      saveRequirements: (requirements) => void this.saveRequirements(requirements),
      reload: () => void this.reload(),
    };
  }

  private document(): DocumentSpec {
    return (this.sources.get("project") as ProjectDetail).document;
  }

  async boot(): Promise<void> {
    this.sources.set("projects", await this.api.listProjects());
    this.render();
  }

  async open(id: string): Promise<void> {
    const detail = await this.api.getProject(id);
    this.sources.set("project", detail);
    this.state = initialState();
    this.state.projectId = id;
    this.state.revision = detail.revision;
    this.state.selectedNode = detail.document.hierarchy.name;
    await this.refreshFeasibility();
    this.render();
  }

  async refreshFeasibility(): Promise<void> {
    if (this.state.projectId === null) return;
    this.sources.set("feasibility", await this.api.feasibility(this.state.projectId));
  }

  async runSampling(samples: number, seed: number): Promise<void> {
    const id = this.state.projectId!;
    let job: JobStatus = await this.api.startSampling(id, samples, seed);
    this.state.jobId = job.job;
    this.state.jobStatus = job.status;
    while (job.status === "queued" || job.status === "running") {
      await sleep(this.pollDelay);
      job = await this.api.job(id, job.job);
    }
    this.sources.set("job", job);
    this.state.jobStatus = job.status;
    if (job.status === "done" && job.result !== undefined) {
      this.sources.set("smaa", job.result);
    }
    this.render();
  }

  async classify(node: string, samples: number, seed: number): Promise<void> {
    this.sources.set(
      "classify",
      await this.api.classify(this.state.projectId!, node, samples, seed),
    );
    this.render();
  }

  async whatIf(category: string, node: string, value: number): Promise<void> {
    const smaa = this.document().smaa;
    this.sources.set(
      "whatif",
      await this.api.whatIf(
        this.state.projectId!,
        { likeness_thresholds: { [category]: { [node]: value } } },
        smaa.samples,
        smaa.seed,
      ),
    );
    this.state.selectedNode = node;
    this.render();
  }

  openDeck(category: string, node: string): void {
    this.state.editing = { category, node };
    this.state.deckDraft = fromSpec(this.document().srf[category]![node]!);
    this.state.deckErrors = [];
    this.render();
  }

  private editDraft(update: (draft: NonNullable<ViewState["deckDraft"]>) => NonNullable<ViewState["deckDraft"]>): void {
    if (this.state.deckDraft === null) return;
    this.state.deckDraft = update(this.state.deckDraft);
    this.state.deckErrors = validateDeck(this.state.deckDraft);
    this.render();
  }

  /** Criteria priced by the deck being edited: the node's children. */
  private editedCriteria(): string[] {
    const node = this.state.editing!.node;
    const find = (h: DocumentSpec["hierarchy"]): string[] | null => {
      if (h.name === node) return (h.children ?? []).map((c) => c.name);
      for (const child of h.children ?? []) {
        const found = find(child);
        if (found !== null) return found;
      }
      return null;
    };
    return find(this.document().hierarchy) ?? [];
  }

  private editedInteractions(): InteractionSpec[] {
    const criteria = new Set(this.editedCriteria());
    return this.document().interactions.filter(
      (entry) => criteria.has(entry.first) && criteria.has(entry.second),
    );
  }

  async previewDeck(): Promise<void> {
    const draft = this.state.deckDraft;
    if (draft === null) return;
    const errors = validateDeck(draft);
    this.state.deckErrors = errors;
    if (errors.length > 0) {
      this.render();
      return;
    }
    this.sources.set(
      "preview",
      await this.api.preview({
        criteria: this.editedCriteria(),
        interactions: this.editedInteractions(),
        deck: toSpec(draft),
      }),
    );
    this.render();
  }

  /** Apply a PATCH; on a revision race flag the conflict for the reload
   * prompt, on success re-read the document and feasibility report. */
  private async patchDocument(edit: Parameters<Api["editDocument"]>[1]): Promise<boolean> {
    try {
      const ref = await this.api.editDocument(this.state.projectId!, edit);
      this.state.revision = ref.revision;
      this.sources.set("project", await this.api.getProject(this.state.projectId!));
      await this.refreshFeasibility();
      return true;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.state.conflict = true;
        return false;
      }
      throw error;
    }
  }

  async saveDeck(): Promise<void> {
    const draft = this.state.deckDraft;
    const editing = this.state.editing;
    if (draft === null || editing === null) return;
    const errors = validateDeck(draft);
    this.state.deckErrors = errors;
    if (errors.length > 0) {
      this.render();
      return;
    }
    const saved = await this.patchDocument({
      decks: { [editing.category]: { [editing.node]: toSpec(draft) } },
    });
    if (saved) {
      this.state.editing = null;
      this.state.deckDraft = null;
    }
    this.render();
  }

  async saveRequirements(requirements: RequirementsSpec): Promise<void> {
    await this.patchDocument({ requirements });
    this.render();
  }

  async reload(): Promise<void> {
    const id = this.state.projectId;
    this.state.conflict = false;
    if (id !== null) await this.open(id);
  }
}

export function mount(root: HTMLElement, options: Omit<AppOptions, "root"> = {}): App {
  const app = new App({ root, ...options });
  void app.boot();
  return app;
}

"""HTTP service: stored projects, sampling jobs, classification, what-ifs.

Projects live in one directory each (document plus result manifests) and
carry a revision counter; every computed response names the revision it
was computed against, and caches are keyed by it, so a document change
invalidates them wholesale.  Mutations take a per-project lock —
concurrent writers get 409 — while reads and sampling jobs run freely.
Sampling runs execute on a bounded worker pool and are polled by job id.

Status codes: 404 for unknown projects or jobs, 409 for write conflicts
and for domain dead-ends (infeasible decks or requirements, missing
distributions), 422 for documents or edits that fail validation, with
the same diagnostics the ``check`` command prints.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Mapping, Optional, Union

from fastapi import Body, Depends, FastAPI, Header, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from .cli import (
    InfeasibleCategory,
    compute_distribution,
    distribution_from_payload,
    distribution_payload,
    feasibility_reports,
)
from .document import (
    DeckDoc,
    DocumentError,
    InteractionDoc,
    ProblemDocument,
    RequirementsDoc,
    _card_from_spec,
    document_hierarchy,
    document_problem,
    document_systems,
    parse_document,
    serialize_document,
)
from .hierarchy import CriteriaHierarchy, Scale, SimDisFunction, ValidationError
from .robust import InfeasibleRequirements, enumerate_optima
from .srf import CardDeck, InteractionDecl, srf_deterministic


# ---------------------------------------------------------------------------
# Request bodies
# ---------------------------------------------------------------------------


class DocumentEdit(BaseModel):
    """Partial update: swap decks, likeness thresholds, or requirements.

    ``likeness_thresholds`` accepts a scalar per category or a per-node
    map; a partial map merges into the thresholds already stored.
    """

    model_config = ConfigDict(extra="forbid")

    decks: Optional[dict[str, dict[str, DeckDoc]]] = None
    likeness_thresholds: Optional[dict[str, Union[float, dict[str, float]]]] = None
    requirements: Optional[RequirementsDoc] = None

    def empty(self) -> bool:
        return (
            self.decks is None
            and self.likeness_thresholds is None
            and self.requirements is None
        )


class SampleRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    samples: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None


class ClassifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    node: Optional[str] = None
    samples: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    requirements: Optional[RequirementsDoc] = None


class WhatIfRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    delta: DocumentEdit
    samples: int = Field(default=5_000, ge=1)
    seed: Optional[int] = None


class PreviewRequest(BaseModel):
    """A stand-alone deck over named criteria, solved deterministically."""

    model_config = ConfigDict(extra="forbid")

    criteria: list[str] = Field(min_length=2)
    interactions: list[InteractionDoc] = Field(default_factory=list)
    deck: DeckDoc
    total: float = Field(default=100.0, gt=0)


# ---------------------------------------------------------------------------
# Storage
# ---------------------------------------------------------------------------


class ProjectState:
    """One stored project: document, revision, caches, and its write lock."""

    def __init__(self, pid: str, directory: Path, doc: ProblemDocument, revision: int):
        self.id = pid
        self.directory = directory
        self.document = doc
        self.revision = revision
        self.lock = threading.Lock()
        #: (revision, samples, seed) -> distribution payload
        self.distributions: dict[tuple[int, int, int], dict] = {}
        #: revision -> per-category feasibility payload
        self.feasibility: dict[int, dict] = {}
        #: (revision, samples, seed, node, requirements json) -> payload
        self.classifications: dict[tuple, dict] = {}


class ProjectStore:
    """Registry of projects, one directory per project under ``root``."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self._guard = threading.Lock()
        self._projects: dict[str, ProjectState] = {}
        if self.root.is_dir():
            for meta_path in sorted(self.root.glob("*/meta.json")):
                pid = meta_path.parent.name
                meta = json.loads(meta_path.read_text())
                doc = parse_document((meta_path.parent / "document.json").read_text())
                self._projects[pid] = ProjectState(
                    pid, meta_path.parent, doc, int(meta["revision"])
                )

    def create(self, doc: ProblemDocument) -> ProjectState:
        pid = uuid.uuid4().hex[:12]
        state = ProjectState(pid, self.root / pid, doc, revision=1)
        with self._guard:
            self._projects[pid] = state
        self.persist(state)
        return state

    def get(self, pid: str) -> ProjectState:
        with self._guard:
            if pid not in self._projects:
                raise KeyError(pid)
            return self._projects[pid]

    def all(self) -> list[ProjectState]:
        with self._guard:
            return sorted(self._projects.values(), key=lambda s: s.id)

    def persist(self, state: ProjectState) -> None:
        state.directory.mkdir(parents=True, exist_ok=True)
        (state.directory / "document.json").write_text(
            serialize_document(state.document)
        )
        (state.directory / "meta.json").write_text(
            json.dumps({"id": state.id, "revision": state.revision}, indent=2) + "\n"
        )

    def write_manifest(self, state: ProjectState, name: str, payload: dict) -> None:
        results = state.directory / "results"
        results.mkdir(parents=True, exist_ok=True)
        (results / name).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )

    def read_manifest(self, state: ProjectState, name: str) -> Optional[dict]:
        path = state.directory / "results" / name
        if not path.exists():
            return None
        return json.loads(path.read_text())


class Job:
    """One sampling run; polled until ``done`` or ``failed``."""

    def __init__(self, jid: str, project: str, revision: int, samples: int, seed: int):
        self.id = jid
        self.project = project
        self.revision = revision
        self.samples = samples
        self.seed = seed
        self.status = "queued"
        self.result: Optional[dict] = None
        self.error: Optional[str] = None

    def response(self) -> dict:
        out = {
            "job": self.id,
            "status": self.status,
            "revision": self.revision,
            "samples": self.samples,
            "seed": self.seed,
        }
        if self.status == "done":
            out["result"] = self.result
        if self.status == "failed":
            out["error"] = self.error
        return out


# ---------------------------------------------------------------------------
# Document helpers
# ---------------------------------------------------------------------------


def _validated(data) -> ProblemDocument:
    """Parse and cross-check a document, mapping failures to 422."""
    try:
        doc = parse_document(data)
        document_problem(doc)
        document_systems(doc)  # resolves every deck against the hierarchy
        return doc
    except (DocumentError, ValidationError) as e:
        raise HTTPException(status_code=422, detail=str(e))


def _merged_thresholds(doc: ProblemDocument, existing, incoming):
    if not isinstance(incoming, Mapping):
        return incoming
    h = document_hierarchy(doc)
    if isinstance(existing, Mapping):
        merged = dict(existing)
    else:
        merged = {h.name(nid): existing for nid in h.non_elementary()}
    merged.update(incoming)
    return merged


def _edited(doc: ProblemDocument, edit: DocumentEdit) -> ProblemDocument:
    data = json.loads(serialize_document(doc))
    if edit.decks:
        for cat, per_node in edit.decks.items():
            target = data.setdefault("srf", {}).setdefault(cat, {})
            for node, deck in per_node.items():
                target[node] = deck.model_dump(mode="json")
    if edit.likeness_thresholds:
        for cat, lam in edit.likeness_thresholds.items():
            if cat not in data["categories"]:
                raise HTTPException(
                    status_code=422, detail=f"unknown category {cat!r}"
                )
            data["categories"][cat]["likeness_thresholds"] = _merged_thresholds(
                doc, data["categories"][cat]["likeness_thresholds"], lam
            )
    if edit.requirements is not None:
        data["requirements"] = edit.requirements.model_dump(mode="json")
    return _validated(data)


def _feasibility_payload(doc: ProblemDocument) -> dict:
    try:
        _, _, reports = feasibility_reports(doc)
    except (DocumentError, ValidationError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    return {
        cat: {
            "feasible": rep.feasible,
            "epsilon": rep.epsilon if rep.feasible else None,
        }
        for cat, rep in reports.items()
    }


def _marginal_deltas(base: dict, changed: dict) -> dict:
    deltas: dict[str, dict] = {}
    for node, per_action in base["nodes"].items():
        deltas[node] = {}
        for a, cells in per_action.items():
            after = changed["nodes"][node][a]["marginals"]
            deltas[node][a] = {
                cat: round(after[cat] - before, 3)
                for cat, before in cells["marginals"].items()
            }
    return deltas


def _requirements_key(req: Optional[RequirementsDoc]) -> str:
    if req is None:
        return "document"
    return json.dumps(req.model_dump(mode="json"), sort_keys=True)


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------


def create_app(
    storage: "str | Path | None" = None,
    max_workers: int = 2,
    token: Optional[str] = None,
) -> FastAPI:
    """Build the service around a storage directory.

    ``storage`` defaults to ``$SIMCAT_DATA`` (or ``./simcat-data``); a
    static bearer token is required when ``token`` (or ``$SIMCAT_TOKEN``)
    is set.  ``max_workers`` bounds concurrent sampling runs.
    """
    root = Path(storage) if storage is not None else Path(
        os.environ.get("SIMCAT_DATA", "simcat-data")
    )
    token = token if token is not None else os.environ.get("SIMCAT_TOKEN")

    def _auth(authorization: Optional[str] = Header(default=None)) -> None:
        if token and authorization != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or wrong token")

    app = FastAPI(title="simcat", dependencies=[Depends(_auth)])
    app.state.store = ProjectStore(root)
    app.state.executor = ThreadPoolExecutor(max_workers=max_workers)
    app.state.jobs = {}
    app.state.jobs_lock = threading.Lock()
    store: ProjectStore = app.state.store

    def _project(pid: str) -> ProjectState:
        try:
            return store.get(pid)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no project {pid!r}")

    def _dist_key(doc: ProblemDocument, samples, seed) -> tuple[int, int]:
        n = samples if samples is not None else doc.smaa.samples
        s = seed if seed is not None else doc.smaa.seed
        return n, s

    def _dist_name(revision: int, n: int, s: int) -> str:
        return f"smaa_r{revision}_n{n}_s{s}.json"

    def _cached_distribution(state: ProjectState, key) -> Optional[dict]:
        payload = state.distributions.get(key)
        if payload is None:
            payload = store.read_manifest(state, _dist_name(*key))
            if payload is not None:
                state.distributions[key] = payload
        return payload

    def _run_job(job: Job, state: ProjectState, doc: ProblemDocument) -> None:
        job.status = "running"
        try:
            dist = compute_distribution(doc, job.samples, job.seed)
            payload = distribution_payload(dist, job.seed)
            key = (job.revision, job.samples, job.seed)
            state.distributions[key] = payload
            store.write_manifest(state, _dist_name(*key), payload)
            job.result = payload
            job.status = "done"
        except Exception as e:  # surfaced to the poller, not the log
            job.error = str(e)
            job.status = "failed"

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/projects", status_code=201)
    def create_project(document: dict = Body(...)) -> dict:
        doc = _validated(document)
        state = store.create(doc)
        return {"id": state.id, "revision": state.revision}

    @app.get("/projects")
    def list_projects() -> list[dict]:
        return [{"id": s.id, "revision": s.revision} for s in store.all()]

    @app.get("/projects/{pid}")
    def get_project(pid: str) -> dict:
        state = _project(pid)
        return {
            "id": state.id,
            "revision": state.revision,
            "document": json.loads(serialize_document(state.document)),
        }

    def _mutate(state: ProjectState, build) -> dict:
        if not state.lock.acquire(blocking=False):
            raise HTTPException(
                status_code=409,
                detail="another change to this project is in flight",
            )
        try:
            state.document = build()
            state.revision += 1
            store.persist(state)
            return {"id": state.id, "revision": state.revision}
        finally:
            state.lock.release()

    @app.put("/projects/{pid}/document")
    def replace_document(pid: str, document: dict = Body(...)) -> dict:
        state = _project(pid)
        return _mutate(state, lambda: _validated(document))

    @app.patch("/projects/{pid}/document")
    def edit_document(pid: str, edit: DocumentEdit) -> dict:
        state = _project(pid)
        if edit.empty():
            raise HTTPException(status_code=422, detail="the edit changes nothing")
        return _mutate(state, lambda: _edited(state.document, edit))

    @app.get("/projects/{pid}/feasibility")
    def feasibility(pid: str) -> dict:
        state = _project(pid)
        revision = state.revision
        cached = state.feasibility.get(revision)
        if cached is None:
            cached = _feasibility_payload(state.document)
            state.feasibility = {revision: cached}
            store.write_manifest(
                state,
                f"feasibility_r{revision}.json",
                {"revision": revision, "categories": cached},
            )
        return {"revision": revision, "categories": cached}

    @app.post("/projects/{pid}/smaa", status_code=202)
    def start_smaa(pid: str, body: SampleRequest = SampleRequest()) -> dict:
        state = _project(pid)
        doc = state.document
        revision = state.revision
        n, s = _dist_key(doc, body.samples, body.seed)
        job = Job(uuid.uuid4().hex[:12], pid, revision, n, s)
        with app.state.jobs_lock:
            app.state.jobs[job.id] = job
        cached = _cached_distribution(state, (revision, n, s))
        if cached is not None:
            job.result = cached
            job.status = "done"
        else:
            app.state.executor.submit(_run_job, job, state, doc)
        return job.response()

    @app.get("/projects/{pid}/smaa/{jid}")
    def poll_smaa(pid: str, jid: str) -> dict:
        _project(pid)
        with app.state.jobs_lock:
            job = app.state.jobs.get(jid)
        if job is None or job.project != pid:
            raise HTTPException(status_code=404, detail=f"no job {jid!r}")
        return job.response()

    @app.post("/projects/{pid}/classify")
    def classify(pid: str, body: ClassifyRequest = ClassifyRequest()) -> dict:
        state = _project(pid)
        doc = state.document
        revision = state.revision
        n, s = _dist_key(doc, body.samples, body.seed)
        node = body.node if body.node is not None else doc.hierarchy.name
        key = (revision, n, s, node, _requirements_key(body.requirements))
        cached = state.classifications.get(key)
        if cached is not None:
            return cached

        payload = _cached_distribution(state, (revision, n, s))
        if payload is None:
            raise HTTPException(
                status_code=409,
                detail=(
                    f"no distribution sampled at revision {revision} with "
                    f"samples={n}, seed={s}; start a sampling job first"
                ),
            )
        dist = distribution_from_payload(payload)
        req_doc = body.requirements if body.requirements is not None else doc.requirements
        try:
            req = req_doc.build()
            optima = enumerate_optima(dist, node, req)
        except KeyError as e:
            raise HTTPException(status_code=422, detail=e.args[0])
        except ValidationError as e:
            raise HTTPException(status_code=422, detail=str(e))
        except InfeasibleRequirements as e:
            raise HTTPException(status_code=409, detail=str(e))

        result = {
            "revision": revision,
            "node": node,
            "samples": n,
            "seed": s,
            "loss": round(optima[0].loss, 6),
            "count": len(optima),
            "optima": [
                {a: list(sol.assignment[a]) for a in dist.actions}
                for sol in optima
            ],
        }
        state.classifications[key] = result
        digest = hashlib.sha256(repr(key).encode()).hexdigest()[:10]
        store.write_manifest(state, f"classify_{digest}.json", result)
        return result

    @app.post("/projects/{pid}/whatif")
    def whatif(pid: str, body: WhatIfRequest) -> dict:
        state = _project(pid)
        doc = state.document
        revision = state.revision
        changed_doc = _edited(doc, body.delta)
        seed = body.seed if body.seed is not None else doc.smaa.seed
        try:
            base = compute_distribution(doc, body.samples, seed)
            changed = compute_distribution(changed_doc, body.samples, seed)
        except InfeasibleCategory as e:
            raise HTTPException(status_code=409, detail=str(e))
        base_payload = distribution_payload(base, seed)
        changed_payload = distribution_payload(changed, seed)
        return {
            "revision": revision,
            "samples": body.samples,
            "seed": seed,
            "base": base_payload,
            "changed": changed_payload,
            "marginal_deltas": _marginal_deltas(base_payload, changed_payload),
        }

    @app.post("/srf/preview")
    def preview(body: PreviewRequest) -> dict:
        names = body.criteria
        if len(set(names)) != len(names):
            raise HTTPException(status_code=422, detail="duplicate criterion names")
        root_name = "root"
        while root_name in names:
            root_name += "_"
        try:
            h = CriteriaHierarchy.from_nested(
                {
                    "name": root_name,
                    "children": [
                        {
                            "name": nm,
                            "scale": Scale("interval", 0.0, 1.0),
                            "simdis": SimDisFunction.symmetric(0, 0, 0, 0),
                        }
                        for nm in names
                    ],
                }
            )
            decls = tuple(
                InteractionDecl(d.kind, h.resolve(d.first), h.resolve(d.second))
                for d in body.interactions
            )
            z = body.deck.z if isinstance(body.deck.z, tuple) else (body.deck.z,) * 2
            deck = CardDeck(
                node=h.resolve(root_name),
                levels=tuple(
                    tuple(_card_from_spec(h, spec) for spec in level)
                    for level in body.deck.levels
                ),
                gaps=tuple(tuple(g) for g in body.deck.gaps),
                z=z,
            )
            det = srf_deterministic(h, deck, decls, body.total)
        except (DocumentError, ValidationError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {
            "total": body.total,
            "unit": det.unit,
            "scale": det.scale,
            "weights": {h.name(k): v for k, v in det.weights.items()},
            "pair_values": {
                f"{h.name(a)}+{h.name(b)}": v
                for (a, b), v in det.pair_values.items()
            },
            "shadow_values": {h.name(k): v for k, v in det.shadow_values.items()},
            "mutual": [
                {"first": h.name(a), "second": h.name(b), "value": v}
                for (a, b), v in det.mutual.items()
            ],
            "antagonistic": [
                {"first": h.name(a), "second": h.name(b), "value": v}
                for (a, b), v in det.antagonistic.items()
            ],
            "net_flows": {h.name(k): v for k, v in det.net_flows.items()},
        }

    return app


app = create_app()

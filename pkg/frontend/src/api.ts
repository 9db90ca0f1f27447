/** Typed client for the classification service; the only network surface. */

import type {
  ClassifyResult,
  DocumentEdit,
  DocumentSpec,
  FeasibilityReport,
  JobStatus,
  PreviewRequest,
  PreviewResult,
  ProjectDetail,
  ProjectRef,
  WhatIfResult,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

export interface ApiOptions {
  baseUrl?: string;
  token?: string;
}

export class Api {
  private readonly base: string;
  private readonly token?: string;

  constructor(options: ApiOptions = {}) {
    this.base = options.baseUrl ?? "";
    this.token = options.token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token !== undefined) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await fetch(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const data: unknown = text === "" ? null : JSON.parse(text);
    if (!response.ok) {
      const detail =
        data !== null && typeof data === "object" && "detail" in data
          ? String((data as { detail: unknown }).detail)
          : text;
      throw new ApiError(response.status, detail);
    }
    return data as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  listProjects(): Promise<ProjectRef[]> {
    return this.request("GET", "/projects");
  }

  createProject(document: DocumentSpec): Promise<ProjectRef> {
    return this.request("POST", "/projects", document);
  }

  getProject(id: string): Promise<ProjectDetail> {
    return this.request("GET", `/projects/${id}`);
  }

  replaceDocument(id: string, document: DocumentSpec): Promise<ProjectRef> {
    return this.request("PUT", `/projects/${id}/document`, document);
  }

  editDocument(id: string, edit: DocumentEdit): Promise<ProjectRef> {
    return this.request("PATCH", `/projects/${id}/document`, edit);
  }

  feasibility(id: string): Promise<FeasibilityReport> {
    return this.request("GET", `/projects/${id}/feasibility`);
  }

  startSampling(id: string, samples: number, seed: number): Promise<JobStatus> {
    return this.request("POST", `/projects/${id}/smaa`, { samples, seed });
  }

  job(id: string, job: string): Promise<JobStatus> {
    return this.request("GET", `/projects/${id}/smaa/${job}`);
  }

  classify(
    id: string,
    node: string,
    samples: number,
    seed: number,
  ): Promise<ClassifyResult> {
    return this.request("POST", `/projects/${id}/classify`, { node, samples, seed });
  }

  whatIf(
    id: string,
    delta: DocumentEdit,
    samples: number,
    seed: number,
  ): Promise<WhatIfResult> {
    return this.request("POST", `/projects/${id}/whatif`, { delta, samples, seed });
  }

  preview(request: PreviewRequest): Promise<PreviewResult> {
    return this.request("POST", "/srf/preview", request);
  }
}

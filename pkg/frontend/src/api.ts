/** HTTP client for the summarization service. */

import type { ChatResponse, JobStatus, SummaryDoc } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(`${base}${path}`, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
      // keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class Client {
  constructor(public baseUrl: string) {}

  submitJob(spec: string, dataCsv: string | null, config: Record<string, unknown> = {}) {
    return request<{ id: string; state: string }>(this.baseUrl, "/jobs", {
      method: "POST",
      body: JSON.stringify({ spec, data_csv: dataCsv, config }),
    });
  }

  jobStatus(id: string) {
    return request<JobStatus>(this.baseUrl, `/jobs/${id}`);
  }

  summary(id: string) {
    return request<SummaryDoc>(this.baseUrl, `/jobs/${id}/summary`);
  }

  chat(id: string, message: string) {
    return request<ChatResponse>(this.baseUrl, `/jobs/${id}/chat`, {
      method: "POST",
      body: JSON.stringify({ message }),
    });
  }

  /** Poll every `intervalMs` until the job leaves the queue/running states. */
  async waitForJob(
    id: string,
    intervalMs = 2000,
    onTick?: (status: JobStatus) => void,
    sleeper: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
  ): Promise<JobStatus> {
    for (;;) {
      const status = await this.jobStatus(id);
      onTick?.(status);
      if (status.state === "done" || status.state === "failed") return status;
      await sleeper(intervalMs);
    }
  }
}

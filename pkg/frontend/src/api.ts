import type { ClipDetail, ClipsPage, DecisionRequest, StoredDecision } from './types';

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

/** Thin fetch client for the review service; base '' means same origin. */
export class ReviewApi {
  constructor(private base: string = '') {}

  async listClips(
    params: { status?: string; category?: string; page?: number; page_size?: number } = {},
  ): Promise<ClipsPage> {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined) query.set(key, String(value));
    }
    const suffix = query.toString() ? `?${query.toString()}` : '';
    return asJson(await fetch(`${this.base}/clips${suffix}`));
  }

  async clipDetail(clipId: string): Promise<ClipDetail> {
    return asJson(await fetch(`${this.base}/clips/${encodeURIComponent(clipId)}`));
  }

  frameUrl(clipId: string, variant: 'marked' | 'unmarked', index: number): string {
    return `${this.base}/clips/${encodeURIComponent(clipId)}/frames/${variant}/${index}`;
  }

  async submitDecision(clipId: string, body: DecisionRequest): Promise<StoredDecision> {
    const response = await fetch(
      `${this.base}/clips/${encodeURIComponent(clipId)}/decision`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(body),
      },
    );
    return asJson(response);
  }

  async exportManifest(protocol = 'all'): Promise<unknown> {
    return asJson(await fetch(`${this.base}/export?protocol=${protocol}`));
  }
}

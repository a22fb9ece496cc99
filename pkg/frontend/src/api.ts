// Typed client for the annotation service HTTP API.

import type { Role } from './roles.js';

export interface BBox {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface BlockPayload {
  block_id: number;
  text: string;
  bbox: BBox;
  role: Role | null;
}

export interface SamplePayload {
  sample_id: string;
  chart_type: string;
  width: number;
  height: number;
  image_url: string;
  blocks: BlockPayload[];
}

export interface CorpusInfo {
  name: string;
  n_samples: number;
  splits: Record<string, number>;
  labeled: number;
  total: number;
}

export interface SampleListing {
  sample_id: string;
  n_blocks: number;
  labeled: number;
}

export interface Progress {
  labeled: number;
  total: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string, public body?: unknown) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, init);
  let body: unknown = null;
  const text = await res.text();
  if (text) {
    try {
      body = JSON.parse(text);
    } catch {
      body = text;
    }
  }
  if (!res.ok) {
    const detail =
      body && typeof body === 'object' && 'detail' in (body as object)
        ? String((body as { detail: unknown }).detail)
        : res.statusText;
    throw new ApiError(res.status, detail, body);
  }
  return body as T;
}

export class ApiClient {
  constructor(private base: string = '') {}

  listCorpora(): Promise<CorpusInfo[]> {
    return request(`${this.base}/corpora`);
  }

  listSamples(corpus: string, split?: string): Promise<SampleListing[]> {
    const query = split ? `?split=${encodeURIComponent(split)}` : '';
    return request(`${this.base}/corpora/${encodeURIComponent(corpus)}/samples${query}`);
  }

  getSample(sampleId: string): Promise<SamplePayload> {
    return request(`${this.base}/samples/${encodeURIComponent(sampleId)}`);
  }

  imageUrl(sample: SamplePayload): string {
    return `${this.base}${sample.image_url}`;
  }

  putRole(
    sampleId: string,
    blockId: number,
    role: Role,
    annotator: string,
  ): Promise<{ revision: number; role: Role }> {
    return request(
      `${this.base}/samples/${encodeURIComponent(sampleId)}/blocks/${blockId}/role`,
      {
        method: 'PUT',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ role, annotator }),
      },
    );
  }

  exportCorpus(corpus: string, out?: string): Promise<{ path: string; n_samples: number }> {
    return request(`${this.base}/export`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(out ? { corpus, out } : { corpus }),
    });
  }

  progress(corpus: string): Promise<Progress> {
    return request(`${this.base}/progress/${encodeURIComponent(corpus)}`);
  }
}

// Labeling session state: a cursor over (sample, block), role assignment with
// optimistic updates reconciled against the server, and progress tracking.
// All mutations go through the service; reloading always reproduces the
// server's view.

import { ApiClient, ApiError, SamplePayload } from './api.js';
import { Role, roleForKey } from './roles.js';

export interface SessionEvents {
  onSample?: (sample: SamplePayload, index: number, total: number) => void;
  onBlock?: (blockIndex: number) => void;
  onProgress?: (labeled: number, total: number) => void;
  onError?: (message: string) => void;
}

export class UiSession {
  corpus = '';
  sampleIds: string[] = [];
  sampleIndex = 0;
  blockIndex = 0;
  current: SamplePayload | null = null;
  labeled = 0;
  total = 0;

  constructor(
    private api: ApiClient,
    private annotator: string = 'ui',
    private events: SessionEvents = {},
  ) {}

  async start(corpus?: string): Promise<void> {
    const corpora = await this.api.listCorpora();
    if (!corpora.length) throw new Error('no corpora registered');
    this.corpus = corpus ?? corpora[0].name;
    const listing = await this.api.listSamples(this.corpus);
    this.sampleIds = listing.map((s) => s.sample_id);
    if (!this.sampleIds.length) throw new Error(`corpus ${this.corpus} is empty`);
    await this.syncProgress();
    await this.loadSample(0);
    this.seekUnlabeled();
  }

  async loadSample(index: number): Promise<void> {
    this.sampleIndex = (index + this.sampleIds.length) % this.sampleIds.length;
    this.current = await this.api.getSample(this.sampleIds[this.sampleIndex]);
    this.blockIndex = 0;
    this.events.onSample?.(this.current, this.sampleIndex, this.sampleIds.length);
    this.events.onBlock?.(this.blockIndex);
  }

  async syncProgress(): Promise<void> {
    const p = await this.api.progress(this.corpus);
    this.labeled = p.labeled;
    this.total = p.total;
    this.events.onProgress?.(this.labeled, this.total);
  }

  currentBlock() {
    if (!this.current || !this.current.blocks.length) return null;
    return this.current.blocks[this.blockIndex];
  }

  /** Move the cursor to the next unlabeled block, if any (current sample first). */
  seekUnlabeled(): void {
    if (!this.current) return;
    const blocks = this.current.blocks;
    for (let i = 0; i < blocks.length; i++) {
      const j = (this.blockIndex + i) % blocks.length;
      if (blocks[j].role === null) {
        this.blockIndex = j;
        this.events.onBlock?.(this.blockIndex);
        return;
      }
    }
  }

  async handleKey(key: string): Promise<boolean> {
    const role = roleForKey(key);
    if (role) {
      await this.assignRole(role);
      return true;
    }
    switch (key) {
      case 'ArrowRight':
        await this.moveBlock(1);
        return true;
      case 'ArrowLeft':
        await this.moveBlock(-1);
        return true;
      case 'ArrowDown':
        await this.loadSample(this.sampleIndex + 1);
        return true;
      case 'ArrowUp':
        await this.loadSample(this.sampleIndex - 1);
        return true;
      case 'u':
      case 'U':
        await this.moveBlock(-1); // step back so the block can be re-assigned
        return true;
    }
    return false;
  }

  async assignRole(role: Role): Promise<void> {
    const block = this.currentBlock();
    if (!block || !this.current) return;
    const before = block.role;
    block.role = role; // optimistic
    try {
      await this.api.putRole(this.current.sample_id, block.block_id, role, this.annotator);
    } catch (err) {
      block.role = before; // roll back
      this.events.onError?.(err instanceof ApiError ? err.message : String(err));
      this.events.onBlock?.(this.blockIndex);
      return;
    }
    if (before === null) this.labeled += 1;
    this.events.onProgress?.(this.labeled, this.total);
    await this.advance();
  }

  /** Cursor to the next unlabeled block, crossing into following samples. */
  async advance(): Promise<void> {
    if (!this.current) return;
    const blocks = this.current.blocks;
    for (let j = this.blockIndex + 1; j < blocks.length; j++) {
      if (blocks[j].role === null) {
        this.blockIndex = j;
        this.events.onBlock?.(this.blockIndex);
        return;
      }
    }
    // wrap through the remaining samples once
    for (let step = 1; step <= this.sampleIds.length; step++) {
      const idx = (this.sampleIndex + step) % this.sampleIds.length;
      const payload = await this.api.getSample(this.sampleIds[idx]);
      const unlabeled = payload.blocks.findIndex((b) => b.role === null);
      if (unlabeled >= 0) {
        this.sampleIndex = idx;
        this.current = payload;
        this.blockIndex = unlabeled;
        this.events.onSample?.(payload, idx, this.sampleIds.length);
        this.events.onBlock?.(this.blockIndex);
        return;
      }
    }
    this.events.onBlock?.(this.blockIndex); // everything labeled
  }

  async moveBlock(delta: number): Promise<void> {
    if (!this.current) return;
    const n = this.current.blocks.length;
    if (!n) return;
    this.blockIndex = (this.blockIndex + delta + n) % n;
    this.events.onBlock?.(this.blockIndex);
  }

  async exportCorpus(out?: string): Promise<string> {
    const res = await this.api.exportCorpus(this.corpus, out);
    return res.path;
  }

  done(): boolean {
    return this.total > 0 && this.labeled >= this.total;
  }
}

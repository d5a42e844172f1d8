/**
 * Change-keyed polling.
 *
 * Every tick asks /healthz for the current log sequence and only then
 * refreshes the heavier views, and only when the sequence moved.  The
 * scheduler is injectable so tests can drive ticks by hand.
 */

import type { ServiceClient } from './client.js';

export interface PollCallbacks {
  onChange: (logSeq: number) => void | Promise<void>;
  onError?: (error: unknown) => void;
  onRecovered?: () => void;
}

export class LogSeqPoller {
  private lastSeen: number | null = null;
  private failing = false;

  constructor(
    private readonly client: ServiceClient,
    private readonly callbacks: PollCallbacks,
  ) {}

  /** One poll round; returns true when a refresh was triggered. */
  async tick(): Promise<boolean> {
    let seq: number;
    try {
      const health = await this.client.health();
      seq = health.log_seq;
    } catch (error) {
      this.failing = true;
      this.callbacks.onError?.(error);
      return false;
    }
    if (this.failing) {
      this.failing = false;
      this.callbacks.onRecovered?.();
    }
    if (this.lastSeen === seq) return false;
    this.lastSeen = seq;
    await this.callbacks.onChange(seq);
    return true;
  }

  start(intervalMs: number, schedule = setInterval): ReturnType<typeof setInterval> {
    return schedule(() => {
      void this.tick();
    }, intervalMs);
  }
}

export const DEFAULT_POLL_MS = 5000;

// One correction in flight per session; later clicks wait their turn.
// A failed send is reported and dropped (the server never saw it), and
// the queue moves on — the caller decides whether to retry.

export class SerialQueue<T> {
  private pending: T[] = [];
  private busy = false;
  private waiters: (() => void)[] = [];

  constructor(
    private readonly send: (payload: T) => Promise<void>,
    private readonly onError: (err: unknown, payload: T) => void,
  ) {}

  get depth(): number {
    return this.pending.length + (this.busy ? 1 : 0);
  }

  push(payload: T): void {
    this.pending.push(payload);
    void this.drain();
  }

  /** Resolves once everything queued so far has been sent (or failed). */
  idle(): Promise<void> {
    if (!this.busy && this.pending.length === 0) return Promise.resolve();
    return new Promise((resolve) => this.waiters.push(resolve));
  }

  private async drain(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      while (this.pending.length > 0) {
        const payload = this.pending.shift()!;
        try {
          await this.send(payload);
        } catch (err) {
          this.onError(err, payload);
        }
      }
    } finally {
      this.busy = false;
      const waiters = this.waiters;
      this.waiters = [];
      for (const resolve of waiters) resolve();
    }
  }
}

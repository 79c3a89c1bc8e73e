// Trailing debounce with a single-flight guarantee for calibration PUTs:
// while a request is on the wire no second one starts, and when everything
// settles the last pushed value has always been sent.

export class TrailingGate<T> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;
  private queued: T | undefined;
  private settlers: Array<() => void> = [];

  constructor(
    private readonly delayMs: number,
    private readonly send: (value: T) => Promise<void>,
  ) {}

  /** Schedule a value; rapid pushes collapse to the latest one. */
  push(value: T): void {
    this.queued = value;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire();
    }, this.delayMs);
  }

  private async fire(): Promise<void> {
    if (this.inFlight || this.queued === undefined) return;
    const value = this.queued;
    this.queued = undefined;
    this.inFlight = true;
    try {
      await this.send(value);
    } finally {
      this.inFlight = false;
      if (this.queued !== undefined && this.timer === null) {
        // A newer value arrived while we were on the wire.
        void this.fire();
      } else if (this.queued === undefined && this.timer === null) {
        const settlers = this.settlers;
        this.settlers = [];
        for (const resolve of settlers) resolve();
      }
    }
  }

  get busy(): boolean {
    return this.inFlight || this.timer !== null || this.queued !== undefined;
  }

  /** Resolves once no timer is pending and nothing is in flight. */
  settled(): Promise<void> {
    if (!this.busy) return Promise.resolve();
    return new Promise((resolve) => this.settlers.push(resolve));
  }
}

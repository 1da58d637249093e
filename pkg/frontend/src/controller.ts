// Session orchestration behind the DOM layer: owns the pick list, the PNG
// bytes for both preview panes, and the single in-flight request slot.
// Every later request aborts and replaces the current one.

import { ApiError, SessionInfo, WbrfApi } from "./api.js";
import { Viewport, inBounds, toImagePixel } from "./coords.js";
import { UiPick, activePick, withActivated, withPickAdded, withRemoved } from "./state.js";

export interface PickerSnapshot {
  session: SessionInfo | null;
  picks: UiPick[];
  originalPng: Uint8Array | null;
  correctedPng: Uint8Array | null;
  busy: boolean;
  error: string | null;
}

const swatchFromGamma = (gamma: number[]): number[] => {
  const top = Math.max(...gamma, 1e-9);
  return gamma.map((v) => v / top);
};

export class PickerController {
  session: SessionInfo | null = null;
  picks: UiPick[] = [];
  originalPng: Uint8Array | null = null;
  correctedPng: Uint8Array | null = null;
  busy = false;
  error: string | null = null;

  private inflight: AbortController | null = null;
  private nextKey = 1;

  constructor(
    private api: WbrfApi,
    private listener: (snap: PickerSnapshot) => void = () => {},
  ) {}

  snapshot(): PickerSnapshot {
    return {
      session: this.session,
      picks: this.picks,
      originalPng: this.originalPng,
      correctedPng: this.correctedPng,
      busy: this.busy,
      error: this.error,
    };
  }

  private notify(): void {
    this.listener(this.snapshot());
  }

  private beginRequest(): AbortSignal {
    this.inflight?.abort();
    this.inflight = new AbortController();
    this.busy = true;
    return this.inflight.signal;
  }

  private settle(signal: AbortSignal): boolean {
    if (signal.aborted) return false;
    this.busy = false;
    return true;
  }

  private fail(err: unknown, signal?: AbortSignal): false {
    if (signal?.aborted || (err instanceof Error && err.name === "AbortError")) {
      return false; // replaced by a newer request; nothing to report
    }
    this.busy = false;
    this.error = err instanceof ApiError ? err.message : String(err);
    this.notify();
    return false;
  }

  async loadImage(data: Blob): Promise<boolean> {
    const signal = this.beginRequest();
    try {
      const previous = this.session;
      const session = await this.api.createSession(data, signal);
      const original = await this.api.fetchImage(session.id, "original", signal);
      if (!this.settle(signal)) return false;
      this.session = session;
      this.picks = [];
      this.originalPng = original;
      this.correctedPng = null;
      this.error = null;
      if (previous) void this.api.deleteSession(previous.id).catch(() => {});
      this.notify();
      return true;
    } catch (err) {
      return this.fail(err, signal);
    }
  }

  // Canvas click: map through the viewport, ignore clicks outside the image.
  clickAt(offsetX: number, offsetY: number, view: Viewport): Promise<boolean> {
    if (!this.session) return Promise.resolve(false);
    const { x, y } = toImagePixel(offsetX, offsetY, view);
    if (!inBounds(x, y, this.session.width, this.session.height)) {
      return Promise.resolve(false);
    }
    return this.pickPixel(x, y);
  }

  async pickPixel(x: number, y: number): Promise<boolean> {
    if (!this.session) return false;
    const signal = this.beginRequest();
    try {
      const res = await this.api.pick(this.session.id, x, y, signal);
      const corrected = await this.api.fetchImage(this.session.id, "corrected", signal);
      if (!this.settle(signal)) return false;
      this.picks = withPickAdded(this.picks, {
        key: this.nextKey++,
        kind: "manual",
        x,
        y,
        swatch: res.pick ? res.pick.picked_rgb : [],
        cluster: res.cluster,
      });
      this.correctedPng = corrected;
      this.error = null;
      this.notify();
      return true;
    } catch (err) {
      return this.fail(err, signal);
    }
  }

  async runAwb(): Promise<boolean> {
    if (!this.session) return false;
    const signal = this.beginRequest();
    try {
      const res = await this.api.runAwb(this.session.id, signal);
      const corrected = await this.api.fetchImage(this.session.id, "corrected", signal);
      if (!this.settle(signal)) return false;
      this.picks = withPickAdded(
        this.picks.filter((p) => p.kind !== "auto"), // one auto chip at most
        {
          key: this.nextKey++,
          kind: "auto",
          x: -1,
          y: -1,
          swatch: swatchFromGamma(res.gamma),
          cluster: res.cluster,
        },
      );
      this.correctedPng = corrected;
      this.error = null;
      this.notify();
      return true;
    } catch (err) {
      return this.fail(err, signal);
    }
  }

  // Chip click: the service only keeps the latest corrected frame, so
  // re-activating an older pick re-issues its correction.
  async activateChip(key: number): Promise<boolean> {
    const chip = this.picks.find((p) => p.key === key);
    if (!chip || !this.session) return false;
    const signal = this.beginRequest();
    try {
      if (chip.kind === "auto") {
        await this.api.runAwb(this.session.id, signal);
      } else {
        await this.api.pick(this.session.id, chip.x, chip.y, signal);
      }
      const corrected = await this.api.fetchImage(this.session.id, "corrected", signal);
      if (!this.settle(signal)) return false;
      this.picks = withActivated(this.picks, key);
      this.correctedPng = corrected;
      this.error = null;
      this.notify();
      return true;
    } catch (err) {
      return this.fail(err, signal);
    }
  }

  async removeChip(key: number): Promise<boolean> {
    const wasActive = this.picks.find((p) => p.key === key)?.active ?? false;
    this.picks = withRemoved(this.picks, key);
    const next = activePick(this.picks);
    if (!wasActive) {
      this.notify();
      return true;
    }
    if (next === null) {
      this.correctedPng = null; // back to the original image
      this.notify();
      return true;
    }
    return this.activateChip(next.key);
  }

  // Corrected PNG for the active pick, as served (download path re-fetches).
  async downloadCorrected(): Promise<Uint8Array | null> {
    if (!this.session || activePick(this.picks) === null) return null;
    try {
      return await this.api.fetchImage(this.session.id, "corrected");
    } catch (err) {
      this.fail(err);
      return null;
    }
  }
}

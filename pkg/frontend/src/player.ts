// Seamless A/B playback: every stimulus of the trial shares one playback
// clock, so switching between conditions keeps the position, and an
// optional loop region wraps all of them together.

export class TrialPlayer {
  private elements = new Map<string, HTMLAudioElement>();
  private active: string | null = null;
  private position = 0;
  private loopStart = 0;
  private loopEnd = Infinity;
  volume = 1.0;
  onAuditioned: (token: string) => void = () => undefined;
  onError: (token: string) => void = () => undefined;

  constructor(private readonly urlFor: (token: string) => string) {}

  prepare(tokens: string[]): void {
    this.stop();
    this.elements.clear();
    this.active = null;
    this.position = 0;
    this.loopStart = 0;
    this.loopEnd = Infinity;
    for (const token of tokens) {
      const element = new Audio(this.urlFor(token));
      element.preload = "auto";
      element.addEventListener("error", () => this.onError(token));
      element.addEventListener("timeupdate", () => {
        if (token !== this.active) return;
        this.position = element.currentTime;
        if (this.position >= this.loopEnd) {
          element.currentTime = this.loopStart;
        }
      });
      element.addEventListener("ended", () => {
        if (token === this.active) {
          element.currentTime = this.loopStart;
          void element.play().catch(() => this.onError(token));
        }
      });
      this.elements.set(token, element);
    }
  }

  setLoop(start: number, end: number): void {
    this.loopStart = Math.max(0, start);
    this.loopEnd = end > start ? end : Infinity;
  }

  setVolume(volume: number): void {
    this.volume = Math.min(1, Math.max(0, volume));
    for (const element of this.elements.values()) {
      element.volume = this.volume;
    }
  }

  /** Switch playback to a token, preserving the shared position. */
  play(token: string): void {
    const next = this.elements.get(token);
    if (!next) return;
    if (this.active && this.active !== token) {
      const previous = this.elements.get(this.active);
      if (previous && !previous.paused) {
        this.position = previous.currentTime;
        previous.pause();
      }
    }
    this.active = token;
    next.volume = this.volume;
    try {
      next.currentTime = this.position;
    } catch {
      // metadata not loaded yet; the browser will start from 0
    }
    next
      .play()
      .then(() => this.onAuditioned(token))
      .catch(() => this.onError(token));
  }

  stop(): void {
    for (const element of this.elements.values()) {
      element.pause();
    }
    this.active = null;
  }
}

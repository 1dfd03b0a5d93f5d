import { ApiError, BenchApi } from "./api.js";
import type { Outcome, PairView, VoteReveal } from "./api.js";

// ── constants ───────────────────────────────────────

export const ATTRIBUTES = [
  "overall",
  "illumination",
  "noise_artifacts",
  "blurriness",
  "color",
] as const;

export interface ActionSpec {
  outcome: Outcome;
  label: string;
  /** Digit shortcut; buttons stay tab-focusable on top of this. */
  key: string;
}

export const ACTIONS: readonly ActionSpec[] = [
  { outcome: "a_better", label: "Left is better", key: "1" },
  { outcome: "b_better", label: "Right is better", key: "2" },
  { outcome: "both_good", label: "Both are good", key: "3" },
  { outcome: "both_bad", label: "Both are bad", key: "4" },
];

export type Phase = "loading" | "ready" | "submitting" | "error";

// ── view ────────────────────────────────────────────

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

/**
 * Voting view over the service API. The client is deliberately thin: the
 * server randomizes sides and owns all rating math; this class only walks
 * one pair at a time through loading -> ready -> submitting and guards
 * against double submission.
 */
export class BenchApp {
  phase: Phase = "loading";
  pair: PairView | null = null;
  votesCast = 0;

  private readonly voted = new Set<string>();
  private readonly dom: {
    prompt: HTMLElement;
    imageA: HTMLImageElement;
    imageB: HTMLImageElement;
    actions: HTMLButtonElement[];
    note: HTMLElement;
    retry: HTMLButtonElement;
    attributeSelect: HTMLSelectElement;
    refresh: HTMLButtonElement;
    board: HTMLElement;
  };

  constructor(
    private readonly root: HTMLElement,
    private readonly api: BenchApi,
  ) {
    this.dom = this.buildSkeleton();
    document.addEventListener("keydown", (ev) => this.onKey(ev));
  }

  private buildSkeleton() {
    this.root.textContent = "";

    const prompt = el("h2", { id: "attribute-prompt", "aria-live": "polite" });
    const imageA = el("img", { id: "image-a", alt: "candidate A (left)" });
    const imageB = el("img", { id: "image-b", alt: "candidate B (right)" });
    const panelA = el("figure", { class: "image-panel" });
    const panelB = el("figure", { class: "image-panel" });
    panelA.append(imageA);
    panelB.append(imageB);
    const pairBox = el("div", { id: "pair" });
    pairBox.append(panelA, panelB);

    const actionBox = el("div", { id: "actions", role: "group", "aria-label": "vote" });
    const actions = ACTIONS.map((a) => {
      const b = el("button", { "data-outcome": a.outcome, type: "button" });
      b.textContent = `${a.label} [${a.key}]`;
      b.disabled = true;
      b.addEventListener("click", () => void this.vote(a.outcome));
      actionBox.append(b);
      return b;
    });

    const note = el("p", { id: "note", "aria-live": "polite" });
    const retry = el("button", { id: "retry", type: "button" }, "Try again");
    retry.hidden = true;
    retry.addEventListener("click", () => void this.loadNextPair());

    const attributeSelect = el("select", { id: "attribute-select", "aria-label": "leaderboard attribute" });
    for (const a of ATTRIBUTES) attributeSelect.append(el("option", { value: a }, a));
    const refresh = el("button", { id: "refresh-leaderboard", type: "button" }, "Refresh");
    refresh.addEventListener("click", () => void this.refreshLeaderboard());
    attributeSelect.addEventListener("change", () => void this.refreshLeaderboard());
    const board = el("div", { id: "leaderboard" });
    const boardBox = el("section", { id: "leaderboard-box" });
    boardBox.append(el("h3", {}, "Leaderboard"), attributeSelect, refresh, board);

    this.root.append(prompt, pairBox, actionBox, note, retry, boardBox);
    return { prompt, imageA, imageB, actions, note, retry, attributeSelect, refresh, board };
  }

  // ── pair flow ─────────────────────────────────────

  async start(): Promise<void> {
    await this.loadNextPair();
  }

  async loadNextPair(): Promise<void> {
    this.setPhase("loading");
    this.dom.retry.hidden = true;
    try {
      const pair = await this.api.getPair();
      this.pair = pair;
      this.dom.prompt.textContent = `Which image is better for: ${pair.attribute.replace("_", " ")}?`;
      this.dom.imageA.src = this.api.url(pair.image_a_url);
      this.dom.imageB.src = this.api.url(pair.image_b_url);
      this.setPhase("ready");
    } catch {
      // No pair, nothing to vote on; offer a retry instead of failing silently.
      this.pair = null;
      this.dom.note.textContent = "Could not reach the voting service.";
      this.dom.retry.hidden = false;
      this.setPhase("error");
    }
  }

  async vote(outcome: Outcome): Promise<void> {
    // Re-entry guard: the phase flips synchronously, so a double click (or a
    // held-down shortcut key) cannot issue a second POST for the same pair.
    if (this.phase !== "ready" || this.pair === null) return;
    if (this.voted.has(this.pair.pair_id)) return;
    const pair = this.pair;
    this.setPhase("submitting");
    this.voted.add(pair.pair_id);
    try {
      const reveal = await this.api.submitVote(pair.pair_id, outcome);
      this.votesCast += 1;
      this.dom.note.textContent = this.describeReveal(reveal);
    } catch (err) {
      if (err instanceof ApiError) {
        // 409 double vote, 404 expired pair: the server settled it; move on.
        this.dom.note.textContent = `Vote not recorded (${err.message}).`;
      } else {
        // Network failure: the buttons become the retry affordance.
        this.voted.delete(pair.pair_id);
        this.dom.note.textContent = "Network problem, your vote was not sent. Try again.";
        this.setPhase("ready");
        return;
      }
    }
    await this.loadNextPair();
  }

  private describeReveal(reveal: VoteReveal): string {
    const { a, b } = reveal.methods;
    const fmt = (m: string) => `${m} ${reveal.ratings[m]?.toFixed(1) ?? "?"}`;
    return `Recorded ${reveal.outcome} for ${reveal.attribute}: left was ${fmt(a)}, right was ${fmt(b)}.`;
  }

  // ── leaderboard ───────────────────────────────────

  async refreshLeaderboard(): Promise<void> {
    try {
      const board = await this.api.getLeaderboard(this.dom.attributeSelect.value);
      const table = el("table");
      const head = el("tr");
      head.append(el("th", {}, "method"), el("th", {}, "rating"), el("th", {}, "votes"));
      table.append(head);
      for (const entry of board.entries) {
        const row = el("tr");
        row.append(
          el("td", {}, entry.method),
          el("td", {}, entry.rating.toFixed(1)),
          el("td", {}, String(entry.votes)),
        );
        table.append(row);
      }
      this.dom.board.textContent = "";
      this.dom.board.append(table);
    } catch {
      this.dom.board.textContent = "leaderboard unavailable";
    }
  }

  // ── input ─────────────────────────────────────────

  private onKey(ev: KeyboardEvent): void {
    const action = ACTIONS.find((a) => a.key === ev.key);
    if (action) void this.vote(action.outcome);
  }

  private setPhase(phase: Phase): void {
    this.phase = phase;
    const enabled = phase === "ready";
    for (const b of this.dom.actions) b.disabled = !enabled;
  }
}

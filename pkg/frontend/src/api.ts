// Typed client for the dimeval voting service HTTP API. The client is a
// thin fetch wrapper: no retries, no caching, no rating math. Anything the
// server refuses surfaces as an ApiError carrying the HTTP status.

export interface PairView {
  pair_id: string;
  attribute: string;
  image_a_url: string;
  image_b_url: string;
}

export type Outcome = "a_better" | "b_better" | "both_good" | "both_bad";

export interface VoteReveal {
  ok: boolean;
  pair_id: string;
  attribute: string;
  outcome: Outcome;
  /** Method identities, revealed only after the vote is recorded. */
  methods: { a: string; b: string };
  /** Updated ratings for the two methods just compared. */
  ratings: Record<string, number>;
}

export interface LeaderboardEntry {
  method: string;
  rating: number;
  votes: number;
}

export interface Leaderboard {
  attribute: string;
  entries: LeaderboardEntry[];
}

export interface Health {
  status: string;
  methods: number;
  images: number;
  votes: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseOrThrow<T>(res: Response): Promise<T> {
  if (res.ok) return (await res.json()) as T;
  let detail = res.statusText || `HTTP ${res.status}`;
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, detail);
}

export class BenchApi {
  private readonly fetchFn: typeof fetch;

  constructor(
    private readonly baseUrl = "",
    fetchFn?: typeof fetch,
  ) {
    this.fetchFn = fetchFn ?? globalThis.fetch.bind(globalThis);
  }

  /** Absolute form of a server-relative URL such as an image reference. */
  url(path: string): string {
    return this.baseUrl + path;
  }

  async getHealth(): Promise<Health> {
    return parseOrThrow(await this.fetchFn(this.url("/api/health")));
  }

  async getPair(): Promise<PairView> {
    return parseOrThrow(await this.fetchFn(this.url("/api/pair")));
  }

  async submitVote(pairId: string, outcome: Outcome): Promise<VoteReveal> {
    const res = await this.fetchFn(this.url("/api/vote"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ pair_id: pairId, outcome }),
    });
    return parseOrThrow(res);
  }

  async getLeaderboard(attribute = "overall"): Promise<Leaderboard> {
    const query = new URLSearchParams({ attribute });
    return parseOrThrow(await this.fetchFn(this.url(`/api/leaderboard?${query}`)));
  }
}

/** Client-side session state: the latest server payload plus UI notices.
 *
 * Every mutation goes straight to the service and the reply replaces the
 * local payload, so reloading the page loses nothing and version numbers
 * always come from the server. Scores are displayed from the submit
 * response verbatim; nothing is computed here.
 */

import { ApiClient, ApiError } from "./api.js";
import type { SessionView, SubmitResult, TagValue } from "./types.js";

export type Notice =
  | { kind: "conflict"; message: string }
  | { kind: "network"; message: string }
  | { kind: "untagged"; message: string; indices: number[] }
  | { kind: "rejected"; message: string };

export class SessionModel {
  private readonly client: ApiClient;
  session: SessionView;
  result: SubmitResult | null = null;
  notice: Notice | null = null;
  /** Mutation retained across a network failure so retry re-sends it. */
  private pending: (() => Promise<void>) | null = null;

  constructor(client: ApiClient, session: SessionView) {
    this.client = client;
    this.session = session;
  }

  static async open(client: ApiClient, qaId: string): Promise<SessionModel> {
    return new SessionModel(client, await client.createSession(qaId));
  }

  get submitted(): boolean {
    return this.session.state === "submitted";
  }

  progress(): { tagged: number; total: number } {
    const total = this.session.ldps.length;
    const tagged = this.session.ldps.filter((l) => l.human_tag !== null).length;
    return { tagged, total };
  }

  untaggedIndices(): number[] {
    return this.session.ldps
      .filter((l) => l.human_tag === null)
      .map((l) => l.index);
  }

  get retryable(): boolean {
    return this.pending !== null;
  }

  async tag(index: number, tag: TagValue): Promise<void> {
    await this.mutate(async () => {
      this.session = await this.client.recordTag(
        this.session.session_id,
        index,
        tag,
        this.session.version,
      );
    });
  }

  async addMissing(text: string): Promise<void> {
    await this.mutate(async () => {
      this.session = await this.client.addMissingLdp(
        this.session.session_id,
        text,
        this.session.version,
      );
    });
  }

  async submit(): Promise<void> {
    await this.mutate(async () => {
      // Same version on a retry replays the server's cached result, so a
      // lost response cannot double-submit.
      const result = await this.client.submit(
        this.session.session_id,
        this.session.version,
      );
      this.result = result;
      this.session = result.session;
    });
  }

  /** Re-fetch the server copy; recovers from conflicts with nothing lost. */
  async reload(): Promise<void> {
    await this.mutate(async () => {
      this.session = await this.client.getSession(this.session.session_id);
    });
  }

  /** Re-send the mutation that failed on a network error. */
  async retry(): Promise<void> {
    const op = this.pending;
    if (op !== null) {
      await this.mutate(op);
    }
  }

  private async mutate(op: () => Promise<void>): Promise<void> {
    try {
      await op();
      this.notice = null;
      this.pending = null;
    } catch (err) {
      this.noticeFor(err, op);
    }
  }

  private noticeFor(err: unknown, op: () => Promise<void>): void {
    if (err instanceof ApiError) {
      this.pending = null;
      if (err.code === "version_conflict" || err.code === "session_submitted") {
        this.notice = {
          kind: "conflict",
          message: `${err.message}; reload to pick up the latest state`,
        };
      } else if (err.code === "untagged_ldps") {
        this.notice = {
          kind: "untagged",
          message: err.message,
          indices: indicesFrom(err.details),
        };
      } else {
        this.notice = { kind: "rejected", message: err.message };
      }
    } else {
      // fetch rejected before a reply arrived; keep the op for retry.
      this.pending = op;
      this.notice = {
        kind: "network",
        message: "request failed to reach the server; nothing was lost",
      };
    }
  }
}

function indicesFrom(details: Record<string, unknown>): number[] {
  const raw = details["indices"];
  if (!Array.isArray(raw)) {
    return [];
  }
  return raw.filter((v): v is number => typeof v === "number");
}

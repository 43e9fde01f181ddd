/** Queue state: pending cards in server-assigned order, safe submission.
 *
 * Submission rules the tests pin down:
 *  - an in-flight candidate ignores further submits (double-click protection);
 *  - the idempotency key is minted once per candidate and reused on retry, so
 *    even a duplicate POST lands as one log entry server-side;
 *  - an acknowledged card leaves the queue; a failed one stays and becomes
 *    retryable.
 */

import { ApiClient, newIdempotencyKey } from "./api.js";
import type { CandidateCard, DecisionAck, VerdictChoice } from "./types.js";

export interface CardState {
  card: CandidateCard;
  inFlight: boolean;
  retryable: boolean;
  lastChoice?: VerdictChoice;
  error?: string;
}

export class QueueController {
  cards: CardState[] = [];
  private keys = new Map<string, string>();
  onChange: () => void = () => {};

  constructor(
    private readonly api: ApiClient,
    private readonly institution: string,
    private readonly reviewer: string,
  ) {}

  async load(): Promise<void> {
    const response = await this.api.queue(this.institution);
    this.cards = response.candidates.map((card) => ({
      card,
      inFlight: false,
      retryable: false,
    }));
    this.onChange();
  }

  find(candidateId: string): CardState | undefined {
    return this.cards.find((state) => state.card.id === candidateId);
  }

  /** Key minted once per candidate; reused across retries and duplicate clicks. */
  keyFor(candidateId: string): string {
    let key = this.keys.get(candidateId);
    if (!key) {
      key = newIdempotencyKey();
      this.keys.set(candidateId, key);
    }
    return key;
  }

  async submit(candidateId: string, choice: VerdictChoice): Promise<DecisionAck | null> {
    const state = this.find(candidateId);
    if (!state || state.inFlight) {
      return null;
    }
    state.inFlight = true;
    state.lastChoice = choice;
    state.error = undefined;
    this.onChange();
    try {
      const ack = await this.api.submitDecision(
        candidateId,
        this.reviewer,
        this.institution,
        choice,
        this.keyFor(candidateId),
      );
      this.cards = this.cards.filter((s) => s.card.id !== candidateId);
      this.onChange();
      return ack;
    } catch (err) {
      state.inFlight = false;
      state.retryable = true;
      state.error = err instanceof Error ? err.message : String(err);
      this.onChange();
      return null;
    }
  }

  /** Re-send the failed decision with the same idempotency key. */
  async retry(candidateId: string): Promise<DecisionAck | null> {
    const state = this.find(candidateId);
    if (!state || !state.retryable || !state.lastChoice) {
      return null;
    }
    state.retryable = false;
    return this.submit(candidateId, state.lastChoice);
  }
}

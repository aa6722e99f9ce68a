/**
 * Portfolio draft state and peer-panel formatting.
 *
 * The draft is immutable: every edit returns a new object, which keeps the
 * controller's "exactly one query per edit" bookkeeping trivial.
 */

import type { PeerEntry } from "./api.js";

export interface PortfolioDraft {
  readonly members: readonly string[]; // ordered, no duplicates
  readonly n: number; // peers requested per query, >= 1
}

export function emptyDraft(n = 15): PortfolioDraft {
  if (n < 1) {
    throw new Error(`n must be >= 1, got ${n}`);
  }
  return { members: [], n };
}

export interface DraftEdit {
  draft: PortfolioDraft;
  changed: boolean;
}

export function addFirm(draft: PortfolioDraft, companyId: string): DraftEdit {
  if (draft.members.includes(companyId)) {
    return { draft, changed: false }; // duplicate add is a no-op
  }
  return { draft: { members: [...draft.members, companyId], n: draft.n }, changed: true };
}

export function removeFirm(draft: PortfolioDraft, companyId: string): DraftEdit {
  if (!draft.members.includes(companyId)) {
    return { draft, changed: false };
  }
  return {
    draft: { members: draft.members.filter((m) => m !== companyId), n: draft.n },
    changed: true,
  };
}

export function setN(draft: PortfolioDraft, n: number): DraftEdit {
  if (n < 1) {
    throw new Error(`n must be >= 1, got ${n}`);
  }
  if (n === draft.n) {
    return { draft, changed: false };
  }
  return { draft: { members: [...draft.members], n }, changed: true };
}

/** Similarities are displayed to 4 decimals everywhere. */
export function formatSimilarity(value: number): string {
  return value.toFixed(4);
}

/**
 * The canonical peer-panel text: one line per peer. Rendering a service
 * payload through this function is the only way peer rows reach the screen,
 * so a panel is byte-equal to the formatted payload by construction.
 */
export function formatPeerPanel(peers: readonly PeerEntry[]): string {
  return peers
    .map((p) => `${p.company_id}\t${p.name}\t${formatSimilarity(p.similarity)}`)
    .join("\n");
}

/**
 * Explorer orchestration, kept free of DOM types so the behavior is
 * unit-testable: views are injected, service data flows in through the
 * ApiClient only.
 *
 * Guarantees enforced here:
 *  - every portfolio edit issues exactly one /portfolio-peers request;
 *  - stale responses never overwrite newer ones (latest wins);
 *  - map coordinates are fetched once per snapshot digest and cached;
 *  - a failed request leaves the draft untouched and raises the banner.
 */

import { ApiClient, FirmSummary, MapPoint, PeerEntry, ServiceError } from "./api.js";
import { highlightIds } from "./map.js";
import {
  PortfolioDraft,
  addFirm,
  emptyDraft,
  formatPeerPanel,
  removeFirm,
  setN,
} from "./portfolio.js";
import { matchFirms } from "./search.js";

export interface PanelState {
  text: string;
  code: string | null;
  peers: PeerEntry[];
}

export interface ExplorerView {
  renderSearchResults(matches: FirmSummary[]): void;
  renderMembers(members: FirmSummary[]): void;
  renderPortfolioPanel(panel: PanelState): void;
  renderFirmPanel(panel: PanelState, firm: FirmSummary | null): void;
  renderSegmentPanel(panel: PanelState, firm: FirmSummary | null): void;
  renderMap(points: MapPoint[], highlights: Set<string>): void;
  showError(message: string): void;
  clearError(): void;
}

const EMPTY_PANEL: PanelState = { text: "", code: null, peers: [] };

export class ExplorerController {
  draft: PortfolioDraft;
  firms: FirmSummary[] = [];
  lastPortfolioPeers: PeerEntry[] = [];
  portfolioRequestCount = 0;

  private byId = new Map<string, FirmSummary>();
  private mapPoints: MapPoint[] = [];
  private mapDigest: string | null = null;
  private focused: FirmSummary | null = null;
  private refreshSeq = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly view: ExplorerView,
    n = 15,
  ) {
    this.draft = emptyDraft(n);
  }

  async init(): Promise<void> {
    try {
      this.firms = await this.api.allFirms();
      this.byId = new Map(this.firms.map((f) => [f.company_id, f]));
      await this.refreshMap();
      this.view.clearError();
    } catch (err) {
      this.view.showError(describe(err));
    }
  }

  search(query: string): FirmSummary[] {
    const matches = matchFirms(this.firms, query);
    this.view.renderSearchResults(matches);
    return matches;
  }

  /** Match the query, add the best hit, and re-query the portfolio peers. */
  async searchAndAdd(query: string): Promise<void> {
    const matches = matchFirms(this.firms, query);
    if (matches.length === 0) {
      this.view.showError(`no firm matches "${query}"`);
      return;
    }
    await this.addFirmById(matches[0].company_id);
  }

  async addFirmById(companyId: string): Promise<void> {
    const firm = this.byId.get(companyId);
    if (!firm) {
      this.view.showError(`unknown firm id ${companyId}`);
      return;
    }
    const edit = addFirm(this.draft, companyId);
    if (!edit.changed) {
      this.view.showError(`${firm.name} is already in the portfolio`);
      return;
    }
    await this.applyEdit(edit.draft, firm);
  }

  async removeFirmById(companyId: string): Promise<void> {
    const edit = removeFirm(this.draft, companyId);
    if (!edit.changed) {
      return;
    }
    const focus = edit.draft.members.length
      ? this.byId.get(edit.draft.members[edit.draft.members.length - 1]) ?? null
      : null;
    await this.applyEdit(edit.draft, focus);
  }

  async setPeerCount(n: number): Promise<void> {
    const edit = setN(this.draft, n);
    if (!edit.changed) {
      return;
    }
    await this.applyEdit(edit.draft, this.focused);
  }

  /** Commit a draft edit: one portfolio query, then dependent panels.

   * The draft commits synchronously so rapid edits accumulate; the
   * per-edit query renders only while it is still the newest one, and a
   * failure rolls back just the edit it belonged to.
   */
  private async applyEdit(next: PortfolioDraft, focus: FirmSummary | null): Promise<void> {
    const previous = this.draft;
    this.draft = next;
    this.focused = focus;
    const seq = ++this.refreshSeq;
    try {
      let portfolio: PanelState = EMPTY_PANEL;
      if (next.members.length > 0) {
        this.portfolioRequestCount += 1;
        const reply = await this.api.portfolioPeers([...next.members], next.n);
        portfolio = {
          text: formatPeerPanel(reply.data.peers),
          code: reply.code,
          peers: reply.data.peers,
        };
      }
      if (seq !== this.refreshSeq) {
        return; // a newer edit already landed
      }
      this.lastPortfolioPeers = portfolio.peers;
      this.view.clearError();
      this.view.renderMembers(
        next.members.map((id) => this.byId.get(id) ?? { company_id: id, name: id }),
      );
      this.view.renderPortfolioPanel(portfolio);
      this.view.renderMap(
        this.mapPoints,
        highlightIds(next.members, portfolio.peers),
      );
      await this.refreshFocusPanels(focus, seq);
    } catch (err) {
      if (seq === this.refreshSeq) {
        this.draft = previous; // the failed edit leaves no trace
        this.view.showError(describe(err));
      }
    }
  }

  private async refreshFocusPanels(firm: FirmSummary | null, seq: number): Promise<void> {
    if (!firm) {
      this.view.renderFirmPanel(EMPTY_PANEL, null);
      this.view.renderSegmentPanel(EMPTY_PANEL, null);
      return;
    }
    const [firmReply, segmentReply] = await Promise.all([
      this.api.peers(firm.company_id, this.draft.n),
      this.api.segmentPeers(firm.company_id).catch((err) => {
        if (err instanceof ServiceError && err.httpStatus === 503) {
          return null; // snapshot without a segmentation model
        }
        throw err;
      }),
    ]);
    if (seq !== this.refreshSeq) {
      return;
    }
    this.view.renderFirmPanel(
      {
        text: formatPeerPanel(firmReply.data.peers),
        code: firmReply.code,
        peers: firmReply.data.peers,
      },
      firm,
    );
    this.view.renderSegmentPanel(
      segmentReply
        ? {
            text: formatPeerPanel(segmentReply.data.peers),
            code: segmentReply.code,
            peers: segmentReply.data.peers,
          }
        : EMPTY_PANEL,
      firm,
    );
  }

  /** Map coordinates are immutable per snapshot; refetch only on digest change. */
  private async refreshMap(): Promise<void> {
    const health = await this.api.health();
    if (this.mapDigest === health.snapshot_digest && this.mapPoints.length) {
      this.view.renderMap(this.mapPoints, highlightIds(this.draft.members, this.lastPortfolioPeers));
      return;
    }
    const reply = await this.api.map();
    this.mapDigest = reply.snapshot_digest;
    this.mapPoints = reply.data.points;
    this.view.renderMap(this.mapPoints, highlightIds(this.draft.members, this.lastPortfolioPeers));
  }

  get points(): MapPoint[] {
    return this.mapPoints;
  }
}

function describe(err: unknown): string {
  if (err instanceof ServiceError) {
    return err.code ? `${err.message} [${err.code}]` : err.message;
  }
  return (err as Error).message ?? String(err);
}

import { beforeEach, describe, expect, it } from "vitest";

import type { Envelope, FirmSummary, MapPoint, PeerEntry } from "../src/api.js";
import { ApiClient, ServiceError } from "../src/api.js";
import { ExplorerController, ExplorerView, PanelState } from "../src/controller.js";

const FIRMS: FirmSummary[] = [
  { company_id: "f1", name: "Alpha Bank" },
  { company_id: "f2", name: "Beta Bau" },
  { company_id: "f3", name: "Gamma Soft" },
];

function envelope<T>(data: T, code: string | null = null): Envelope<T> {
  return { status: "ok", code, snapshot_digest: "digest-1", data };
}

function peer(id: string, sim: number): PeerEntry {
  return { company_id: id, name: id.toUpperCase(), similarity: sim };
}

class RecordingView implements ExplorerView {
  errors: string[] = [];
  errorVisible = false;
  portfolioPanels: PanelState[] = [];
  firmPanels: PanelState[] = [];
  segmentPanels: PanelState[] = [];
  members: FirmSummary[][] = [];
  maps: Array<{ points: MapPoint[]; highlights: Set<string> }> = [];
  searches: FirmSummary[][] = [];

  renderSearchResults(matches: FirmSummary[]): void {
    this.searches.push(matches);
  }
  renderMembers(members: FirmSummary[]): void {
    this.members.push(members);
  }
  renderPortfolioPanel(panel: PanelState): void {
    this.portfolioPanels.push(panel);
  }
  renderFirmPanel(panel: PanelState): void {
    this.firmPanels.push(panel);
  }
  renderSegmentPanel(panel: PanelState): void {
    this.segmentPanels.push(panel);
  }
  renderMap(points: MapPoint[], highlights: Set<string>): void {
    this.maps.push({ points, highlights });
  }
  showError(message: string): void {
    this.errors.push(message);
    this.errorVisible = true;
  }
  clearError(): void {
    this.errorVisible = false;
  }
}

/** ApiClient double that serves canned payloads and counts calls. */
class FakeApi extends ApiClient {
  portfolioCalls: string[][] = [];
  mapCalls = 0;
  failPortfolio = false;
  private pending: Array<() => void> = [];
  holdPortfolio = false;

  constructor() {
    super("http://fake");
  }

  override async health() {
    return envelope({
      firms: FIRMS.length,
      dim: 4,
      has_segmentation: true,
      has_words: false,
      strategy: "append_tokens",
    });
  }

  override async firms(offset = 0, _limit = 1000) {
    const firms = offset === 0 ? FIRMS : [];
    return envelope({ total: FIRMS.length, offset, limit: 1000, firms });
  }

  override async map() {
    this.mapCalls += 1;
    const points = FIRMS.map((f, i) => ({
      company_id: f.company_id,
      name: f.name,
      x: i,
      y: -i,
    }));
    return envelope({ points });
  }

  override async peers(companyId: string, _n: number) {
    return envelope({ peers: [peer(companyId, 1), peer("f3", 0.5)] });
  }

  override async segmentPeers(companyId: string) {
    return envelope({ peers: [peer(companyId, 1)] });
  }

  override async portfolioPeers(ids: string[], _n: number) {
    this.portfolioCalls.push([...ids]);
    if (this.failPortfolio) {
      throw new ServiceError("boom", null, 500);
    }
    const reply = envelope({
      peers: ids.map((id, i) => peer(id, 1 - i * 0.1)).concat([peer("f3", 0.4)]),
    });
    if (this.holdPortfolio) {
      await new Promise<void>((resolve) => this.pending.push(resolve));
    }
    return reply;
  }

  releaseAll(): void {
    const waiting = [...this.pending];
    this.pending = [];
    for (const resolve of waiting) resolve();
  }
}

describe("ExplorerController", () => {
  let api: FakeApi;
  let view: RecordingView;
  let controller: ExplorerController;

  beforeEach(async () => {
    api = new FakeApi();
    view = new RecordingView();
    controller = new ExplorerController(api, view, 15);
    await controller.init();
  });

  it("each portfolio edit issues exactly one portfolio-peers request", async () => {
    await controller.searchAndAdd("alpha");
    expect(api.portfolioCalls).toEqual([["f1"]]);
    await controller.searchAndAdd("beta");
    expect(api.portfolioCalls).toEqual([["f1"], ["f1", "f2"]]);
    await controller.removeFirmById("f1");
    expect(api.portfolioCalls).toEqual([["f1"], ["f1", "f2"], ["f2"]]);
  });

  it("a duplicate add issues no request and notifies", async () => {
    await controller.searchAndAdd("alpha");
    const before = api.portfolioCalls.length;
    await controller.addFirmById("f1");
    expect(api.portfolioCalls.length).toBe(before);
    expect(view.errors.at(-1)).toContain("already");
    expect(controller.draft.members).toEqual(["f1"]);
  });

  it("no-match search leaves the draft alone", async () => {
    await controller.searchAndAdd("zzz-nothing");
    expect(controller.draft.members).toEqual([]);
    expect(api.portfolioCalls).toEqual([]);
    expect(view.errorVisible).toBe(true);
  });

  it("a failed query keeps the previous draft and raises the banner", async () => {
    await controller.searchAndAdd("alpha");
    api.failPortfolio = true;
    await controller.addFirmById("f2");
    expect(controller.draft.members).toEqual(["f1"]);
    expect(view.errorVisible).toBe(true);
    api.failPortfolio = false;
    await controller.addFirmById("f2");
    expect(controller.draft.members).toEqual(["f1", "f2"]);
    expect(view.errorVisible).toBe(false);
  });

  it("panels come verbatim from the service payload", async () => {
    await controller.addFirmById("f1");
    const panel = view.portfolioPanels.at(-1)!;
    expect(panel.text).toBe("f1\tF1\t1.0000\nf3\tF3\t0.4000");
    expect(panel.peers.map((p) => p.company_id)).toEqual(["f1", "f3"]);
  });

  it("map highlights are members plus peers and stay within the plot", async () => {
    await controller.addFirmById("f2");
    const last = view.maps.at(-1)!;
    expect([...last.highlights].sort()).toEqual(["f2", "f3"]);
    const plotted = new Set(last.points.map((p) => p.company_id));
    for (const id of last.highlights) {
      expect(plotted.has(id)).toBe(true);
    }
  });

  it("map is fetched once per snapshot digest", async () => {
    expect(api.mapCalls).toBe(1);
    await controller.addFirmById("f1");
    await controller.addFirmById("f2");
    expect(api.mapCalls).toBe(1); // edits re-render from the cache
  });

  it("stale responses lose against newer edits", async () => {
    api.holdPortfolio = true;
    const first = controller.addFirmById("f1");
    api.holdPortfolio = false;
    const second = controller.addFirmById("f2"); // lands while the first hangs
    api.releaseAll();
    await Promise.all([first, second]);
    // both edits accumulated; only the newest response rendered a panel
    expect(controller.draft.members).toEqual(["f1", "f2"]);
    expect(api.portfolioCalls).toEqual([["f1"], ["f1", "f2"]]);
    expect(view.portfolioPanels).toHaveLength(1);
    expect(view.portfolioPanels[0].peers.map((p) => p.company_id)).toEqual(["f1", "f2", "f3"]);
  });

  it("setPeerCount re-queries with the new n", async () => {
    await controller.addFirmById("f1");
    const calls = api.portfolioCalls.length;
    await controller.setPeerCount(5);
    expect(api.portfolioCalls.length).toBe(calls + 1);
    expect(controller.draft.n).toBe(5);
  });
});

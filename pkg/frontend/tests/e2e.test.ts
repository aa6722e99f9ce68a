/**
 * End-to-end acceptance against the real engine: a fixture snapshot is built
 * through the pipeline CLI, served by the query service, and driven through
 * the explorer controller exactly like the browser would.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import net from "node:net";
import os from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, type FirmSummary, type MapPoint, type PeerEntry } from "../src/api.js";
import { ExplorerController, type ExplorerView, type PanelState } from "../src/controller.js";
import { missingFromPlot } from "../src/map.js";
import { formatPeerPanel } from "../src/portfolio.js";

const FRONTEND_DIR = path.dirname(path.dirname(fileURLToPath(import.meta.url)));
const PYTHON = process.env.PYTHON ?? "python3";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.listen(0, "127.0.0.1", () => {
      const port = (probe.address() as net.AddressInfo).port;
      probe.close(() => resolve(port));
    });
    probe.on("error", reject);
  });
}

async function waitForHealth(base: string, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const response = await fetch(`${base}/health`);
      if (response.ok) return;
    } catch {
      // still booting
    }
    if (Date.now() > deadline) {
      throw new Error(`service at ${base} never became healthy`);
    }
    await new Promise((r) => setTimeout(r, 200));
  }
}

class HeadlessView implements ExplorerView {
  portfolioPanel: PanelState = { text: "", code: null, peers: [] };
  firmPanel: PanelState = { text: "", code: null, peers: [] };
  segmentPanel: PanelState = { text: "", code: null, peers: [] };
  mapPoints: MapPoint[] = [];
  highlights = new Set<string>();
  errorVisible = false;
  lastError = "";

  renderSearchResults(_matches: FirmSummary[]): void {}
  renderMembers(_members: FirmSummary[]): void {}
  renderPortfolioPanel(panel: PanelState): void {
    this.portfolioPanel = panel;
  }
  renderFirmPanel(panel: PanelState): void {
    this.firmPanel = panel;
  }
  renderSegmentPanel(panel: PanelState): void {
    this.segmentPanel = panel;
  }
  renderMap(points: MapPoint[], highlights: Set<string>): void {
    this.mapPoints = points;
    this.highlights = highlights;
  }
  showError(message: string): void {
    this.errorVisible = true;
    this.lastError = message;
  }
  clearError(): void {
    this.errorVisible = false;
  }
}

describe("explorer against the live service", () => {
  let workDir: string;
  let server: ChildProcess | null = null;
  let base: string;
  let api: ApiClient;

  beforeAll(async () => {
    workDir = mkdtempSync(path.join(os.tmpdir(), "explorer-fixture-"));
    execFileSync(PYTHON, [path.join(FRONTEND_DIR, "scripts", "build_fixture.py"), workDir], {
      stdio: "pipe",
    });
    const port = await freePort();
    base = `http://127.0.0.1:${port}`;
    server = spawn(
      PYTHON,
      [
        "-m",
        "firmvec.cli",
        "serve",
        "--snapshot",
        path.join(workDir, "fixture.c2v"),
        "--vectors",
        path.join(workDir, "vectors.vec"),
        "--port",
        String(port),
      ],
      { cwd: path.dirname(FRONTEND_DIR), stdio: "pipe" },
    );
    await waitForHealth(base);
    api = new ApiClient(base);
  }, 60_000);

  afterAll(() => {
    server?.kill();
    rmSync(workDir, { recursive: true, force: true });
  });

  it("adding two firms renders the /portfolio-peers payload byte for byte", async () => {
    const view = new HeadlessView();
    const controller = new ExplorerController(api, view, 15);
    await controller.init();
    expect(view.errorVisible).toBe(false);

    const [first, second] = controller.firms.slice(0, 2);
    await controller.searchAndAdd(first.company_id);
    await controller.searchAndAdd(second.company_id);
    expect(controller.draft.members).toEqual([first.company_id, second.company_id]);
    expect(controller.portfolioRequestCount).toBe(2);

    const direct = await api.portfolioPeers([first.company_id, second.company_id], 15);
    expect(view.portfolioPanel.text).toBe(formatPeerPanel(direct.data.peers));
    expect(view.portfolioPanel.text.length).toBeGreaterThan(0);
  });

  it("a single-firm portfolio panel equals the firm-centric payload", async () => {
    const view = new HeadlessView();
    const controller = new ExplorerController(api, view, 15);
    await controller.init();
    const firm = controller.firms[3];
    await controller.addFirmById(firm.company_id);

    const direct = await api.peers(firm.company_id, 15);
    expect(view.portfolioPanel.text).toBe(formatPeerPanel(direct.data.peers));
    expect(view.firmPanel.text).toBe(formatPeerPanel(direct.data.peers));
    expect(view.firmPanel.peers[0].company_id).toBe(firm.company_id);
    expect(view.firmPanel.peers[0].similarity).toBe(1);
  });

  it("map highlights always reference plotted firms", async () => {
    const view = new HeadlessView();
    const controller = new ExplorerController(api, view, 15);
    await controller.init();
    expect(view.mapPoints.length).toBeGreaterThan(0);
    const [a, b] = controller.firms.slice(5, 7);
    await controller.addFirmById(a.company_id);
    await controller.addFirmById(b.company_id);
    expect(view.highlights.size).toBeGreaterThan(0);
    expect(missingFromPlot(view.highlights, view.mapPoints)).toEqual([]);
  });

  it("segment panel lists same-cluster firms from the service", async () => {
    const view = new HeadlessView();
    const controller = new ExplorerController(api, view, 15);
    await controller.init();
    const firm = controller.firms[0];
    await controller.addFirmById(firm.company_id);
    const direct = await api.segmentPeers(firm.company_id);
    expect(view.segmentPanel.text).toBe(formatPeerPanel(direct.data.peers));
  });

  it("a dead service raises the banner and leaves the draft unchanged", async () => {
    const deadPort = await freePort();
    const deadApi = new ApiClient(`http://127.0.0.1:${deadPort}`);
    const view = new HeadlessView();
    const controller = new ExplorerController(deadApi, view, 15);
    await controller.init();
    expect(view.errorVisible).toBe(true);
    await controller.searchAndAdd("anything");
    expect(controller.draft.members).toEqual([]);
  });
});

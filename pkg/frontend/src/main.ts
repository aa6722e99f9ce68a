/** Browser bootstrap: DOM wiring and canvas rendering for the explorer. */

import { ApiClient, FirmSummary, MapPoint } from "./api.js";
import { ExplorerController, ExplorerView, PanelState } from "./controller.js";
import { Viewport, fitViewport, nearestPoint, pan, toScreen, zoomAt } from "./map.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "http://127.0.0.1:8000";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

class DomView implements ExplorerView {
  private canvas = el<HTMLCanvasElement>("map");
  private viewport: Viewport | null = null;
  private points: MapPoint[] = [];
  private highlights = new Set<string>();
  private dragFrom: [number, number] | null = null;

  constructor(private readonly onPick: (id: string) => void) {
    this.canvas.addEventListener("wheel", (event) => {
      event.preventDefault();
      if (!this.viewport) return;
      const factor = event.deltaY < 0 ? 1.15 : 1 / 1.15;
      this.viewport = zoomAt(this.viewport, event.offsetX, event.offsetY, factor);
      this.draw();
    });
    this.canvas.addEventListener("mousedown", (event) => {
      this.dragFrom = [event.offsetX, event.offsetY];
    });
    this.canvas.addEventListener("mousemove", (event) => {
      if (this.dragFrom && this.viewport) {
        this.viewport = pan(
          this.viewport,
          event.offsetX - this.dragFrom[0],
          event.offsetY - this.dragFrom[1],
        );
        this.dragFrom = [event.offsetX, event.offsetY];
        this.draw();
      }
    });
    window.addEventListener("mouseup", (event) => {
      if (!this.dragFrom || !this.viewport) {
        this.dragFrom = null;
        return;
      }
      const [sx, sy] = this.dragFrom;
      this.dragFrom = null;
      const moved = Math.hypot(event.offsetX - sx, event.offsetY - sy);
      if (moved < 3) {
        const hit = nearestPoint(this.points, this.viewport, sx, sy);
        if (hit) {
          this.onPick(hit.company_id); // clicking a point adds it to the draft
        }
      }
    });
  }

  renderSearchResults(matches: FirmSummary[]): void {
    const list = el<HTMLUListElement>("search-results");
    list.replaceChildren(
      ...matches.map((firm) => {
        const item = document.createElement("li");
        item.textContent = `${firm.name} (${firm.company_id})`;
        item.addEventListener("click", () => this.onPick(firm.company_id));
        return item;
      }),
    );
  }

  renderMembers(members: FirmSummary[]): void {
    const list = el<HTMLUListElement>("members");
    list.replaceChildren(
      ...members.map((firm) => {
        const item = document.createElement("li");
        item.textContent = firm.name;
        const remove = document.createElement("button");
        remove.textContent = "x";
        remove.addEventListener("click", () =>
          document.dispatchEvent(new CustomEvent("firm-remove", { detail: firm.company_id })),
        );
        item.append(" ", remove);
        return item;
      }),
    );
  }

  private renderPanel(id: string, panel: PanelState, title: string): void {
    el<HTMLElement>(`${id}-title`).textContent = title;
    const pre = el<HTMLPreElement>(id);
    pre.textContent = panel.code === "EMPTY_EMBEDDING" ? "(no usable embedding)" : panel.text;
  }

  renderPortfolioPanel(panel: PanelState): void {
    this.renderPanel("portfolio-panel", panel, "Portfolio peers");
  }

  renderFirmPanel(panel: PanelState, firm: FirmSummary | null): void {
    this.renderPanel("firm-panel", panel, firm ? `Peers of ${firm.name}` : "Firm peers");
  }

  renderSegmentPanel(panel: PanelState, firm: FirmSummary | null): void {
    this.renderPanel(
      "segment-panel",
      panel,
      firm ? `Segment of ${firm.name}` : "Segment peers",
    );
  }

  renderMap(points: MapPoint[], highlights: Set<string>): void {
    this.points = points;
    this.highlights = highlights;
    if (!this.viewport) {
      this.viewport = fitViewport(points, this.canvas.width, this.canvas.height);
    }
    this.draw();
  }

  showError(message: string): void {
    const banner = el<HTMLDivElement>("error-banner");
    banner.textContent = message;
    banner.hidden = false;
  }

  clearError(): void {
    el<HTMLDivElement>("error-banner").hidden = true;
  }

  private draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx || !this.viewport) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    if (this.points.length === 0) {
      ctx.fillStyle = "#888";
      ctx.fillText("no map data", 16, 24);
      return;
    }
    for (const point of this.points) {
      const [sx, sy] = toScreen(this.viewport, point.x, point.y);
      const emphasized = this.highlights.has(point.company_id);
      ctx.beginPath();
      ctx.arc(sx, sy, emphasized ? 5 : 2.5, 0, 2 * Math.PI);
      ctx.fillStyle = emphasized ? "#d6402a" : "#3a6ea5";
      ctx.fill();
    }
  }
}

async function boot(): Promise<void> {
  const api = new ApiClient(baseUrl);
  const view = new DomView((id) => void controller.addFirmById(id));
  const controller = new ExplorerController(api, view);
  await controller.init();

  const input = el<HTMLInputElement>("search");
  input.addEventListener("input", () => controller.search(input.value));
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void controller.searchAndAdd(input.value);
      input.value = "";
      controller.search("");
    }
  });
  el<HTMLInputElement>("peer-count").addEventListener("change", (event) => {
    const n = Number((event.target as HTMLInputElement).value);
    if (Number.isFinite(n) && n >= 1) {
      void controller.setPeerCount(n);
    }
  });
  document.addEventListener("firm-remove", (event) => {
    void controller.removeFirmById((event as CustomEvent<string>).detail);
  });
}

void boot();

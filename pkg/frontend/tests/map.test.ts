import { describe, expect, it } from "vitest";

import {
  fitViewport,
  highlightIds,
  missingFromPlot,
  nearestPoint,
  pan,
  toScreen,
  zoomAt,
} from "../src/map.js";

const POINTS = [
  { company_id: "a", name: "A", x: 0, y: 0 },
  { company_id: "b", name: "B", x: 10, y: 5 },
  { company_id: "c", name: "C", x: -4, y: 2 },
];

describe("viewport", () => {
  it("fits every point inside the canvas", () => {
    const vp = fitViewport(POINTS, 400, 300, 20);
    for (const p of POINTS) {
      const [sx, sy] = toScreen(vp, p.x, p.y);
      expect(sx).toBeGreaterThanOrEqual(20 - 1e-9);
      expect(sx).toBeLessThanOrEqual(380 + 1e-9);
      expect(sy).toBeGreaterThanOrEqual(20 - 1e-9);
      expect(sy).toBeLessThanOrEqual(280 + 1e-9);
    }
  });

  it("pan shifts screen coordinates by the delta", () => {
    const vp = fitViewport(POINTS, 400, 300);
    const [sx, sy] = toScreen(vp, 10, 5);
    const [px, py] = toScreen(pan(vp, 7, -3), 10, 5);
    expect(px - sx).toBeCloseTo(7, 9);
    expect(py - sy).toBeCloseTo(-3, 9);
  });

  it("zoomAt keeps the anchor point fixed", () => {
    const vp = fitViewport(POINTS, 400, 300);
    const [ax, ay] = toScreen(vp, 10, 5);
    const zoomed = zoomAt(vp, ax, ay, 1.8);
    const [zx, zy] = toScreen(zoomed, 10, 5);
    expect(zx).toBeCloseTo(ax, 9);
    expect(zy).toBeCloseTo(ay, 9);
    expect(zoomed.scale).toBeCloseTo(vp.scale * 1.8, 9);
  });

  it("handles an empty payload without exploding", () => {
    const vp = fitViewport([], 400, 300);
    expect(vp.scale).toBe(1);
  });
});

describe("highlights", () => {
  it("collects members and peer ids", () => {
    const ids = highlightIds(
      ["a"],
      [
        { company_id: "b", name: "B", similarity: 0.9 },
        { company_id: "a", name: "A", similarity: 1 },
      ],
    );
    expect([...ids].sort()).toEqual(["a", "b"]);
  });

  it("containment check flags ids that were never plotted", () => {
    expect(missingFromPlot(new Set(["a", "b"]), POINTS)).toEqual([]);
    expect(missingFromPlot(new Set(["a", "ghost"]), POINTS)).toEqual(["ghost"]);
  });
});

describe("nearestPoint", () => {
  it("picks the closest point within range", () => {
    const vp = fitViewport(POINTS, 400, 300);
    const [sx, sy] = toScreen(vp, 10, 5);
    expect(nearestPoint(POINTS, vp, sx + 2, sy - 1)?.company_id).toBe("b");
  });

  it("returns null when nothing is close", () => {
    const vp = fitViewport(POINTS, 400, 300);
    expect(nearestPoint(POINTS, vp, -1000, -1000)).toBeNull();
  });
});

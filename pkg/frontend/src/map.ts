/**
 * Industry-map geometry: viewport math and highlight bookkeeping.
 *
 * Everything here is pure; the canvas drawing in main.ts is a thin consumer.
 */

import type { MapPoint, PeerEntry } from "./api.js";

export interface Viewport {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function fitViewport(
  points: readonly MapPoint[],
  width: number,
  height: number,
  margin = 20,
): Viewport {
  if (points.length === 0) {
    return { scale: 1, offsetX: width / 2, offsetY: height / 2 };
  }
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  return {
    scale,
    offsetX: margin - minX * scale + (width - 2 * margin - spanX * scale) / 2,
    offsetY: margin - minY * scale + (height - 2 * margin - spanY * scale) / 2,
  };
}

export function toScreen(vp: Viewport, x: number, y: number): [number, number] {
  return [x * vp.scale + vp.offsetX, y * vp.scale + vp.offsetY];
}

export function pan(vp: Viewport, dx: number, dy: number): Viewport {
  return { scale: vp.scale, offsetX: vp.offsetX + dx, offsetY: vp.offsetY + dy };
}

/** Zoom about a fixed screen point so the point under the cursor stays put. */
export function zoomAt(vp: Viewport, sx: number, sy: number, factor: number): Viewport {
  const scale = vp.scale * factor;
  return {
    scale,
    offsetX: sx - (sx - vp.offsetX) * factor,
    offsetY: sy - (sy - vp.offsetY) * factor,
  };
}

/** Firms to emphasize: portfolio members plus the current peer set. */
export function highlightIds(
  members: readonly string[],
  peers: readonly PeerEntry[],
): Set<string> {
  const ids = new Set<string>(members);
  for (const peer of peers) {
    ids.add(peer.company_id);
  }
  return ids;
}

/** Highlights must always reference plotted firms (masked firms are unplotted). */
export function missingFromPlot(
  highlights: ReadonlySet<string>,
  points: readonly MapPoint[],
): string[] {
  const plotted = new Set(points.map((p) => p.company_id));
  return [...highlights].filter((id) => !plotted.has(id));
}

export function nearestPoint(
  points: readonly MapPoint[],
  vp: Viewport,
  sx: number,
  sy: number,
  maxDistance = 12,
): MapPoint | null {
  let best: MapPoint | null = null;
  let bestDist = maxDistance;
  for (const point of points) {
    const [px, py] = toScreen(vp, point.x, point.y);
    const dist = Math.hypot(px - sx, py - sy);
    if (dist <= bestDist) {
      best = point;
      bestDist = dist;
    }
  }
  return best;
}

/** Deterministic graph layouts.
 *
 * Three strategies: layered left-to-right ("dagre"), concentric rings grown
 * breadth-first from the question nodes ("breadth_first"), and a plain grid.
 * All are pure functions of the node/edge lists; coordinates scale linearly
 * with the spacing factor and are translated so the minimum is zero.
 */

import type { GraphEdge, GraphNode, LayoutMode } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

const LAYER_GAP = 180;
const ROW_GAP = 90;
const RING_GAP = 150;
const CELL_W = 170;
const CELL_H = 100;

function sortedIds(nodes: GraphNode[]): string[] {
  return nodes.map((n) => n.id).sort();
}

function normalize(points: Map<string, Point>): Map<string, Point> {
  let minX = Infinity;
  let minY = Infinity;
  for (const p of points.values()) {
    minX = Math.min(minX, p.x);
    minY = Math.min(minY, p.y);
  }
  if (points.size === 0) return points;
  const out = new Map<string, Point>();
  for (const [id, p] of points) {
    out.set(id, { x: p.x - minX, y: p.y - minY });
  }
  return out;
}

/** Longest-path layering with one barycenter ordering sweep per layer. */
export function layeredLayout(
  nodes: GraphNode[],
  edges: GraphEdge[],
  spacing: number,
): Map<string, Point> {
  const ids = sortedIds(nodes);
  const layer = new Map<string, number>(ids.map((id) => [id, 0]));
  // Edges run in_id -> out_id. Bellman-Ford style relaxation; the
  // iteration cap keeps cycles finite.
  for (let round = 0; round < ids.length; round++) {
    let moved = false;
    for (const e of edges) {
      const lu = layer.get(e.in_id);
      const lv = layer.get(e.out_id);
      if (lu === undefined || lv === undefined) continue;
      if (lu + 1 > lv && lu + 1 < ids.length) {
        layer.set(e.out_id, lu + 1);
        moved = true;
      }
    }
    if (!moved) break;
  }

  const layers = new Map<number, string[]>();
  for (const id of ids) {
    const l = layer.get(id)!;
    const bucket = layers.get(l) ?? [];
    bucket.push(id);
    layers.set(l, bucket);
  }

  const index = new Map<string, number>();
  const layerKeys = [...layers.keys()].sort((a, b) => a - b);
  for (const l of layerKeys) {
    layers.get(l)!.forEach((id, i) => index.set(id, i));
  }
  // One downstream barycenter sweep to pull children under their parents.
  const parents = new Map<string, string[]>();
  for (const e of edges) {
    const bucket = parents.get(e.out_id) ?? [];
    bucket.push(e.in_id);
    parents.set(e.out_id, bucket);
  }
  for (const l of layerKeys.slice(1)) {
    const bucket = layers.get(l)!;
    const score = (id: string): number => {
      const ps = (parents.get(id) ?? []).filter((p) => index.has(p));
      if (ps.length === 0) return index.get(id)!;
      return ps.reduce((s, p) => s + index.get(p)!, 0) / ps.length;
    };
    bucket.sort((a, b) => score(a) - score(b) || (a < b ? -1 : 1));
    bucket.forEach((id, i) => index.set(id, i));
  }

  const points = new Map<string, Point>();
  for (const l of layerKeys) {
    for (const id of layers.get(l)!) {
      points.set(id, {
        x: l * LAYER_GAP * spacing,
        y: index.get(id)! * ROW_GAP * spacing,
      });
    }
  }
  return normalize(points);
}

/** Concentric rings: question nodes in the middle, one ring per BFS hop. */
export function breadthFirstLayout(
  nodes: GraphNode[],
  edges: GraphEdge[],
  spacing: number,
): Map<string, Point> {
  const ids = sortedIds(nodes);
  const adjacent = new Map<string, string[]>(ids.map((id) => [id, []]));
  for (const e of edges) {
    adjacent.get(e.out_id)?.push(e.in_id);
    adjacent.get(e.in_id)?.push(e.out_id);
  }
  const roles = new Map(nodes.map((n) => [n.id, n.role]));
  const ring = new Map<string, number>();
  let frontier = ids.filter((id) => roles.get(id) === "question");
  if (frontier.length === 0 && ids.length > 0) frontier = [ids[0]];
  frontier.forEach((id) => ring.set(id, 0));
  let depth = 0;
  while (frontier.length > 0) {
    depth += 1;
    const next: string[] = [];
    for (const id of frontier) {
      for (const nb of adjacent.get(id) ?? []) {
        if (!ring.has(nb)) {
          ring.set(nb, depth);
          next.push(nb);
        }
      }
    }
    frontier = next.sort();
  }
  for (const id of ids) {
    if (!ring.has(id)) ring.set(id, depth + 1);
  }

  const rings = new Map<number, string[]>();
  for (const id of ids) {
    const r = ring.get(id)!;
    const bucket = rings.get(r) ?? [];
    bucket.push(id);
    rings.set(r, bucket);
  }
  const points = new Map<string, Point>();
  for (const [r, bucket] of rings) {
    const radius = (r === 0 && bucket.length === 1 ? 0 : Math.max(r, 0.4)) * RING_GAP;
    bucket.forEach((id, i) => {
      const angle = (2 * Math.PI * i) / bucket.length - Math.PI / 2;
      points.set(id, {
        x: radius * Math.cos(angle) * spacing,
        y: radius * Math.sin(angle) * spacing,
      });
    });
  }
  return normalize(points);
}

/** Row-major grid in id order, ceil(sqrt(n)) columns. */
export function gridLayout(nodes: GraphNode[], spacing: number): Map<string, Point> {
  const ids = sortedIds(nodes);
  const cols = Math.max(1, Math.ceil(Math.sqrt(ids.length)));
  const points = new Map<string, Point>();
  ids.forEach((id, i) => {
    points.set(id, {
      x: (i % cols) * CELL_W * spacing,
      y: Math.floor(i / cols) * CELL_H * spacing,
    });
  });
  return points;
}

export function layoutGraph(
  mode: LayoutMode,
  nodes: GraphNode[],
  edges: GraphEdge[],
  spacing: number,
): Map<string, Point> {
  if (mode === "breadth_first") return breadthFirstLayout(nodes, edges, spacing);
  if (mode === "grid") return gridLayout(nodes, spacing);
  return layeredLayout(nodes, edges, spacing);
}

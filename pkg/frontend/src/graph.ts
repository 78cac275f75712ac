/** Graph panel: ranking, top-k filtering, and an SVG renderer.
 *
 * View controls (edge labels, top-k, spacing, layout, sort mode) only touch
 * the client-side view config and redraw from the response already in hand;
 * no request leaves the page.
 */

import { layoutGraph } from "./layout.js";
import type {
  GraphEdge,
  GraphNode,
  GraphResponse,
  GraphViewConfig,
  LayoutMode,
  SortMode,
} from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_R = 26;
const MARGIN = 60;

function metric(node: GraphNode, mode: SortMode): number {
  return mode === "incoming_attention" ? node.incoming_attention_sum : node.relevance;
}

/** Descending by the selected metric, ties broken by id. */
export function rankNodes(nodes: GraphNode[], mode: SortMode): GraphNode[] {
  return [...nodes].sort(
    (a, b) => metric(b, mode) - metric(a, mode) || (a.id < b.id ? -1 : 1),
  );
}

/** Top-k nodes under the sort metric plus the edges they induce. */
export function filterTopK(
  nodes: GraphNode[],
  edges: GraphEdge[],
  mode: SortMode,
  k: number,
): { nodes: GraphNode[]; edges: GraphEdge[] } {
  const kept = rankNodes(nodes, mode).slice(0, Math.max(0, k));
  const ids = new Set(kept.map((n) => n.id));
  return {
    nodes: kept,
    edges: edges.filter((e) => ids.has(e.in_id) && ids.has(e.out_id)),
  };
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

function roleClass(node: GraphNode): string {
  if (node.role === "question") return "node role-question";
  if (node.role === "answer_candidate") return "node role-answer";
  return "node role-other";
}

function drawSvg(response: GraphResponse, config: GraphViewConfig): SVGSVGElement {
  const view = filterTopK(
    response.nodes,
    response.edges,
    config.sort_mode,
    config.top_k,
  );
  const points = layoutGraph(config.layout, view.nodes, view.edges, config.spacing);
  let maxX = 0;
  let maxY = 0;
  for (const p of points.values()) {
    maxX = Math.max(maxX, p.x);
    maxY = Math.max(maxY, p.y);
  }
  const svg = svgEl("svg", {
    class: "graph-svg",
    viewBox: `0 0 ${maxX + 2 * MARGIN} ${maxY + 2 * MARGIN}`,
    width: String(maxX + 2 * MARGIN),
    height: String(maxY + 2 * MARGIN),
  });
  const root = svgEl("g", { transform: `translate(${MARGIN} ${MARGIN})` });
  svg.appendChild(root);

  for (const edge of view.edges) {
    const a = points.get(edge.in_id)!;
    const b = points.get(edge.out_id)!;
    const line = svgEl("line", {
      class: "edge",
      x1: String(a.x),
      y1: String(a.y),
      x2: String(b.x),
      y2: String(b.y),
      "stroke-width": String(1 + edge.weight * 0.5),
      "data-edge": edge.id,
    });
    const tip = svgEl("title", {});
    tip.textContent = `${edge.name} weight=${edge.weight} attention=${edge.attention}`;
    line.appendChild(tip);
    root.appendChild(line);
    if (config.show_edge_labels) {
      const label = svgEl("text", {
        class: "edge-label",
        x: String((a.x + b.x) / 2),
        y: String((a.y + b.y) / 2 - 4),
        "text-anchor": "middle",
      });
      label.textContent = edge.name;
      root.appendChild(label);
    }
  }

  for (const node of view.nodes) {
    const p = points.get(node.id)!;
    const g = svgEl("g", { class: roleClass(node), "data-node": node.id });
    const circle = svgEl("circle", {
      cx: String(p.x),
      cy: String(p.y),
      r: String(NODE_R),
    });
    const tip = svgEl("title", {});
    tip.textContent = `relevance=${node.relevance} incoming_attention=${node.incoming_attention_sum}`;
    circle.appendChild(tip);
    const label = svgEl("text", {
      class: "node-label",
      x: String(p.x),
      y: String(p.y + NODE_R + 14),
      "text-anchor": "middle",
    });
    label.textContent = node.name;
    g.append(circle, label);
    root.appendChild(g);
  }
  return svg;
}

function drawScores(response: GraphResponse): HTMLElement {
  const box = document.createElement("div");
  box.className = "answer-scores";
  const entries = Object.entries(response.answer_scores).sort((a, b) =>
    a[0] < b[0] ? -1 : 1,
  );
  for (const [answer, score] of entries) {
    const row = document.createElement("div");
    row.className =
      answer === response.prediction ? "score-row predicted" : "score-row";
    row.textContent = score === null ? `${answer}: not linked` : `${answer}: ${score}`;
    box.appendChild(row);
  }
  return box;
}

interface ControlSpec {
  label: string;
  input: HTMLElement;
}

function field(spec: ControlSpec): HTMLLabelElement {
  const wrap = document.createElement("label");
  wrap.className = "control";
  const caption = document.createElement("span");
  caption.textContent = spec.label;
  wrap.append(caption, spec.input);
  return wrap;
}

/** Render controls plus SVG; every control change redraws locally. */
export function renderGraph(
  response: GraphResponse,
  config: GraphViewConfig,
  container: HTMLElement,
): void {
  container.textContent = "";
  const controls = document.createElement("div");
  controls.className = "graph-controls";
  const canvas = document.createElement("div");
  canvas.className = "graph-canvas";
  const redraw = (): void => {
    canvas.textContent = "";
    canvas.appendChild(drawSvg(response, config));
  };

  const edgeLabels = document.createElement("input");
  edgeLabels.type = "checkbox";
  edgeLabels.className = "edge-labels";
  edgeLabels.checked = config.show_edge_labels;
  edgeLabels.addEventListener("change", () => {
    config.show_edge_labels = edgeLabels.checked;
    redraw();
  });
  controls.appendChild(field({ label: "edge labels", input: edgeLabels }));

  const topK = document.createElement("input");
  topK.type = "range";
  topK.className = "top-k";
  topK.min = "1";
  topK.max = String(Math.max(1, response.nodes.length));
  topK.value = String(Math.min(config.top_k, Math.max(1, response.nodes.length)));
  topK.addEventListener("input", () => {
    config.top_k = Number(topK.value);
    redraw();
  });
  controls.appendChild(field({ label: "top k nodes", input: topK }));

  const spacing = document.createElement("input");
  spacing.type = "range";
  spacing.className = "spacing";
  spacing.min = "0.5";
  spacing.max = "2.5";
  spacing.step = "0.1";
  spacing.value = String(config.spacing);
  spacing.addEventListener("input", () => {
    config.spacing = Number(spacing.value);
    redraw();
  });
  controls.appendChild(field({ label: "spacing", input: spacing }));

  const layouts: LayoutMode[] = ["dagre", "breadth_first", "grid"];
  const radioBox = document.createElement("span");
  radioBox.className = "layout-radios";
  for (const mode of layouts) {
    const radio = document.createElement("input");
    radio.type = "radio";
    radio.name = "layout";
    radio.value = mode;
    radio.checked = config.layout === mode;
    radio.addEventListener("change", () => {
      if (radio.checked) {
        config.layout = mode;
        redraw();
      }
    });
    const wrap = document.createElement("label");
    const caption = document.createElement("span");
    caption.textContent = mode;
    wrap.append(radio, caption);
    radioBox.appendChild(wrap);
  }
  controls.appendChild(field({ label: "layout", input: radioBox }));

  const sort = document.createElement("select");
  sort.className = "sort-mode";
  for (const mode of ["relevance", "incoming_attention"] as SortMode[]) {
    const opt = document.createElement("option");
    opt.value = mode;
    opt.textContent = mode.replace("_", " ");
    opt.selected = config.sort_mode === mode;
    sort.appendChild(opt);
  }
  sort.addEventListener("change", () => {
    config.sort_mode = sort.value as SortMode;
    redraw();
  });
  controls.appendChild(field({ label: "rank by", input: sort }));

  container.append(controls, drawScores(response), canvas);
  redraw();
}

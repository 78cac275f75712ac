import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { filterTopK, rankNodes, renderGraph } from "../src/graph.js";
import type { GraphViewConfig } from "../src/types.js";
import { GRAPH_FIXTURE } from "./fixtures.js";

function freshConfig(): GraphViewConfig {
  return {
    show_edge_labels: true,
    top_k: 10,
    spacing: 1.0,
    layout: "dagre",
    sort_mode: "relevance",
  };
}

function nodeIds(box: HTMLElement): string[] {
  return [...box.querySelectorAll("[data-node]")].map(
    (g) => (g as SVGGElement).dataset.node!,
  );
}

describe("rankNodes", () => {
  it("orders by relevance, ties broken by id", () => {
    const ids = rankNodes(GRAPH_FIXTURE.nodes, "relevance").map((n) => n.id);
    expect(ids).toEqual(["sea", "crab", "crustacean", "saltwater"]);
  });

  it("orders by incoming attention under the other mode", () => {
    const ids = rankNodes(GRAPH_FIXTURE.nodes, "incoming_attention").map(
      (n) => n.id,
    );
    expect(ids).toEqual(["crustacean", "saltwater", "sea", "crab"]);
  });

  it("does not mutate the input", () => {
    const before = GRAPH_FIXTURE.nodes.map((n) => n.id);
    rankNodes(GRAPH_FIXTURE.nodes, "incoming_attention");
    expect(GRAPH_FIXTURE.nodes.map((n) => n.id)).toEqual(before);
  });
});

describe("filterTopK", () => {
  it("keeps the top-k nodes and only induced edges", () => {
    const view = filterTopK(GRAPH_FIXTURE.nodes, GRAPH_FIXTURE.edges, "relevance", 2);
    expect(view.nodes.map((n) => n.id)).toEqual(["sea", "crab"]);
    expect(view.edges.map((e) => e.id)).toEqual(["crab-atlocation-sea"]);
  });

  it("grows the induced edge set with k", () => {
    const view = filterTopK(GRAPH_FIXTURE.nodes, GRAPH_FIXTURE.edges, "relevance", 3);
    expect(view.nodes.map((n) => n.id)).toEqual(["sea", "crab", "crustacean"]);
    expect(view.edges.map((e) => e.id).sort()).toEqual([
      "crab-atlocation-sea",
      "crab-isa-crustacean",
    ]);
  });

  it("returns everything when k covers the graph", () => {
    const view = filterTopK(GRAPH_FIXTURE.nodes, GRAPH_FIXTURE.edges, "relevance", 10);
    expect(view.nodes.length).toBe(4);
    expect(view.edges.length).toBe(3);
  });
});

describe("renderGraph", () => {
  beforeEach(() => {
    vi.stubGlobal("fetch", vi.fn());
  });

  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("exposes all four view controls plus the sort mode", () => {
    const box = document.createElement("div");
    renderGraph(GRAPH_FIXTURE, freshConfig(), box);
    expect(box.querySelector("input.edge-labels")).not.toBeNull();
    expect(box.querySelector("input.top-k")).not.toBeNull();
    expect(box.querySelector("input.spacing")).not.toBeNull();
    const radios = [...box.querySelectorAll<HTMLInputElement>("input[name=layout]")];
    expect(radios.map((r) => r.value)).toEqual(["dagre", "breadth_first", "grid"]);
    expect(box.querySelector("select.sort-mode")).not.toBeNull();
  });

  it("draws every node, edge, and edge label by default", () => {
    const box = document.createElement("div");
    renderGraph(GRAPH_FIXTURE, freshConfig(), box);
    expect(nodeIds(box).length).toBe(4);
    expect(box.querySelectorAll("[data-edge]").length).toBe(3);
    expect(box.querySelectorAll(".edge-label").length).toBe(3);
    const labels = [...box.querySelectorAll(".edge-label")].map(
      (t) => t.textContent,
    );
    expect(labels.sort()).toEqual(["AtLocation", "IsA", "RelatedTo"]);
  });

  it("toggles edge labels without refetching", () => {
    const box = document.createElement("div");
    renderGraph(GRAPH_FIXTURE, freshConfig(), box);
    const toggle = box.querySelector<HTMLInputElement>("input.edge-labels")!;
    toggle.checked = false;
    toggle.dispatchEvent(new Event("change"));
    expect(box.querySelectorAll(".edge-label").length).toBe(0);
    expect(box.querySelectorAll("[data-edge]").length).toBe(3);
    toggle.checked = true;
    toggle.dispatchEvent(new Event("change"));
    expect(box.querySelectorAll(".edge-label").length).toBe(3);
    expect(fetch).not.toHaveBeenCalled();
  });

  it("filters to exactly the ranked top-k as the slider moves", () => {
    const box = document.createElement("div");
    renderGraph(GRAPH_FIXTURE, freshConfig(), box);
    const slider = box.querySelector<HTMLInputElement>("input.top-k")!;
    slider.value = "2";
    slider.dispatchEvent(new Event("input"));
    expect(nodeIds(box).sort()).toEqual(["crab", "sea"]);
    expect(box.querySelectorAll("[data-edge]").length).toBe(1);
    slider.value = "1";
    slider.dispatchEvent(new Event("input"));
    expect(nodeIds(box)).toEqual(["sea"]);
    expect(fetch).not.toHaveBeenCalled();
  });

  it("re-ranks client-side when the sort mode changes", () => {
    const box = document.createElement("div");
    renderGraph(GRAPH_FIXTURE, freshConfig(), box);
    const slider = box.querySelector<HTMLInputElement>("input.top-k")!;
    slider.value = "1";
    slider.dispatchEvent(new Event("input"));
    expect(nodeIds(box)).toEqual(["sea"]);
    const sort = box.querySelector<HTMLSelectElement>("select.sort-mode")!;
    sort.value = "incoming_attention";
    sort.dispatchEvent(new Event("change"));
    expect(nodeIds(box)).toEqual(["crustacean"]);
    expect(fetch).not.toHaveBeenCalled();
  });

  it("moves nodes when the layout changes, still without fetching", () => {
    const box = document.createElement("div");
    renderGraph(GRAPH_FIXTURE, freshConfig(), box);
    const at = (): string[] =>
      [...box.querySelectorAll("circle")].map(
        (c) => `${c.getAttribute("cx")},${c.getAttribute("cy")}`,
      );
    const layered = at();
    const grid = box.querySelector<HTMLInputElement>('input[value="grid"]')!;
    grid.checked = true;
    grid.dispatchEvent(new Event("change"));
    expect(at()).not.toEqual(layered);
    expect(fetch).not.toHaveBeenCalled();
  });

  it("rescales coordinates when spacing moves", () => {
    const box = document.createElement("div");
    const config = freshConfig();
    renderGraph(GRAPH_FIXTURE, config, box);
    const cxs = (): number[] =>
      [...box.querySelectorAll("circle")].map((c) => Number(c.getAttribute("cx")));
    const before = cxs();
    const spacing = box.querySelector<HTMLInputElement>("input.spacing")!;
    spacing.value = "2";
    spacing.dispatchEvent(new Event("input"));
    const after = cxs();
    before.forEach((x, i) => expect(after[i]).toBeCloseTo(2 * x, 9));
    expect(fetch).not.toHaveBeenCalled();
  });

  it("prints answer scores verbatim and flags the prediction", () => {
    const box = document.createElement("div");
    renderGraph(GRAPH_FIXTURE, freshConfig(), box);
    const rows = [...box.querySelectorAll<HTMLElement>(".score-row")];
    expect(rows.map((r) => r.textContent)).toEqual([
      "desert: not linked",
      "saltwater: -0.352696245",
    ]);
    expect(rows[1].classList.contains("predicted")).toBe(true);
  });

  it("colors nodes by role", () => {
    const box = document.createElement("div");
    renderGraph(GRAPH_FIXTURE, freshConfig(), box);
    const byId = new Map(
      [...box.querySelectorAll<SVGGElement>("[data-node]")].map((g) => [
        g.dataset.node,
        g.getAttribute("class"),
      ]),
    );
    expect(byId.get("crab")).toBe("node role-question");
    expect(byId.get("saltwater")).toBe("node role-answer");
    expect(byId.get("sea")).toBe("node role-other");
  });
});

/** Client view state: selected skills, current input, panel configs. */

import type { GraphViewConfig, QueryInput } from "./types.js";

export const MAX_SKILLS = 3;
export const SKILL_CAP_NOTICE = `up to ${MAX_SKILLS} skills can be compared at once`;

export interface AddResult {
  ok: boolean;
  notice?: string;
}

export class ViewState {
  readonly skills: string[] = [];
  question = "";
  context = "";
  candidates = "";
  saliencyMethod = "integrated_grad";
  graph: GraphViewConfig = {
    show_edge_labels: true,
    top_k: 10,
    spacing: 1.0,
    layout: "dagre",
    sort_mode: "relevance",
  };

  addSkill(id: string): AddResult {
    if (this.skills.includes(id)) {
      return { ok: true };
    }
    if (this.skills.length >= MAX_SKILLS) {
      return { ok: false, notice: SKILL_CAP_NOTICE };
    }
    this.skills.push(id);
    return { ok: true };
  }

  removeSkill(id: string): void {
    const at = this.skills.indexOf(id);
    if (at >= 0) this.skills.splice(at, 1);
  }

  /** The query action is enabled only with a non-blank question. */
  canQuery(): boolean {
    return this.question.trim().length > 0 && this.skills.length > 0;
  }

  queryInput(): QueryInput {
    const input: QueryInput = { question: this.question };
    if (this.context.trim()) input.context = this.context;
    const cands = this.candidates
      .split(",")
      .map((c) => c.trim())
      .filter((c) => c.length > 0);
    if (cands.length) input.candidates = cands;
    return input;
  }
}

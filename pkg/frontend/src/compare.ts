/** Side-by-side comparison: skill picker and one result card per skill.
 *
 * Cards are aligned in a single row so the same question's predictions can
 * be read across skills. Each card carries its own explain/attack/graph
 * detail area.
 */

import { ViewState } from "./state.js";
import type { Prediction, QueryResponse, SkillDoc } from "./types.js";

export const ATTACK_METHODS = ["hotflip", "input_reduction", "sub_span", "top_k"];
export const SALIENCY_METHODS = [
  "vanilla_grad",
  "integrated_grad",
  "smoothgrad",
  "attention",
  "scaled_attention",
];

/** Checkbox list over the registered skills; enforces the selection cap. */
export function renderSkillPicker(
  skills: SkillDoc[],
  state: ViewState,
  container: HTMLElement,
  onChange: () => void,
): void {
  container.textContent = "";
  const notice = document.createElement("div");
  notice.className = "cap-notice";
  for (const skill of skills) {
    const row = document.createElement("label");
    row.className = "skill-option";
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = skill.id;
    box.checked = state.skills.includes(skill.id);
    box.addEventListener("change", () => {
      notice.textContent = "";
      if (box.checked) {
        const result = state.addSkill(skill.id);
        if (!result.ok) {
          box.checked = false;
          notice.textContent = result.notice ?? "";
        }
      } else {
        state.removeSkill(skill.id);
      }
      onChange();
    });
    const caption = document.createElement("span");
    caption.textContent = `${skill.name} (${skill.kind})`;
    row.append(box, caption);
    container.appendChild(row);
  }
  container.appendChild(notice);
}

function predictionRow(p: Prediction, index: number): HTMLElement {
  const row = document.createElement("div");
  row.className = index === 0 ? "prediction top" : "prediction";
  const answer = document.createElement("span");
  answer.className = "answer";
  answer.textContent = p.answer;
  const prob = document.createElement("span");
  prob.className = "prob";
  prob.textContent = p.probability.toFixed(4);
  prob.title = `score ${p.score}`;
  row.append(answer, prob);
  return row;
}

export interface CardHandlers {
  onExplain: (predictionIndex: number) => void;
  onAttack: (method: string) => void;
  onGraph: () => void;
}

/** One card: prediction list, action buttons, and an empty detail area. */
export function renderQueryCard(
  skill: SkillDoc,
  response: QueryResponse,
  handlers: CardHandlers,
): HTMLElement {
  const card = document.createElement("div");
  card.className = "result-card";
  card.dataset.skill = skill.id;

  const head = document.createElement("h3");
  head.textContent = skill.name;
  card.appendChild(head);

  const list = document.createElement("div");
  list.className = "predictions";
  response.predictions.forEach((p, i) => list.appendChild(predictionRow(p, i)));
  card.appendChild(list);

  const actions = document.createElement("div");
  actions.className = "actions";
  if (skill.kind === "graph_reasoner") {
    const graphBtn = document.createElement("button");
    graphBtn.className = "show-graph";
    graphBtn.textContent = "Show graph";
    graphBtn.addEventListener("click", () => handlers.onGraph());
    actions.appendChild(graphBtn);
  } else {
    const explainBtn = document.createElement("button");
    explainBtn.className = "explain";
    explainBtn.textContent = "Explain this output";
    explainBtn.addEventListener("click", () => handlers.onExplain(0));
    actions.appendChild(explainBtn);

    const attackSelect = document.createElement("select");
    attackSelect.className = "attack-method";
    for (const method of ATTACK_METHODS) {
      const opt = document.createElement("option");
      opt.value = method;
      opt.textContent = method;
      attackSelect.appendChild(opt);
    }
    const attackBtn = document.createElement("button");
    attackBtn.className = "attack";
    attackBtn.textContent = "Attack";
    attackBtn.addEventListener("click", () => handlers.onAttack(attackSelect.value));
    actions.append(attackSelect, attackBtn);
  }
  card.appendChild(actions);

  const detail = document.createElement("div");
  detail.className = "detail";
  card.appendChild(detail);
  return card;
}

export function renderError(code: string, message: string): HTMLElement {
  const box = document.createElement("div");
  box.className = "error";
  box.textContent = `${code}: ${message}`;
  return box;
}

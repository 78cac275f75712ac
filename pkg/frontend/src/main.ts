/** Page wiring: toolbar, skill picker, query fan-out, detail actions. */

import { ApiClient, ApiError, SequenceGate } from "./api.js";
import { renderAttack } from "./attack.js";
import {
  SALIENCY_METHODS,
  renderError,
  renderQueryCard,
  renderSkillPicker,
} from "./compare.js";
import { renderGraph } from "./graph.js";
import { renderHeatmap } from "./saliency.js";
import { ViewState } from "./state.js";
import type { SkillDoc } from "./types.js";

function errorBox(err: unknown): HTMLElement {
  if (err instanceof ApiError) return renderError(err.code, err.message);
  return renderError("NETWORK", String(err));
}

export async function boot(root: HTMLElement): Promise<void> {
  const api = new ApiClient();
  const state = new ViewState();
  const queryGate = new SequenceGate();
  const detailGates = new Map<string, SequenceGate>();
  const gateFor = (skillId: string): SequenceGate => {
    let gate = detailGates.get(skillId);
    if (!gate) {
      gate = new SequenceGate();
      detailGates.set(skillId, gate);
    }
    return gate;
  };

  root.textContent = "";
  const toolbar = document.createElement("div");
  toolbar.className = "toolbar";
  const picker = document.createElement("div");
  picker.className = "skill-picker";
  const results = document.createElement("div");
  results.className = "compare-row";
  root.append(toolbar, picker, results);

  const question = document.createElement("input");
  question.className = "question";
  question.placeholder = "question";
  const context = document.createElement("input");
  context.className = "context";
  context.placeholder = "context (extractive skills)";
  const candidates = document.createElement("input");
  candidates.className = "candidates";
  candidates.placeholder = "candidates, comma separated";

  const saliency = document.createElement("select");
  saliency.className = "saliency-method";
  for (const method of SALIENCY_METHODS) {
    const opt = document.createElement("option");
    opt.value = method;
    opt.textContent = method;
    opt.selected = method === state.saliencyMethod;
    saliency.appendChild(opt);
  }
  saliency.addEventListener("change", () => {
    state.saliencyMethod = saliency.value;
  });

  const queryBtn = document.createElement("button");
  queryBtn.className = "run-query";
  queryBtn.textContent = "Query";

  const sync = (): void => {
    state.question = question.value;
    state.context = context.value;
    state.candidates = candidates.value;
    queryBtn.disabled = !state.canQuery();
  };
  question.addEventListener("input", sync);
  context.addEventListener("input", sync);
  candidates.addEventListener("input", sync);
  sync();

  toolbar.append(question, context, candidates, saliency, queryBtn);

  let skills: SkillDoc[] = [];
  try {
    skills = (await api.listSkills()).skills;
  } catch (err) {
    root.appendChild(errorBox(err));
    return;
  }
  const byId = new Map(skills.map((s) => [s.id, s]));
  renderSkillPicker(skills, state, picker, sync);

  const runDetail = (
    detail: HTMLElement,
    fetcher: () => Promise<void>,
  ): void => {
    detail.textContent = "loading";
    fetcher().catch((err) => {
      detail.textContent = "";
      detail.appendChild(errorBox(err));
    });
  };

  const runQuery = async (): Promise<void> => {
    const token = queryGate.issue();
    const input = state.queryInput();
    const selected = state.skills.map((id) => byId.get(id)!).filter(Boolean);
    const cards = await Promise.all(
      selected.map(async (skill) => {
        try {
          const resp = await api.query(skill.id, input);
          const card = renderQueryCard(skill, resp, {
            onExplain: (predictionIndex) => {
              const detail = card.querySelector<HTMLElement>(".detail")!;
              const gate = gateFor(skill.id);
              const t = gate.issue();
              runDetail(detail, async () => {
                const ex = await api.explain(
                  skill.id,
                  input,
                  state.saliencyMethod,
                  undefined,
                  predictionIndex,
                );
                if (!gate.accept(t)) return;
                detail.textContent = "";
                renderHeatmap(ex.saliency, detail);
              });
            },
            onAttack: (method) => {
              const detail = card.querySelector<HTMLElement>(".detail")!;
              const gate = gateFor(skill.id);
              const t = gate.issue();
              runDetail(detail, async () => {
                const atk = await api.attack(skill.id, input, method, state.saliencyMethod);
                if (!gate.accept(t)) return;
                detail.textContent = "";
                renderAttack(atk, detail);
              });
            },
            onGraph: () => {
              const detail = card.querySelector<HTMLElement>(".detail")!;
              const gate = gateFor(skill.id);
              const t = gate.issue();
              runDetail(detail, async () => {
                const wg = await api.graph(skill.id, input);
                if (!gate.accept(t)) return;
                detail.textContent = "";
                renderGraph(wg, state.graph, detail);
              });
            },
          });
          return card;
        } catch (err) {
          const card = document.createElement("div");
          card.className = "result-card";
          card.dataset.skill = skill.id;
          const head = document.createElement("h3");
          head.textContent = skill.name;
          card.append(head, errorBox(err));
          return card;
        }
      }),
    );
    if (!queryGate.accept(token)) return;
    results.textContent = "";
    for (const card of cards) results.appendChild(card);
  };

  queryBtn.addEventListener("click", () => {
    void runQuery();
  });
}

const mount = document.getElementById("app");
if (mount) {
  void boot(mount);
}

/** Attack result diff.
 *
 * Replacements render green with the original word in a hover tooltip,
 * deletions render struck through, keep-window/keep-set survivors render
 * highlighted with everything else struck. Special tokens are skipped.
 */

import type { AttackResponse, Prediction } from "./types.js";

const SPECIALS = new Set(["[CLS]", "[SEP]", "[PAD]"]);

interface TokenRender {
  text: string;
  cls: string;
  tooltip?: string;
}

/** Pure mapping from (tokens, edits) to per-position render instructions. */
export function diffTokens(attack: AttackResponse): Map<number, TokenRender> {
  const tokens = attack.saliency_basis.tokens;
  const out = new Map<number, TokenRender>();
  tokens.forEach((token, pos) => {
    if (!SPECIALS.has(token)) {
      out.set(pos, { text: token, cls: "tok" });
    }
  });

  const keep = attack.edits.find(
    (e) => e.kind === "keep_window" || e.kind === "keep_set",
  );
  if (keep) {
    const kept = new Set(keep.positions);
    for (const [pos, render] of out) {
      render.cls = kept.has(pos) ? "tok kept" : "tok deleted";
    }
    return out;
  }

  for (const edit of attack.edits) {
    for (let i = 0; i < edit.positions.length; i++) {
      const pos = edit.positions[i];
      if (edit.kind === "replace") {
        out.set(pos, {
          text: edit.replacement ?? "",
          cls: "tok replaced",
          tooltip: edit.original[i],
        });
      } else if (edit.kind === "delete") {
        out.set(pos, { text: edit.original[i], cls: "tok deleted" });
      }
    }
  }
  return out;
}

function describe(p: Prediction): string {
  return `${p.answer} (p=${p.probability.toFixed(4)})`;
}

export function renderAttack(attack: AttackResponse, container: HTMLElement): void {
  container.textContent = "";

  const banner = document.createElement("div");
  banner.className = attack.success ? "banner changed" : "banner unchanged";
  banner.textContent = attack.success
    ? `prediction changed: ${describe(attack.original_prediction)} -> ${describe(attack.new_prediction)}`
    : `prediction unchanged: ${describe(attack.new_prediction)}`;
  container.appendChild(banner);

  const text = document.createElement("div");
  text.className = "diff";
  const renders = diffTokens(attack);
  const positions = [...renders.keys()].sort((a, b) => a - b);
  for (const pos of positions) {
    const render = renders.get(pos)!;
    const span = document.createElement("span");
    span.className = render.cls;
    span.textContent = render.text;
    if (render.tooltip !== undefined) span.title = render.tooltip;
    text.appendChild(span);
  }
  container.appendChild(text);
}

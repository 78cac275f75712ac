/** Token heatmap: linear opacity over max-one-normalized scores.
 *
 * Hovering a token shows the exact score from the response, four
 * decimals. An all-zero map renders every token unhighlighted.
 */

import type { SaliencyPayload } from "./types.js";

export function formatScore(score: number): string {
  return score.toFixed(4);
}

export function renderHeatmap(payload: SaliencyPayload, container: HTMLElement): void {
  container.textContent = "";
  container.classList.add("heatmap");
  const max = Math.max(...payload.scores);
  payload.tokens.forEach((token, i) => {
    const score = payload.scores[i];
    const span = document.createElement("span");
    span.className = "tok";
    span.textContent = token;
    span.dataset.score = String(score);
    span.title = formatScore(score);
    if (max > 0) {
      span.style.backgroundColor = `rgba(214, 121, 16, ${score / max})`;
    }
    container.appendChild(span);
  });
}

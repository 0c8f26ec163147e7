/** Webstory player: the current screen's background with clickable
 * rectangles overlaid. Only the current screen's areas are rendered, so a
 * wrong-screen click cannot be issued from the UI. */

import type { ModelDocument, ModelNode } from "./types.js";
import { escapeHtml } from "./renderStatechart.js";
import type { ViewState } from "./viewState.js";

interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

function rectOf(area: ModelNode): Rect {
  const raw = area.properties["rect"];
  const values = Array.isArray(raw) ? raw.map(Number) : [0, 0, 10, 10];
  return { x: values[0], y: values[1], w: values[2], h: values[3] };
}

export function currentClickAreas(
  model: ModelDocument,
  screenId: string,
): ModelNode[] {
  return model.nodes
    .filter((n) => n.kind === "clickArea" && n.parent === screenId)
    .sort((a, b) => (a.id < b.id ? -1 : 1));
}

export function renderWebstoryPanel(state: ViewState): string {
  const model = state.model;
  const game = state.gameState;
  if (!model || !game) {
    return `<p class="empty">no story session</p>`;
  }
  const screen = model.nodes.find((n) => n.id === game.currentScreen);
  const background = screen
    ? String(screen.properties["backgroundImage"] ?? "")
    : "";
  const areas = currentClickAreas(model, game.currentScreen)
    .map((area) => {
      const rect = rectOf(area);
      const style =
        `left:${rect.x}px;top:${rect.y}px;width:${rect.w}px;height:${rect.h}px`;
      const disabled = state.pending ? ` data-disabled="true"` : "";
      return (
        `<a class="ws-hotspot" href="#" data-action="click-area" ` +
        `data-area-id="${escapeHtml(area.id)}" style="${style}"${disabled}>` +
        `<span>${escapeHtml(area.id)}</span></a>`
      );
    })
    .join("");

  const vars = Object.entries(game.valuation)
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(
      ([name, value]) =>
        `<tr><td>${escapeHtml(name)}</td>` +
        `<td data-var="${escapeHtml(name)}">${value}</td></tr>`,
    )
    .join("");

  const log = state.log
    .map(
      (entry) =>
        `<li><strong>${escapeHtml(entry.label)}</strong> ` +
        `${escapeHtml(entry.detail)}</li>`,
    )
    .join("");

  const finished = game.finished
    ? `<p class="finished">the story ends here</p>`
    : "";
  const error = state.error
    ? `<p class="error">${escapeHtml(state.error)}</p>`
    : "";

  return (
    `<section class="webstory-panel">` +
    `<div class="ws-stage" data-screen-id="${escapeHtml(game.currentScreen)}">` +
    `<img alt="${escapeHtml(game.currentScreen)}" ` +
    `src="/assets/${escapeHtml(background)}">${areas}</div>` +
    `<div class="ws-side"><h3>screen</h3>` +
    `<p class="ws-screen-name">${escapeHtml(game.currentScreen)}</p>` +
    `${finished}${error}` +
    `<h3>variables</h3><table><tbody>${vars}</tbody></table>` +
    `<h3>log</h3><ul>${log}</ul></div>` +
    `</section>`
  );
}

/** The screen id shown by a rendered panel, for conformance tests. */
export function shownScreen(html: string): string | null {
  const match = html.match(/data-screen-id="([^"]*)"/);
  return match ? match[1] : null;
}

/** Schematic statechart panel: containment boxes with active highlighting,
 * one button per declared trigger, the variable table and the step log.
 *
 * Pure string rendering; every highlighted id comes straight from the
 * API's activeStates, never from client-side stepping.
 */

import type { ModelDocument, ModelNode } from "./types.js";
import type { ViewState } from "./viewState.js";

const STATE_KINDS = new Set([
  "start",
  "end",
  "state",
  "hierarchicalState",
  "concurrentState",
  "region",
  "decision",
  "history",
]);

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function childrenOf(model: ModelDocument, parent?: string): ModelNode[] {
  return model.nodes
    .filter((n) => n.parent === parent && STATE_KINDS.has(n.kind))
    .sort((a, b) => (a.id < b.id ? -1 : 1));
}

export function declaredTriggers(model: ModelDocument): string[] {
  const containers = new Set(
    model.nodes.filter((n) => n.kind === "declarations").map((n) => n.id),
  );
  return model.nodes
    .filter((n) => n.kind === "trigger" && n.parent !== undefined && containers.has(n.parent))
    .map((n) => n.id)
    .sort();
}

export function declaredVariables(model: ModelDocument): string[] {
  const containers = new Set(
    model.nodes.filter((n) => n.kind === "declarations").map((n) => n.id),
  );
  return model.nodes
    .filter((n) => n.kind === "variable" && n.parent !== undefined && containers.has(n.parent))
    .map((n) => n.id)
    .sort();
}

function renderNode(
  model: ModelDocument,
  node: ModelNode,
  active: Set<string>,
): string {
  const classes = ["sc-node", `sc-${node.kind}`];
  if (active.has(node.id)) {
    classes.push("active");
    if (node.kind === "end") {
      classes.push("end-active");
    }
  }
  const children = childrenOf(model, node.id);
  const inner = children.map((c) => renderNode(model, c, active)).join("");
  const label =
    node.kind === "start" || node.kind === "end" || node.kind === "history"
      ? `<span class="sc-marker">${escapeHtml(node.kind)}</span> ${escapeHtml(node.id)}`
      : escapeHtml(node.id);
  return (
    `<div class="${classes.join(" ")}" data-state-id="${escapeHtml(node.id)}">` +
    `<span class="sc-label">${label}</span>${inner}</div>`
  );
}

export function renderStatechartPanel(state: ViewState): string {
  const model = state.model;
  const config = state.configuration;
  if (!model || !config) {
    return `<p class="empty">no statechart session</p>`;
  }
  const active = new Set(config.activeStates);
  const tree = childrenOf(model, undefined)
    .map((n) => renderNode(model, n, active))
    .join("");

  const disabled = state.pending || config.terminated ? " disabled" : "";
  const buttons = declaredTriggers(model)
    .map(
      (t) =>
        `<button data-action="fire" data-trigger="${escapeHtml(t)}"${disabled}>` +
        `${escapeHtml(t)}</button>`,
    )
    .join("");

  const rows = declaredVariables(model)
    .map((name) => {
      const value = config.env[name];
      const shown = typeof value === "boolean" ? String(value) : String(value ?? "?");
      return (
        `<tr><td>${escapeHtml(name)}</td>` +
        `<td data-var="${escapeHtml(name)}">${escapeHtml(shown)}</td></tr>`
      );
    })
    .join("");

  const log = state.log
    .map(
      (entry) =>
        `<li><strong>${escapeHtml(entry.label)}</strong> ` +
        `${escapeHtml(entry.detail)}</li>`,
    )
    .join("");

  const status = config.terminated
    ? `<p class="terminated">terminated</p>`
    : "";
  const error = state.error
    ? `<p class="error">${escapeHtml(state.error)}</p>`
    : "";

  return (
    `<section class="statechart-panel">` +
    `<div class="sc-tree">${tree}</div>` +
    `<div class="sc-controls"><h3>triggers</h3>${buttons}${status}${error}` +
    `<h3>variables</h3><table class="sc-vars"><tbody>${rows}</tbody></table>` +
    `<h3>log</h3><ul class="sc-log">${log}</ul></div>` +
    `</section>`
  );
}

/** The highlighted state ids of a rendered panel, for conformance tests. */
export function highlightedStates(html: string): string[] {
  const out: string[] = [];
  const re = /class="([^"]*)" data-state-id="([^"]*)"/g;
  for (const match of html.matchAll(re)) {
    if (match[1].split(" ").includes("active")) {
      out.push(match[2]);
    }
  }
  return out.sort();
}

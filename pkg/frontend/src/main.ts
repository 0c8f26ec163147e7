/** Browser bootstrap: model picker, session panels, event delegation. */

import { ApiClient, HttpTransport } from "./api.js";
import { renderStatechartPanel, escapeHtml } from "./renderStatechart.js";
import { renderWebstoryPanel } from "./renderWebstory.js";
import {
  ViewState,
  clickArea,
  emptyViewState,
  fireTrigger,
  loadModels,
  openSession,
} from "./viewState.js";

const client = new ApiClient(new HttpTransport());
let state: ViewState = emptyViewState();

function renderModelPicker(current: ViewState): string {
  const options = current.models
    .filter((m) => m.modelType === "statechart" || m.modelType === "webstory")
    .map((m) => {
      const selected = m.id === current.selectedModel ? " selected" : "";
      return (
        `<option value="${escapeHtml(m.id)}"${selected}>` +
        `${escapeHtml(m.id)} (${escapeHtml(m.modelType)})</option>`
      );
    })
    .join("");
  return (
    `<header><h1>ldekit simulator</h1>` +
    `<select id="model-picker"><option value="">choose a model</option>` +
    `${options}</select></header>`
  );
}

function render(): void {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  let panel = `<p class="empty">pick a model to start a session</p>`;
  if (state.kind === "statechart") {
    panel = renderStatechartPanel(state);
  } else if (state.kind === "webstory") {
    panel = renderWebstoryPanel(state);
  } else if (state.error) {
    panel = `<p class="error">${escapeHtml(state.error)}</p>`;
  }
  root.innerHTML = renderModelPicker(state) + panel;
}

async function update(next: Promise<ViewState>): Promise<void> {
  state = await next;
  render();
}

document.addEventListener("change", (event) => {
  const target = event.target as HTMLElement;
  if (target.id === "model-picker") {
    const modelId = (target as HTMLSelectElement).value;
    if (modelId) {
      void update(openSession(state, client, modelId));
    }
  }
});

document.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest(
    "[data-action]",
  ) as HTMLElement | null;
  if (!target || state.pending) {
    return;
  }
  const action = target.dataset["action"];
  if (action === "fire" && target.dataset["trigger"]) {
    state = { ...state, pending: true };
    render();
    void update(
      fireTrigger({ ...state, pending: false }, client, target.dataset["trigger"]),
    );
  } else if (action === "click-area" && target.dataset["areaId"]) {
    event.preventDefault();
    state = { ...state, pending: true };
    render();
    void update(
      clickArea({ ...state, pending: false }, client, target.dataset["areaId"]),
    );
  }
});

void update(loadModels(state, client));

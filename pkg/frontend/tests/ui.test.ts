import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  declaredTriggers,
  declaredVariables,
  highlightedStates,
  renderStatechartPanel,
} from "../src/renderStatechart.js";
import { renderWebstoryPanel, shownScreen } from "../src/renderWebstory.js";
import type { Configuration, FireResponse, Session } from "../src/types.js";
import {
  ViewState,
  clickArea,
  emptyViewState,
  fireTrigger,
  loadModels,
  openSession,
  refreshSession,
} from "../src/viewState.js";
import { Exchange, FakeTransport } from "./fakeTransport.js";

function loadRecording(name: string): Exchange[] {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")).exchanges as Exchange[];
}

async function startSession(
  name: string,
  modelId: string,
): Promise<{ state: ViewState; client: ApiClient; recording: Exchange[] }> {
  const recording = loadRecording(name);
  const client = new ApiClient(new FakeTransport(recording));
  let state = emptyViewState();
  state = await loadModels(state, client);
  state = await openSession(state, client, modelId);
  return { state, client, recording };
}

describe("statechart panel conformance", () => {
  it("highlights exactly the API's active states after each scripted trigger", async () => {
    const { state: opened, client, recording } =
      await startSession("statechart.json", "coffee-machine");
    let state = opened;

    const sessionResponse = recording[2].response as Session;
    expect(highlightedStates(renderStatechartPanel(state))).toEqual(
      [...sessionResponse.configuration!.activeStates].sort(),
    );

    const fires = recording.filter((e) => e.path.endsWith("/fire"));
    expect(fires.length).toBe(3);
    for (const exchange of fires) {
      const trigger = (exchange.body as { trigger: string }).trigger;
      state = await fireTrigger(state, client, trigger);
      const rendered = renderStatechartPanel(state);
      const expected = (exchange.response as FireResponse).configuration
        .activeStates;
      expect(highlightedStates(rendered)).toEqual([...expected].sort());
    }
  });

  it("shows every declared variable in the table", async () => {
    const { state } = await startSession("statechart.json", "coffee-machine");
    const rendered = renderStatechartPanel(state);
    for (const name of declaredVariables(state.model!)) {
      expect(rendered).toContain(`data-var="${name}"`);
    }
    expect(declaredVariables(state.model!)).toContain("beans");
  });

  it("renders one button per declared trigger", async () => {
    const { state } = await startSession("statechart.json", "coffee-machine");
    const rendered = renderStatechartPanel(state);
    const triggers = declaredTriggers(state.model!);
    expect(triggers.length).toBeGreaterThan(0);
    for (const trigger of triggers) {
      expect(rendered).toContain(`data-trigger="${trigger}"`);
    }
  });

  it("disables all trigger buttons once the chart terminated", async () => {
    const { state } = await startSession("statechart.json", "coffee-machine");
    const terminated: Configuration = {
      activeStates: ["end_top"],
      env: { beans: 2 },
      history: {},
      terminated: true,
    };
    const rendered = renderStatechartPanel({
      ...state,
      configuration: terminated,
    });
    const buttons = rendered.match(/<button[^>]*data-action="fire"[^>]*>/g) ?? [];
    expect(buttons.length).toBe(declaredTriggers(state.model!).length);
    for (const button of buttons) {
      expect(button).toContain("disabled");
    }
    expect(rendered).toContain("terminated");
  });

  it("marks active end nodes distinctly", async () => {
    const { state } = await startSession("statechart.json", "coffee-machine");
    const rendered = renderStatechartPanel({
      ...state,
      configuration: {
        activeStates: ["end_top"],
        env: { beans: 0 },
        history: {},
        terminated: true,
      },
    });
    expect(rendered).toMatch(/class="[^"]*end-active[^"]*" data-state-id="end_top"/);
  });

  it("keeps the view equal to a fresh GET of the session", async () => {
    const { state: opened, client, recording } =
      await startSession("statechart.json", "coffee-machine");
    let state = opened;
    for (const exchange of recording.filter((e) => e.path.endsWith("/fire"))) {
      state = await fireTrigger(
        state, client, (exchange.body as { trigger: string }).trigger);
    }
    const refreshed = await refreshSession(state, client);
    expect(refreshed.configuration).toEqual(state.configuration);
  });
});

describe("webstory play-through", () => {
  it("reaches the treasure screen when the key is picked up first", async () => {
    const { state: opened, client, recording } =
      await startSession("webstory_withkey.json", "treasure-hunt");
    let state = opened;
    expect(shownScreen(renderWebstoryPanel(state))).toBe("screen1");

    const clicks = recording.filter((e) => e.path.endsWith("/click"));
    for (const exchange of clicks) {
      const area = (exchange.body as { clickArea: string }).clickArea;
      state = await clickArea(state, client, area);
    }
    const rendered = renderWebstoryPanel(state);
    expect(shownScreen(rendered)).toBe("screen4");
    expect(rendered).toContain("the story ends here");
    expect(state.gameState!.valuation["key"]).toBe(true);
  });

  it("lands on the message screen without the key", async () => {
    const { state: opened, client, recording } =
      await startSession("webstory_nokey.json", "treasure-hunt");
    let state = opened;
    const clicks = recording.filter((e) => e.path.endsWith("/click"));
    for (const exchange of clicks) {
      const area = (exchange.body as { clickArea: string }).clickArea;
      state = await clickArea(state, client, area);
    }
    expect(shownScreen(renderWebstoryPanel(state))).toBe("screen5");
    expect(state.gameState!.valuation["key"]).toBe(false);
  });

  it("only renders the current screen's click areas", async () => {
    const { state } = await startSession("webstory_withkey.json",
                                         "treasure-hunt");
    const rendered = renderWebstoryPanel(state);
    expect(rendered).toContain('data-area-id="areaA"');
    expect(rendered).toContain('data-area-id="areaB"');
    expect(rendered).not.toContain('data-area-id="areaC"');
  });

  it("restores state from the server after a refresh", async () => {
    const { state: opened, client, recording } =
      await startSession("webstory_withkey.json", "treasure-hunt");
    let state = opened;
    for (const exchange of recording.filter((e) => e.path.endsWith("/click"))) {
      state = await clickArea(
        state, client, (exchange.body as { clickArea: string }).clickArea);
    }
    const refreshed = await refreshSession(state, client);
    expect(refreshed.gameState).toEqual(state.gameState);
    expect(shownScreen(renderWebstoryPanel(refreshed))).toBe("screen4");
  });
});

describe("replayed sequences match a fresh GET of the session", () => {
  for (const name of ["statechart.json", "statechart_seq2.json",
                      "statechart_seq3.json"]) {
    it(`sequence ${name}`, async () => {
      const { state: opened, client, recording } =
        await startSession(name, "coffee-machine");
      let state = opened;
      for (const exchange of recording.filter((e) => e.path.endsWith("/fire"))) {
        state = await fireTrigger(
          state, client, (exchange.body as { trigger: string }).trigger);
        expect(highlightedStates(renderStatechartPanel(state))).toEqual(
          [...(exchange.response as FireResponse).configuration.activeStates]
            .sort(),
        );
      }
      const final = recording[recording.length - 1];
      expect(final.method).toBe("GET");
      const refreshed = await refreshSession(state, client);
      expect(refreshed.configuration).toEqual(
        (final.response as Session).configuration,
      );
    });
  }
});

describe("view state discipline", () => {
  it("renders a 409 on fire as `terminated`", async () => {
    const recording = loadRecording("statechart.json");
    const exchanges = recording.slice(0, 3);
    exchanges.push({
      method: "POST",
      path: exchanges[2].path.replace(
        "/api/statechart/coffee-machine/sessions", "",
      ) || "/api/sessions/s1/fire",
      body: { trigger: "Power" },
      status: 409,
      response: { detail: "the chart has terminated" },
    });
    exchanges[3].path = `/api/sessions/${
      (exchanges[2].response as Session).sessionId}/fire`;
    const client = new ApiClient(new FakeTransport(exchanges));
    let state = emptyViewState();
    state = await loadModels(state, client);
    state = await openSession(state, client, "coffee-machine");
    state = await fireTrigger(state, client, "Power");
    expect(state.error).toBe("terminated");
    expect(renderStatechartPanel(state)).toContain("terminated");
  });
  it("every displayed configuration is byte-derived from an API response", async () => {
    const { state: opened, client, recording } =
      await startSession("statechart.json", "coffee-machine");
    let state = opened;
    const fires = recording.filter((e) => e.path.endsWith("/fire"));
    for (const exchange of fires) {
      state = await fireTrigger(
        state, client, (exchange.body as { trigger: string }).trigger);
      expect(state.configuration).toEqual(
        (exchange.response as FireResponse).configuration,
      );
    }
  });

  it("ignores actions while a request is pending", async () => {
    const { state, client } = await startSession("statechart.json",
                                                 "coffee-machine");
    const pending = { ...state, pending: true };
    expect(await fireTrigger(pending, client, "Power")).toBe(pending);
  });
});

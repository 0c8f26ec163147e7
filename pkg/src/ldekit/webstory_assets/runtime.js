/* Standalone webstory runtime: pure step semantics plus a tiny DOM player.
 *
 * step(modelJson, stateJson, clickAreaId) -> stateJson is pure and works on
 * JSON strings, so it can be conformance-tested headlessly (node) against
 * the generating toolkit.
 */
(function (root) {
  "use strict";

  function index(model) {
    var nodes = {};
    var children = {};
    var flows = {};
    model.nodes.forEach(function (n) {
      nodes[n.id] = n;
      if (n.parent) {
        (children[n.parent] = children[n.parent] || []).push(n);
      }
    });
    model.edges.forEach(function (e) {
      (flows[e.source] = flows[e.source] || {})[e.kind] = e.target;
    });
    Object.keys(children).forEach(function (k) {
      children[k].sort(function (a, b) { return a.id < b.id ? -1 : 1; });
    });
    return { nodes: nodes, children: children, flows: flows };
  }

  function clickAreas(idx, screenId) {
    return (idx.children[screenId] || []).filter(function (n) {
      return n.kind === "clickArea";
    });
  }

  function target(idx, nodeId, kind) {
    return (idx.flows[nodeId] || {})[kind];
  }

  function initialState(model) {
    var idx = index(model);
    var valuation = {};
    model.nodes.forEach(function (n) {
      if (n.kind === "variable") {
        valuation[n.id] = Boolean(n.properties.initial || false);
      }
    });
    var marker = model.nodes.filter(function (n) {
      return n.kind === "startMarker";
    })[0];
    var screen = target(idx, marker.id, "controlFlow");
    return makeState(idx, screen, valuation);
  }

  function makeState(idx, screen, valuation) {
    var sorted = {};
    Object.keys(valuation).sort().forEach(function (k) {
      sorted[k] = valuation[k];
    });
    return {
      currentScreen: screen,
      finished: clickAreas(idx, screen).length === 0,
      valuation: sorted
    };
  }

  function applyClick(model, state, clickAreaId) {
    var idx = index(model);
    var area = idx.nodes[clickAreaId];
    if (!area || area.kind !== "clickArea" ||
        area.parent !== state.currentScreen) {
      throw new Error("click area " + clickAreaId + " is not on screen " +
                      state.currentScreen);
    }
    var valuation = {};
    Object.keys(state.valuation).forEach(function (k) {
      valuation[k] = state.valuation[k];
    });
    var current = target(idx, clickAreaId, "controlFlow");
    for (;;) {
      var node = idx.nodes[current];
      if (node.kind === "screen") {
        return makeState(idx, current, valuation);
      }
      if (node.kind === "variableModifier") {
        valuation[target(idx, current, "dataWrite")] =
          Boolean(node.properties.targetValue);
        current = target(idx, current, "controlFlow");
      } else {
        var variable = target(idx, current, "dataRead");
        current = target(idx, current, valuation[variable] ? "trueFlow"
                                                           : "falseFlow");
      }
    }
  }

  function step(modelJson, stateJson, clickAreaId) {
    var model = typeof modelJson === "string" ? JSON.parse(modelJson)
                                              : modelJson;
    var state = typeof stateJson === "string" ? JSON.parse(stateJson)
                                              : stateJson;
    return JSON.stringify(applyClick(model, state, clickAreaId));
  }

  function mount(container, model) {
    var state = initialState(model);
    var idx = index(model);

    function render() {
      container.innerHTML = "";
      var screen = idx.nodes[state.currentScreen];
      var frame = document.createElement("div");
      frame.className = "ws-screen";
      var img = document.createElement("img");
      img.src = "assets/" + screen.properties.backgroundImage;
      img.alt = screen.id;
      frame.appendChild(img);
      clickAreas(idx, state.currentScreen).forEach(function (area) {
        var rect = area.properties.rect.map(Number);
        var hotspot = document.createElement("a");
        hotspot.className = "ws-hotspot";
        hotspot.href = "#";
        hotspot.title = area.id;
        hotspot.style.left = rect[0] + "px";
        hotspot.style.top = rect[1] + "px";
        hotspot.style.width = rect[2] + "px";
        hotspot.style.height = rect[3] + "px";
        hotspot.addEventListener("click", function (ev) {
          ev.preventDefault();
          state = applyClick(model, state, area.id);
          render();
        });
        frame.appendChild(hotspot);
      });
      var status = document.createElement("p");
      status.className = "ws-status";
      status.textContent = state.finished
        ? "The story ends here (" + state.currentScreen + ")."
        : "Screen: " + state.currentScreen;
      container.appendChild(frame);
      container.appendChild(status);
    }

    render();
  }

  var api = { step: step, initialState: initialState, mount: mount };
  if (typeof module !== "undefined" && module.exports) {
    module.exports = api;
  }
  root.WebStoryRuntime = api;
})(typeof globalThis !== "undefined" ? globalThis : this);

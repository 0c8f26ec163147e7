"""Wire formats of the session service."""

from __future__ import annotations

from typing import Optional, Union

from pydantic import BaseModel

from ..statechart import Configuration, SimulationEvent
from ..webstory import GameState


class ModelInfo(BaseModel):
    id: str
    modelType: str


class ConfigurationOut(BaseModel):
    activeStates: list[str]
    env: dict[str, Union[bool, int]]
    history: dict[str, list[str]]
    terminated: bool

    @classmethod
    def from_configuration(cls, config: Configuration) -> "ConfigurationOut":
        return cls(
            activeStates=sorted(config.active_states),
            env=dict(sorted(config.env.values.items())),
            history={scope: sorted(stored)
                     for scope, stored in sorted(config.history.items())},
            terminated=config.terminated,
        )


class SimulationEventOut(BaseModel):
    firedTrigger: str
    takenTransitions: list[str]
    executedActions: list[str]
    completions: list[str]

    @classmethod
    def from_event(cls, event: SimulationEvent) -> "SimulationEventOut":
        return cls(
            firedTrigger=event.fired_trigger,
            takenTransitions=list(event.taken_transitions),
            executedActions=list(event.executed_actions),
            completions=list(event.completions),
        )


class GameStateOut(BaseModel):
    currentScreen: str
    valuation: dict[str, bool]
    finished: bool

    @classmethod
    def from_state(cls, state: GameState) -> "GameStateOut":
        return cls(
            currentScreen=state.current_screen,
            valuation=dict(sorted(state.valuation.items())),
            finished=state.finished,
        )


class SessionOut(BaseModel):
    sessionId: str
    modelId: str
    kind: str
    configuration: Optional[ConfigurationOut] = None
    state: Optional[GameStateOut] = None


class FireRequest(BaseModel):
    trigger: str


class FireResponse(BaseModel):
    sessionId: str
    configuration: ConfigurationOut
    event: SimulationEventOut


class ClickRequest(BaseModel):
    clickArea: str


class ClickResponse(BaseModel):
    sessionId: str
    state: GameStateOut


class FireLogEntry(BaseModel):
    event: SimulationEventOut
    configuration: ConfigurationOut


class ClickLogEntry(BaseModel):
    clickArea: str
    state: GameStateOut


class SessionLog(BaseModel):
    sessionId: str
    kind: str
    events: list[Union[FireLogEntry, ClickLogEntry]]


class IssueOut(BaseModel):
    severity: str
    ruleId: str
    message: str
    elementId: Optional[str] = None

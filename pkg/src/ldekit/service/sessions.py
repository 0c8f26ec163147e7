"""In-memory simulation sessions with per-session serialization."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

from ..graph_core import GraphModel
from ..statechart import Configuration, SimulationEvent, Statechart
from ..webstory import GameState, click, initial_state


@dataclass
class Session:
    session_id: str
    model_id: str
    kind: str  # statechart | webstory
    model: GraphModel
    chart: Optional[Statechart] = None
    configuration: Optional[Configuration] = None
    game_state: Optional[GameState] = None
    event_log: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """Steps on one session are serialized; sessions proceed in parallel."""

    def __init__(self):
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._counter = 0

    def _next_id(self) -> str:
        self._counter += 1
        return f"s{self._counter}"

    def create_statechart(self, model: GraphModel) -> Session:
        chart = Statechart(model)
        config = chart.init_configuration()
        with self._lock:
            session = Session(
                session_id=self._next_id(), model_id=model.id,
                kind="statechart", model=model, chart=chart,
                configuration=config)
            self._sessions[session.session_id] = session
        return session

    def create_webstory(self, model: GraphModel) -> Session:
        state = initial_state(model)
        with self._lock:
            session = Session(
                session_id=self._next_id(), model_id=model.id,
                kind="webstory", model=model, game_state=state)
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            return self._sessions.get(session_id)

    def fire(self, session: Session, trigger: str
             ) -> tuple[Configuration, SimulationEvent]:
        with session.lock:
            config, event = session.chart.fire_trigger(
                session.configuration, trigger)
            session.configuration = config
            session.event_log.append(("fire", event, config))
            return config, event

    def click(self, session: Session, click_area: str) -> GameState:
        with session.lock:
            state = click(session.model, session.game_state, click_area)
            session.game_state = state
            session.event_log.append(("click", click_area, state))
            return state

"""Reason-Act-Observe control loop over registered simulation tools.

An episode turns a natural-language objective into a sequence of labeled
turns (thought, action, action_input, observation, ...) ending in either a
final answer or a clarification request. Planning backends are pluggable:
a deterministic rule-based planner for offline use and tests, and a chat
backend speaking the common tool-calling wire shape.
"""

from __future__ import annotations

import json
import re
import uuid
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Optional, Protocol

from .catalog import known_locations
from .chatclient import ChatClient

MAX_ITERATIONS = 8
TOOL_TIMEOUT_S = 120.0
OBSERVATION_CHAR_LIMIT = 2048

TURN_KINDS = ("thought", "action", "action_input", "observation",
              "clarification_request", "final_answer")

# transcript grammar: (thought? action action_input observation)* terminal
_KIND_LETTER = {"thought": "T", "action": "A", "action_input": "I",
                "observation": "O", "final_answer": "F",
                "clarification_request": "C"}
_GRAMMAR = re.compile(r"(?:T?AIO)*[FC]")


class TranscriptError(ValueError):
    """Turn sequence violates the episode grammar."""


@dataclass(frozen=True)
class ParamSpec:
    type: str  # "number" | "integer" | "string" | "boolean"
    description: str = ""
    required: bool = False
    default: Any = None


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    parameters: dict[str, ParamSpec]
    handler: Callable[[dict], tuple[str, dict]]


@dataclass
class AgentTurn:
    kind: str
    content: str
    payload: Optional[dict] = None

    def __post_init__(self):
        if self.kind not in TURN_KINDS:
            raise ValueError(f"unknown turn kind {self.kind!r}")

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "content": self.content}
        if self.payload is not None:
            doc["payload"] = self.payload
        return doc


@dataclass
class Transcript:
    prompt: str
    backend: str
    episode_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    created_at: str = field(default_factory=lambda: datetime.now(
        timezone.utc).isoformat())
    turns: list[AgentTurn] = field(default_factory=list)
    artifacts: dict = field(default_factory=lambda: {"run_ids": [], "files": []})

    def add(self, turn: AgentTurn):
        self.turns.append(turn)

    def record_artifacts(self, produced: dict):
        for run_id in produced.get("run_ids", ()):
            if run_id not in self.artifacts["run_ids"]:
                self.artifacts["run_ids"].append(run_id)
        for path in produced.get("files", ()):
            if path not in self.artifacts["files"]:
                self.artifacts["files"].append(path)

    def validate(self):
        """Check the turn sequence against the episode grammar."""
        word = "".join(_KIND_LETTER[t.kind] for t in self.turns)
        if not _GRAMMAR.fullmatch(word):
            raise TranscriptError(f"bad turn sequence: {word}")

    def to_dict(self) -> dict:
        return {
            "episode_id": self.episode_id,
            "prompt": self.prompt,
            "backend": self.backend,
            "created_at": self.created_at,
            "turns": [t.to_dict() for t in self.turns],
            "artifacts": self.artifacts,
        }


class ToolRegistry:
    def __init__(self):
        self._tools: dict[str, ToolSpec] = {}

    def register(self, spec: ToolSpec):
        if spec.name in self._tools:
            raise ValueError(f"tool {spec.name!r} already registered")
        self._tools[spec.name] = spec

    def get(self, name: str) -> ToolSpec:
        return self._tools[name]

    def names(self) -> list[str]:
        return list(self._tools)

    def __len__(self):
        return len(self._tools)

    def schemas(self) -> list[dict]:
        """Tool declarations in the chat-completion function format."""
        out = []
        for spec in self._tools.values():
            props = {}
            required = []
            for pname, p in spec.parameters.items():
                prop = {"type": p.type}
                if p.description:
                    prop["description"] = p.description
                if p.default is not None:
                    prop["default"] = p.default
                props[pname] = prop
                if p.required:
                    required.append(pname)
            out.append({
                "type": "function",
                "function": {
                    "name": spec.name,
                    "description": spec.description,
                    "parameters": {
                        "type": "object",
                        "properties": props,
                        "required": required,
                    },
                },
            })
        return out

    def validate_args(self, name: str,
                      args: dict) -> tuple[Optional[dict], Optional[str]]:
        """Coerce args against the tool schema.

        Returns (clean_args, None) on success or (None, error_text). Missing
        optional parameters are filled from their defaults, so a successful
        validation always yields a complete argument set.
        """
        if name not in self._tools:
            return None, (f"unknown tool {name!r}; available tools: "
                          f"{', '.join(self._tools)}")
        spec = self._tools[name]
        if not isinstance(args, dict):
            return None, f"arguments must be an object, got {type(args).__name__}"
        unexpected = [k for k in args if k not in spec.parameters]
        if unexpected:
            return None, f"unexpected argument(s): {', '.join(sorted(unexpected))}"
        clean: dict[str, Any] = {}
        for pname, p in spec.parameters.items():
            if pname not in args:
                if p.required:
                    return None, f"missing required argument {pname!r}"
                if p.default is not None:
                    clean[pname] = p.default
                continue
            value = args[pname]
            coerced, err = _coerce(value, p.type)
            if err:
                return None, f"argument {pname!r}: {err}"
            clean[pname] = coerced
        return clean, None


def _coerce(value: Any, type_name: str) -> tuple[Any, Optional[str]]:
    if type_name == "boolean":
        if isinstance(value, bool):
            return value, None
        if isinstance(value, str) and value.strip().lower() in ("true", "false"):
            return value.strip().lower() == "true", None
        if isinstance(value, int) and value in (0, 1):
            return bool(value), None
        return None, f"expected a boolean, got {value!r}"
    if type_name == "integer":
        if isinstance(value, bool):
            return None, f"expected an integer, got {value!r}"
        if isinstance(value, int):
            return value, None
        if isinstance(value, float) and value.is_integer():
            return int(value), None
        if isinstance(value, str):
            try:
                f = float(value)
                if f.is_integer():
                    return int(f), None
            except ValueError:
                pass
        return None, f"expected an integer, got {value!r}"
    if type_name == "number":
        if isinstance(value, bool):
            return None, f"expected a number, got {value!r}"
        if isinstance(value, (int, float)):
            return float(value), None
        if isinstance(value, str):
            try:
                return float(value), None
            except ValueError:
                pass
        return None, f"expected a number, got {value!r}"
    if type_name == "string":
        if isinstance(value, str):
            return value, None
        return None, f"expected a string, got {value!r}"
    return None, f"unsupported schema type {type_name!r}"


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, float):
        return repr(int(value)) if value.is_integer() else repr(value)
    if isinstance(value, int):
        return repr(value)
    if isinstance(value, str):
        return f"'{value}'"
    return repr(value)


def format_action_input(args: dict) -> str:
    """Render arguments in the flat `key = value` transcript style."""
    return ", ".join(f"{k} = {_format_value(v)}" for k, v in args.items())


@dataclass
class PlannerStep:
    kind: str  # "act" | "final" | "clarify"
    thought: Optional[str] = None
    tool_name: Optional[str] = None
    args: Optional[dict] = None
    args_raw: Optional[str] = None
    args_error: Optional[str] = None
    text: Optional[str] = None


class Planner(Protocol):
    name: str

    def next_step(self, prompt: str, history: list[AgentTurn],
                  registry: ToolRegistry) -> PlannerStep:
        ...


# ---------------------------------------------------------------------------
# rule-based planning

_COORD_RE = re.compile(
    r"\(\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*\)")
_GRID_RE = re.compile(r"\b(\d+)\s*[x×]\s*(\d+)\b", re.IGNORECASE)
_NX_RE = re.compile(r"\bnx\s*[=:]?\s*(\d+)", re.IGNORECASE)
_NY_RE = re.compile(r"\bny\s*[=:]?\s*(\d+)", re.IGNORECASE)
_SUMMARY_RE = re.compile(r"summar|describ|analy|explain|interpret|insight",
                         re.IGNORECASE)
_ALL_MECH_RE = re.compile(r"all\s+(?:propagation\s+)?mechanisms", re.IGNORECASE)
_MECH_RES = {
    "LOS": re.compile(r"\blos\b|line.of.sight", re.IGNORECASE),
    "REF": re.compile(r"\breflect\w*|\bref\b", re.IGNORECASE),
    "GREF": re.compile(r"\bground\b|\bgref\b", re.IGNORECASE),
    "NLOS": re.compile(r"\bnlos\b|non.line.of.sight", re.IGNORECASE),
    "BEL": re.compile(r"\bbel\b|building\s+entry|entry\s+loss", re.IGNORECASE),
}


@dataclass
class ScriptedPlan:
    tx: Optional[tuple[float, float, float]]
    location: Optional[str]
    nx: int
    ny: int
    flags: dict[str, bool]
    wants_summary: bool

    @property
    def missing(self) -> list[str]:
        out = []
        if self.tx is None:
            out.append("the transmitter coordinates (x, y, z)")
        if self.location is None:
            out.append("the environment name")
        return out


def parse_prompt(prompt: str) -> ScriptedPlan:
    """Rule-based parameter extraction from a plain-language objective."""
    tx = None
    m = _COORD_RE.search(prompt)
    if m:
        tx = (float(m.group(1)), float(m.group(2)), float(m.group(3)))

    location = None
    lowered = prompt.lower()
    for name in sorted(known_locations(), key=len, reverse=True):
        if re.search(rf"\b{re.escape(name.lower())}\b", lowered):
            location = name
            break

    nx = ny = 50
    g = _GRID_RE.search(prompt)
    if g:
        nx, ny = int(g.group(1)), int(g.group(2))
    mx = _NX_RE.search(prompt)
    if mx:
        nx = int(mx.group(1))
    my = _NY_RE.search(prompt)
    if my:
        ny = int(my.group(1))

    if _ALL_MECH_RE.search(prompt):
        flags = {k: True for k in _MECH_RES}
    else:
        found = {k: bool(rx.search(prompt)) for k, rx in _MECH_RES.items()}
        # no mechanism named at all: default to everything on
        flags = found if any(found.values()) else {k: True for k in _MECH_RES}

    return ScriptedPlan(tx=tx, location=location, nx=nx, ny=ny, flags=flags,
                        wants_summary=bool(_SUMMARY_RE.search(prompt)))


class ScriptedPlanner:
    """Deterministic offline planner: parse, simulate, optionally summarize."""

    name = "scripted"

    def next_step(self, prompt: str, history: list[AgentTurn],
                  registry: ToolRegistry) -> PlannerStep:
        plan = parse_prompt(prompt)
        observations = [t for t in history if t.kind == "observation"]
        actions = [t for t in history if t.kind == "action"]

        if not observations:
            if plan.missing:
                need = " and ".join(plan.missing)
                return PlannerStep(
                    kind="clarify",
                    text=(f"Could you provide {need}? Known environments: "
                          f"{', '.join(known_locations())}."))
            tx_text = ", ".join(_format_value(v) for v in plan.tx)
            thought = (f"The user requests a simulation of the "
                       f"'{plan.location}' environment with a transmitter at "
                       f"({tx_text})"
                       + (", including the requested propagation mechanisms,"
                          " and a summary of the pathloss heatmap."
                          if plan.wants_summary else
                          ", including the requested propagation mechanisms."))
            args = {
                "tx_x": plan.tx[0], "tx_y": plan.tx[1], "tx_z": plan.tx[2],
                "location": plan.location, "nx": plan.nx, "ny": plan.ny,
            }
            args.update(plan.flags)
            return PlannerStep(kind="act", thought=thought,
                               tool_name="simulate_radio_environment", args=args)

        last = observations[-1]
        if last.content.startswith("error:"):
            return PlannerStep(
                kind="final",
                text=f"The requested operation failed. {last.content}")

        summarized = any(t.payload and t.payload.get("tool") ==
                         "summarize_pathloss_image" for t in actions)
        heatmap = (last.payload or {}).get("heatmap")
        if plan.wants_summary and not summarized and heatmap:
            return PlannerStep(kind="act",
                               tool_name="summarize_pathloss_image",
                               args={"image_path": heatmap})

        if summarized:
            answer = f"Simulation completed successfully. {last.content}"
        else:
            answer = observations[0].content
        return PlannerStep(kind="final", text=answer)


# ---------------------------------------------------------------------------
# chat-model planning

_SYSTEM_PROMPT = (
    "You are a radio-propagation simulation assistant. Use the provided tools "
    "to run deterministic pathloss simulations and to summarize generated "
    "heatmaps. Extract parameters from the user's request; never invent "
    "transmitter coordinates or environment names. If required information is "
    "missing or ambiguous, reply with a plain message starting with "
    "'CLARIFY:' followed by your question. When the task is complete, reply "
    "with a concise final answer in plain text.")


class ChatPlanner:
    """Planner backed by a chat-completion endpoint with tool declarations."""

    name = "remote"

    def __init__(self, client: ChatClient):
        self.client = client

    def _messages(self, prompt: str, history: list[AgentTurn]) -> list[dict]:
        messages: list[dict] = [
            {"role": "system", "content": _SYSTEM_PROMPT},
            {"role": "user", "content": prompt},
        ]
        pending_thought: Optional[str] = None
        call_idx = 0
        current_call: Optional[dict] = None
        for turn in history:
            if turn.kind == "thought":
                pending_thought = turn.content
            elif turn.kind == "action_input":
                call_idx += 1
                payload = turn.payload or {}
                call_id = f"call_{call_idx}"
                arguments = payload.get("arguments")
                raw = json.dumps(arguments) if isinstance(arguments, dict) \
                    else str(payload.get("raw", turn.content))
                messages.append({
                    "role": "assistant",
                    "content": pending_thought,
                    "tool_calls": [{
                        "id": call_id,
                        "type": "function",
                        "function": {"name": payload.get("tool", ""),
                                     "arguments": raw},
                    }],
                })
                pending_thought = None
                current_call = {"id": call_id}
            elif turn.kind == "observation" and current_call is not None:
                messages.append({"role": "tool",
                                 "tool_call_id": current_call["id"],
                                 "content": turn.content})
                current_call = None
        return messages

    def next_step(self, prompt: str, history: list[AgentTurn],
                  registry: ToolRegistry) -> PlannerStep:
        response = self.client.complete(self._messages(prompt, history),
                                        tools=registry.schemas())
        if response.kind == "tool_call":
            if response.parse_error:
                return PlannerStep(kind="act", thought=response.text,
                                   tool_name=response.tool_name,
                                   args=None, args_raw=response.tool_args_raw,
                                   args_error=response.parse_error)
            return PlannerStep(kind="act", thought=response.text,
                               tool_name=response.tool_name,
                               args=response.tool_args,
                               args_raw=response.tool_args_raw)
        text = (response.text or "").strip()
        if text.upper().startswith("CLARIFY:"):
            return PlannerStep(kind="clarify", text=text[len("CLARIFY:"):].strip())
        return PlannerStep(kind="final", text=text)


# ---------------------------------------------------------------------------
# episode loop

_ACTION_PHRASE = {
    "simulate_radio_environment":
        "Call simulate_radio_environment with the specified parameters.",
    "summarize_pathloss_image":
        "Call summarize_pathloss_image on the generated map.",
}


def _clip_observation(text: str) -> str:
    if len(text) <= OBSERVATION_CHAR_LIMIT:
        return text
    return text[:OBSERVATION_CHAR_LIMIT - 3] + "..."


def run_episode(registry: ToolRegistry, planner: Planner, prompt: str, *,
                max_iterations: int = MAX_ITERATIONS,
                tool_timeout: float = TOOL_TIMEOUT_S,
                on_turn: Optional[Callable[[AgentTurn], None]] = None,
                ) -> Transcript:
    """Drive the plan/act/observe loop until a terminal turn or the limit."""
    if len(registry) == 0:
        raise ValueError("no tools registered")
    transcript = Transcript(prompt=prompt, backend=getattr(
        planner, "name", type(planner).__name__))

    def emit(turn: AgentTurn):
        transcript.add(turn)
        if on_turn is not None:
            on_turn(turn)

    with ThreadPoolExecutor(max_workers=1) as pool:
        for _ in range(max_iterations):
            step = planner.next_step(prompt, transcript.turns, registry)
            if step.kind == "final":
                emit(AgentTurn("final_answer", step.text or ""))
                return transcript
            if step.kind == "clarify":
                emit(AgentTurn("clarification_request", step.text or ""))
                return transcript
            if step.kind != "act":
                raise ValueError(f"planner produced unknown step {step.kind!r}")

            if step.thought:
                emit(AgentTurn("thought", step.thought))
            name = step.tool_name or ""
            emit(AgentTurn("action", _ACTION_PHRASE.get(name, f"Call {name}."),
                           payload={"tool": name}))

            if step.args is None:
                raw = step.args_raw or ""
                emit(AgentTurn("action_input", raw,
                               payload={"tool": name, "raw": raw}))
                emit(AgentTurn("observation", _clip_observation(
                    "error: tool arguments were not valid JSON: "
                    f"{step.args_error or 'no arguments supplied'}")))
                continue

            clean, err = registry.validate_args(name, step.args)
            if err:
                emit(AgentTurn("action_input", format_action_input(step.args),
                               payload={"tool": name, "arguments": step.args}))
                emit(AgentTurn("observation",
                               _clip_observation(f"error: {err}")))
                continue

            emit(AgentTurn("action_input", format_action_input(clean),
                           payload={"tool": name, "arguments": clean}))
            spec = registry.get(name)
            future = pool.submit(spec.handler, clean)
            try:
                text, artifacts = future.result(timeout=tool_timeout)
                transcript.record_artifacts(artifacts)
                emit(AgentTurn("observation", _clip_observation(text),
                               payload={"tool": name, **artifacts}))
            except FutureTimeout:
                future.cancel()
                emit(AgentTurn("observation", _clip_observation(
                    f"error: tool {name!r} timed out after {tool_timeout:g} s")))
            except Exception as exc:
                emit(AgentTurn("observation",
                               _clip_observation(f"error: {exc}")))

        emit(AgentTurn("final_answer", (
            f"Stopping: reached the limit of {max_iterations} tool iterations "
            "without completing the task. See the observations above for any "
            "partial results.")))
    return transcript

"""Language backends.

Both backends share one contract: given an agent prompt and a piece of
user text, return a JSON string. ``rule_backend`` is a deterministic
grammar over the tables in :mod:`vocabulary`; ``RemoteBackend`` talks to
an OpenAI-compatible chat-completions endpoint.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from typing import Any, Callable, Mapping

import httpx

from . import vocabulary as vocab
from .types import (
    AgentKind,
    AuthError,
    Backend,
    MalformedResponse,
    NetworkError,
)

PROMPT_MARKER = "AGENT:"

ENV_BACKEND = "SCENETALK_BACKEND"
ENV_ENDPOINT = "SCENETALK_LLM_ENDPOINT"
ENV_API_KEY = "SCENETALK_LLM_API_KEY"
ENV_MODEL = "SCENETALK_LLM_MODEL"

_WORD_RE = re.compile(r"[a-z]+|\d+(?:\.\d+)?")
_CONNECTIVE_RE = re.compile(
    r"^(?:additionally|then|also|next|now|finally|please|and)[,\s]+",
    re.IGNORECASE)
_VERBS = vocab.SPLIT_VERBS | {"repaint"}
_PRONOUN_RE = re.compile(r"\b(?:that one|this one|it|them)\b")

# noun-phrase tails that end a reference or target descriptor
_PHRASE_STOPS = (" in ", " from ", " that ", " which ", " to ", " and ",
                 " driving", " moving", " going", " heading", " parked", ",")


def _normspace(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def _words(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def _strip_connectives(text: str) -> str:
    while True:
        m = _CONNECTIVE_RE.match(text)
        if m is None:
            return text
        text = text[m.end():]


def split_sentences(text: str) -> list[str]:
    # split only at end punctuation followed by whitespace, so decimals
    # like "0.5 meters" stay intact
    parts = re.split(r"(?<=[.!?;])\s+", text.strip())
    return [p.strip(" .!?;") for p in parts if p.strip(" .!?;")]


def split_clauses(sentence: str) -> list[str]:
    """Split a sentence before each conjunction that introduces a verb."""
    boundary = re.compile(r",?\s+and\s+|,\s+", re.IGNORECASE)
    parts: list[str] = []
    start = 0
    for m in boundary.finditer(sentence):
        nxt = re.match(r"[A-Za-z]+", sentence[m.end():].lstrip())
        if nxt is not None and nxt.group(0).lower() in vocab.SPLIT_VERBS:
            parts.append(sentence[start:m.start()])
            start = m.end()
    parts.append(sentence[start:])
    return [p.strip(" ,") for p in parts if p.strip(" ,")]


def _first_verb(low: str) -> str | None:
    for w in _words(low):
        if w in _VERBS:
            return w
    return None


def _modify_tag(low: str) -> str:
    """Recolor when a color word appears outside the reference phrase
    ("make the blue car red"); any other edit is a motion change."""
    ref = _reference_phrase(low)
    remainder = low if ref is None else low.replace(ref, " ", 1)
    if set(_words(remainder)) & set(vocab.COLOR_WORDS):
        return "asset_color"
    return "modify_motion"


def classify_clause(clause: str) -> str | None:
    """Map a clause to a handler tag, or None when nothing is recognized."""
    low = _normspace(clause.lower())
    words = set(_words(low))
    if any(cue in low for cue in vocab.TRAFFIC_JAM_CUES):
        return "jam"
    if words & vocab.DELETE_VERBS:
        return "delete"
    if "render" in words or "video" in words:
        return "render"
    if "view" in words or "camera" in words:
        return "view"
    if "ego" in words:
        return "ego"
    verb = _first_verb(low)
    if verb in {"add", "insert", "place", "put"}:
        return "add"
    if verb in vocab.PAINT_VERBS:
        return "asset_color"
    if verb in {"modify", "change", "adjust"}:
        return _modify_tag(low)
    if verb in {"create", "make", "let"}:
        # a resolvable vehicle descriptor (or pronoun) marks an edit to an
        # existing vehicle; otherwise the clause creates one
        if _reference_phrase(low) is not None:
            return _modify_tag(low)
        return "add"
    if verb == "turn" and _reference_phrase(low) is not None:
        return "modify_motion"
    return None


def decompose_text(command: str) -> list[dict[str, str]]:
    """Break a raw command into per-agent instruction records."""
    out: list[dict[str, str]] = []
    for sentence in split_sentences(command):
        for clause in split_clauses(_strip_connectives(sentence)):
            clause = _strip_connectives(clause).strip()
            if not clause:
                continue
            tag = classify_clause(clause)
            if tag is None:
                continue
            if tag == "jam":
                n = vocab.TRAFFIC_JAM_COUNT
                for i in range(n):
                    out.append({
                        "agent": AgentKind.MOTION.value,
                        "text": vocab.TRAFFIC_JAM_TEXT.format(i=i + 1, n=n),
                    })
            elif tag == "render":
                out.append({"agent": AgentKind.BACKGROUND_RENDER.value,
                            "text": clause})
                out.append({"agent": AgentKind.FOREGROUND_RENDER.value,
                            "text": clause})
            else:
                agent = {
                    "delete": AgentKind.VEHICLE_DELETE,
                    "add": AgentKind.MOTION,
                    "modify_motion": AgentKind.MOTION,
                    "asset_color": AgentKind.ASSET_MANAGE,
                    "view": AgentKind.VIEW_ADJUST,
                    "ego": AgentKind.VIEW_ADJUST,
                }[tag]
                out.append({"agent": agent.value, "text": clause})
    if not out and command.strip():
        # unrecognized but non-empty: a no-op view adjustment
        out.append({"agent": AgentKind.VIEW_ADJUST.value,
                    "text": command.strip()})
    return out


def _trim_phrase(text: str) -> str:
    low = _normspace(text.lower())
    for stop in _PHRASE_STOPS:
        i = low.find(stop)
        if i >= 0:
            low = low[:i]
    return low.strip(" .")


def _reference_phrase(low: str) -> str | None:
    """First 'the ...' phrase whose words all describe a vehicle, else a
    bare pronoun, kept verbatim for the resolver."""
    keep = ({"added", "new"} | set(vocab.BRAND_WORDS)
            | set(vocab.TYPE_WORDS) | set(vocab.COLOR_WORDS))
    for m in re.finditer(r"\b(?:the|that|this)\s+", low):
        toks: list[str] = []
        for w in low[m.end():].split():
            w = w.strip(" .,()")
            if w not in keep:
                break
            toks.append(w)
            if w in vocab.TYPE_WORDS or w in vocab.BRAND_WORDS:
                # the head noun closes the descriptor; in "paint the red
                # car green" the trailing color is not part of it
                break
        if toks:
            return low[m.start():m.end()] + " ".join(toks)
    m = _PRONOUN_RE.search(low)
    if m is not None:
        return m.group(0)
    return None


def _blank(low: str, start: int, end: int) -> str:
    return low[:start] + " " * (end - start) + low[end:]


_ANCHORED = (
    (re.compile(r"\bbehind\s+((?:the|that|this)\s[a-z ]+)"), "Back"),
    (re.compile(r"\bin front of\s+((?:the|that|this)\s[a-z ]+)"), "Front"),
    (re.compile(
        r"\bto the (left front|right front|left|right|front|back)"
        r"\s+of\s+((?:the|that|this)\s[a-z ]+)"), None),
)
_PLAIN_SECTOR = re.compile(
    r"\b(?:to|at|on|in)\s+(?:the|my|our)\s+(close\s+|far\s+)?"
    r"(left front|right front|front|left|right|back)\b")
_BARE_SECTOR = (
    (re.compile(r"\bbehind\b"), "Back"),
    (re.compile(r"\bin front(?:\s+of\s+(?:me|us))?\b"), "Front"),
    (re.compile(r"\bahead\b"), "Front"),
)
_DISTANCE = re.compile(
    r"(\d+(?:\.\d+)?)\s*(?:meters?|m)\s+(?:ahead|away|in front)")


def _parse_placement(low: str) -> tuple[dict[str, Any], str]:
    sector: str | None = None
    rng: list[float] | None = None
    anchor: str | None = None

    for pattern, fixed in _ANCHORED:
        m = pattern.search(low)
        if m is None:
            continue
        group = 1 if fixed is not None else 2
        anchor = _trim_phrase(m.group(group))
        sector = fixed if fixed is not None \
            else vocab.SECTOR_WORDS[m.group(1)]
        low = _blank(low, m.start(), m.start(group) + len(anchor))
        break

    if sector is None:
        m = _PLAIN_SECTOR.search(low)
        if m is not None:
            sector = vocab.SECTOR_WORDS[m.group(2)]
            if m.group(1) is not None:
                rng = list(vocab.CLOSE_RANGE if "close" in m.group(1)
                           else vocab.FAR_RANGE)
            low = _blank(low, m.start(), m.end())

    m = _DISTANCE.search(low)
    if m is not None:
        d = float(m.group(1))
        half = vocab.DISTANCE_HALF_WIDTH
        rng = [max(0.0, d - half), d + half]
        if sector is None:
            sector = "Front"
        low = _blank(low, m.start(), m.end())

    if sector is None:
        # ego-relative words with no explicit anchor: "behind me", "ahead"
        for pattern, name in _BARE_SECTOR:
            m = pattern.search(low)
            if m is not None:
                sector = name
                low = _blank(low, m.start(), m.end())
                break

    direction = "Away"
    if any(cue in low for cue in vocab.TOWARD_CUES):
        direction = "Toward"
    elif any(w in vocab.AWAY_CUES for w in _words(low)):
        direction = "Away"
    placement = {
        "sector": sector or "Front",
        "distance_range": rng,
        "driving_direction": direction,
        "crazy_mode": any(cue in low for cue in vocab.CRAZY_CUES),
        "anchor": anchor,
    }
    return placement, low


def _parse_movement(low: str) -> dict[str, Any]:
    action = "Straight"
    for cue, name in vocab.ACTION_CUES:
        if cue in low:
            action = name
            break
    if action == "Straight":
        # non-adjacent turn phrasing: "turn the added car left"
        ws = set(_words(low))
        if ws & {"turn", "turns", "turning"}:
            if "left" in ws:
                action = "TurnLeft"
            elif "right" in ws:
                action = "TurnRight"
    speed = None
    for w in _words(low):
        if w in vocab.SPEED_WORDS:
            speed = vocab.SPEED_WORDS[w]
            break
    if speed is None:
        speed = 0.0 if action == "Park" else vocab.DEFAULT_SPEED
    duration = vocab.DEFAULT_DURATION
    m = re.search(r"for\s+(\d+(?:\.\d+)?)\s+seconds?", low)
    if m is not None:
        duration = float(m.group(1))
    return {"speed": speed, "action": action, "duration": duration,
            "sample_rate": vocab.DEFAULT_SAMPLE_RATE}


def _parse_asset(low: str) -> dict[str, Any]:
    asset: dict[str, Any] = {}
    words = _words(low)
    for w in words:
        if w in vocab.BRAND_WORDS:
            asset["brand"] = vocab.BRAND_WORDS[w]
            break
    if "police" in words:
        asset["type"] = "police"
    else:
        for w in words:
            if w in vocab.TYPE_WORDS:
                asset["type"] = vocab.TYPE_WORDS[w]
                break
    for w in words:
        if w in vocab.COLOR_WORDS:
            asset["color"] = list(vocab.COLOR_WORDS[w])
            break
    return asset


def parse_motion(text: str) -> dict[str, Any]:
    low = _normspace(text.lower())
    wordset = set(_words(low))
    ref = _reference_phrase(low)
    is_modify = (ref is not None
                 and bool(wordset & {"modify", "change", "adjust", "make",
                                     "turn", "let"})
                 and not wordset & {"add", "insert", "put", "place"})
    if is_modify:
        return {"mode": "modify", "target": {"reference": ref},
                "movement": _parse_movement(low)}

    placement, blanked = _parse_placement(low)
    count = 1
    m = re.search(r"\b(?:add|insert|place|put|create|make)\s+(\S+)", blanked)
    if m is not None:
        tok = m.group(1).strip(" .,()")
        if tok.isdigit():
            count = int(tok)
        elif tok in vocab.NUMBER_WORDS:
            count = vocab.NUMBER_WORDS[tok]
    return {
        "mode": "add",
        "count": count,
        "asset": _parse_asset(blanked),
        "placement": placement,
        "movement": _parse_movement(blanked),
    }


def parse_view(text: str) -> dict[str, Any]:
    low = _normspace(text.lower())
    position = [0.0, 0.0, 0.0]
    angles = [0.0, 0.0, 0.0]
    if "ego" in _words(low):
        speed = vocab.DEFAULT_SPEED
        for w in _words(low):
            if w in vocab.SPEED_WORDS:
                speed = vocab.SPEED_WORDS[w]
                break
        direction = (1.0, 0.0, 0.0)
        for w in _words(low):
            if w in vocab.VIEW_DIRECTIONS:
                direction = vocab.VIEW_DIRECTIONS[w]
                break
        step = speed * vocab.EGO_MOTION_SECONDS
        return {"delta_position": [c * step for c in direction],
                "delta_angles": angles}

    for m in re.finditer(
            r"(\d+(?:\.\d+)?)\s*(?:meters?|m)\b\s*(?:to the\s+)?([a-z]+)",
            low):
        word = m.group(2)
        if word in vocab.VIEW_DIRECTIONS:
            d = vocab.VIEW_DIRECTIONS[word]
            scale = float(m.group(1))
            for i in range(3):
                position[i] += d[i] * scale
    for m in re.finditer(
            r"(\d+(?:\.\d+)?)\s*degrees?\s+(?:to the\s+)?([a-z]+)", low):
        word = m.group(2)
        if word in vocab.VIEW_ROTATIONS:
            axis, sign = vocab.VIEW_ROTATIONS[word]
            angles[axis] += sign * float(m.group(1))
    return {"delta_position": position, "delta_angles": angles}


def parse_delete(text: str) -> dict[str, Any]:
    low = _normspace(text.lower())
    m = re.search(r"(?:remove|delete|clear)\s+(.*)$", low)
    rest = _trim_phrase(m.group(1)) if m is not None else ""
    words = rest.split()
    if "all" in words or "every" in words or "everything" in words:
        return {"target": {"all": True}}
    if "added" in words or {"it", "them", "that", "this"} & set(words):
        return {"target": {"reference": rest}}
    target: dict[str, Any] = {}
    for w in words:
        if w in vocab.BRAND_WORDS:
            target["brand"] = vocab.BRAND_WORDS[w]
        elif w in vocab.COLOR_WORDS:
            target["color"] = list(vocab.COLOR_WORDS[w])
        elif w in vocab.TYPE_WORDS and "type" not in target:
            target["type"] = vocab.TYPE_WORDS[w]
    if "police" in words:
        target["type"] = "police"
    return {"target": target}


def parse_asset_color(text: str) -> dict[str, Any]:
    low = _normspace(text.lower())
    color = None
    # the requested color is the last color word in the clause
    for w in _words(low):
        if w in vocab.COLOR_WORDS:
            color = list(vocab.COLOR_WORDS[w])
    ref = _reference_phrase(low)
    target = {"reference": ref} if ref is not None else {}
    entries: dict[str, Any] = {"target": target}
    if color is not None:
        entries["color"] = color
    return entries


def parse_render(text: str) -> dict[str, Any]:
    m = re.search(r"frames?\s+(\d+)\s*(?:to|through|-)\s*(\d+)",
                  text.lower())
    if m is not None:
        return {"frames": [int(m.group(1)), int(m.group(2))]}
    return {"frames": None}


_PARSERS: dict[AgentKind, Callable[[str], dict[str, Any]]] = {
    AgentKind.VIEW_ADJUST: parse_view,
    AgentKind.VEHICLE_DELETE: parse_delete,
    AgentKind.ASSET_MANAGE: parse_asset_color,
    AgentKind.MOTION: parse_motion,
    AgentKind.BACKGROUND_RENDER: parse_render,
    AgentKind.FOREGROUND_RENDER: parse_render,
}


def agent_from_prompt(prompt: str) -> AgentKind:
    first = prompt.strip().splitlines()[0] if prompt.strip() else ""
    if not first.startswith(PROMPT_MARKER):
        raise ValueError("prompt must start with an 'AGENT: <kind>' line")
    return AgentKind(first[len(PROMPT_MARKER):].strip())


def rule_backend(prompt: str, command: str) -> str:
    """Deterministic grammar backend; always returns valid JSON."""
    agent = agent_from_prompt(prompt)
    if agent is AgentKind.PROJECT_MANAGER:
        return json.dumps({"instructions": decompose_text(command)})
    return json.dumps(_PARSERS[agent](command))


@dataclass
class RemoteBackend:
    """Client for an OpenAI-compatible chat-completions endpoint.

    ``endpoint`` is the full completions URL. One retry is permitted when
    the response is not usable JSON; the second failure raises
    MalformedResponse. A custom ``transport`` lets tests run against
    ``httpx.MockTransport`` without a network.
    """

    endpoint: str
    api_key: str = ""
    model: str = "default"
    timeout: float = 30.0
    transport: httpx.BaseTransport | None = None

    def __call__(self, prompt: str, command: str) -> str:
        last: Exception | None = None
        for _ in range(2):
            try:
                return self._attempt(prompt, command)
            except MalformedResponse as exc:
                last = exc
        raise MalformedResponse(
            f"unusable response after 2 attempts: {last}")

    def _attempt(self, prompt: str, command: str) -> str:
        body = {
            "model": self.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": prompt},
                {"role": "user", "content": command},
            ],
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            with httpx.Client(transport=self.transport,
                              timeout=self.timeout) as client:
                resp = client.post(self.endpoint, json=body,
                                   headers=headers)
        except httpx.HTTPError as exc:
            raise NetworkError(str(exc)) from exc
        if resp.status_code in (401, 403):
            raise AuthError(
                f"endpoint rejected credentials ({resp.status_code})")
        if resp.status_code >= 400:
            raise NetworkError(f"endpoint returned {resp.status_code}")
        try:
            payload = resp.json()
            content = payload["choices"][0]["message"]["content"]
            json.loads(content)
        except (ValueError, LookupError, TypeError) as exc:
            raise MalformedResponse(str(exc)) from exc
        return content


def backend_from_env(env: Mapping[str, str] | None = None) -> Backend:
    """Build a backend from environment variables (default: rule)."""
    env = os.environ if env is None else env
    kind = env.get(ENV_BACKEND, "rule").strip().lower()
    if kind == "rule":
        return rule_backend
    if kind == "remote":
        endpoint = env.get(ENV_ENDPOINT, "").strip()
        if not endpoint:
            raise ValueError(
                f"{ENV_ENDPOINT} must be set for the remote backend")
        return RemoteBackend(endpoint=endpoint,
                             api_key=env.get(ENV_API_KEY, ""),
                             model=env.get(ENV_MODEL, "default"))
    raise ValueError(f"unknown backend {kind!r}")

"""Shared types for the agent layer: kinds, instructions, configs, errors."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable


class AgentKind(Enum):
    PROJECT_MANAGER = "ProjectManager"
    VIEW_ADJUST = "ViewAdjust"
    VEHICLE_DELETE = "VehicleDelete"
    ASSET_MANAGE = "AssetManage"
    MOTION = "Motion"
    BACKGROUND_RENDER = "BackgroundRender"
    FOREGROUND_RENDER = "ForegroundRender"


# A language backend maps (agent prompt, user text) to a JSON string.
Backend = Callable[[str, str], str]


class BackendError(RuntimeError):
    """The language backend failed to produce a usable response."""


class MalformedResponse(BackendError):
    """Backend output stayed unparsable after the permitted retry."""


class AuthError(BackendError):
    """The remote endpoint rejected the API key."""


class NetworkError(BackendError):
    """The remote endpoint was unreachable or returned a server error."""


class EmptyDecomposition(ValueError):
    """The command contained no actionable instruction."""


class SchemaViolation(ValueError):
    """A structured config did not match its agent's schema."""


class UnresolvedReference(LookupError):
    """A descriptor such as 'the added car' matched no vehicle."""


@dataclass(frozen=True)
class Instruction:
    """One unit of work for a single agent, in natural language."""

    agent: AgentKind
    text: str
    round: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {"agent": self.agent.value, "text": self.text,
                "round": self.round}


@dataclass(frozen=True)
class StructuredConfig:
    """Validated, defaults-filled JSON config for one instruction."""

    agent: AgentKind
    entries: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"agent": self.agent.value, "entries": self.entries}

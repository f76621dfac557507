"""Language-driven scene editing: backends, schemas, and orchestration."""

from .backends import (
    ENV_API_KEY,
    ENV_BACKEND,
    ENV_ENDPOINT,
    ENV_MODEL,
    RemoteBackend,
    backend_from_env,
    rule_backend,
)
from .orchestrator import (
    RenderJob,
    RoundResult,
    decompose,
    execute_round,
    parse_to_config,
    prompt_for,
    scene_horizon,
)
from .schemas import DEFAULTS, SCHEMAS, validate_config
from .types import (
    AgentKind,
    AuthError,
    Backend,
    BackendError,
    EmptyDecomposition,
    Instruction,
    MalformedResponse,
    NetworkError,
    SchemaViolation,
    StructuredConfig,
    UnresolvedReference,
)

__all__ = [
    "AgentKind", "AuthError", "Backend", "BackendError", "DEFAULTS",
    "EmptyDecomposition", "ENV_API_KEY", "ENV_BACKEND", "ENV_ENDPOINT",
    "ENV_MODEL", "Instruction", "MalformedResponse", "NetworkError",
    "RemoteBackend", "RenderJob", "RoundResult", "SCHEMAS",
    "SchemaViolation", "StructuredConfig", "UnresolvedReference",
    "backend_from_env", "decompose", "execute_round", "parse_to_config",
    "prompt_for", "rule_backend", "scene_horizon", "validate_config",
]

"""Global tolerances and resource caps.

One frozen :class:`Settings` record is active at a time.  Library functions
read it through :func:`get_settings`; tests and the CLI swap it with
:func:`override`.
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
import hashlib
import json
from dataclasses import dataclass


@dataclass(frozen=True)
class Settings:
    # tolerances
    validation_tol: float = 1e-9
    identity_tol: float = 1e-8
    normalization_tol: float = 1e-12
    # resource caps
    max_dim: int = 4096
    max_alphabet: int = 8
    max_support: int = 65536
    max_search: int = 200_000
    max_family_candidates: int = 5000
    # optimizer / random coding
    grid_steps: int = 16
    max_grid_points: int = 20000
    ascent_tol: float = 1e-9
    ascent_max_iter: int = 500
    retry_budget: int = 16
    threads: int = 1

    def replace(self, **changes) -> "Settings":
        unknown = set(changes) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown settings: {sorted(unknown)}")
        coerced = {}
        for f in dataclasses.fields(self):
            if f.name in changes:
                coerced[f.name] = type(getattr(self, f.name))(changes[f.name])
        return dataclasses.replace(self, **coerced)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """sha256 over the canonical JSON of all fields."""
        text = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


DEFAULT = Settings()
_current: contextvars.ContextVar[Settings] = contextvars.ContextVar("qidlab_settings", default=DEFAULT)


def get_settings() -> Settings:
    return _current.get()


@contextlib.contextmanager
def override(settings: Settings | None = None, **changes):
    """Temporarily activate ``settings`` (or the current one with ``changes``)."""
    base = settings if settings is not None else get_settings()
    token = _current.set(base.replace(**changes) if changes else base)
    try:
        yield _current.get()
    finally:
        _current.reset(token)

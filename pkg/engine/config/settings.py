# engine/config/settings.py

from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from functools import lru_cache
from typing import Any, Iterator

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Numerical knobs loaded from the environment (and `.env` if present).

    Env prefix: FZ_
      FZ_ENV, FZ_LOG_LEVEL, FZ_LOG_JSON
      FZ_SEED, FZ_THREADS
      any tolerance below, e.g. FZ_POLE_TOL=1e-12
    """

    model_config = SettingsConfigDict(
        env_prefix="FZ_",
        env_file=".env",
        extra="ignore",
    )

    # Core env
    env: str = "dev"
    log_level: str = "INFO"
    log_json: bool = True

    # Poles and residues
    pole_tol: float = 1e-13
    cancel_tol: float = 1e-9
    dedupe_tol: float = 1e-9
    zero_residual_tol: float = 1e-10
    contour_radius: float = 1e-3
    contour_nodes: int = 512
    audit_nodes: int = 4096
    newton_tol: float = 1e-12
    newton_max_iter: int = 60
    seed_spacing: float = 0.25
    residue_agreement_tol: float = 1e-8

    # Integer relations
    qmax: int = 10_000
    relation_tol: float = 1e-12
    relation_dps: int = 50

    # Strings
    coalesce_rtol: float = 1e-15
    string_rel_tol: float = 1e-12
    power_law_max_terms: int = 5_000_000

    # Cantor sets
    depth_cap: int = 10_000_000
    closed_form_check_tol: float = 1e-9

    # Numeric RFDs
    mc_samples_2d: int = 1_000_000
    mc_samples_3d: int = 4_000_000
    mc_strata: int = 64
    seed: int = 0
    threads: int = 1
    quad_epsabs: float = 1e-12
    quad_epsrel: float = 1e-10
    quad_limit: int = 200

    # Sprays
    generator_rtol: float = 1e-6
    entire_tol: float = 1e-10
    entire_interp_tol: float = 1e-12

    @classmethod
    def from_env(cls) -> "Settings":
        settings = cls()
        settings.log_level = settings.log_level.strip().upper()
        return settings


_active: ContextVar[Settings | None] = ContextVar("fz_settings", default=None)


@lru_cache
def _cached() -> Settings:
    return Settings.from_env()


def get_settings() -> Settings:
    """
    Active settings: an override installed by `override_settings`, else the
    cached environment-derived instance.
    """
    current = _active.get()
    return current if current is not None else _cached()


def reset_settings_cache() -> None:
    _cached.cache_clear()


@contextmanager
def override_settings(**updates: Any) -> Iterator[Settings]:
    """
    Run a block with a modified copy of the settings.

    The cached instance is never mutated; nested overrides stack.
    """
    patched = get_settings().model_copy(update=updates)
    token = _active.set(patched)
    try:
        yield patched
    finally:
        _active.reset(token)

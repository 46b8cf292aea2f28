"""Runtime configuration, resolved once from the environment."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

_TRUTHY = {"1", "true", "yes", "on"}


def _env_bool(name: str, default: bool = False) -> bool:
    raw = os.environ.get(name)
    if raw is None:
        return default
    return raw.strip().lower() in _TRUTHY


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return int(raw) if raw not in (None, "") else default


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    return float(raw) if raw not in (None, "") else default


@dataclass
class Settings:
    """All knobs in one place; every field has an env override."""

    port: int = 8080
    data_dir: Path = field(default_factory=lambda: Path("data"))
    rng_seed: int | None = None

    # llm gateway
    mock_llm: bool = False
    llm_base_url: str = "http://localhost:11434/v1"
    llm_api_key: str = ""
    llm_model: str = "gpt-4o"
    llm_timeout_secs: float = 60.0
    temperature: float = 0.2
    max_output_tokens: int = 512

    # ingest
    chunk_size: int = 1000
    chunk_overlap: int = 200
    max_upload_bytes: int = 50 * 1024 * 1024

    # orchestrator
    retrieval_k: int = 5
    surfaced_references: int = 3
    prompt_token_budget: int = 6000
    history_window: int = 10
    locate_tau: float = 0.5
    ref_summary: str = "extractive"  # or "llm"

    @classmethod
    def from_env(cls) -> "Settings":
        seed_raw = os.environ.get("RNG_SEED")
        return cls(
            port=_env_int("PORT", 8080),
            data_dir=Path(os.environ.get("DATA_DIR", "data")),
            rng_seed=int(seed_raw) if seed_raw not in (None, "") else None,
            mock_llm=_env_bool("MOCK_LLM"),
            llm_base_url=os.environ.get("LLM_BASE_URL", "http://localhost:11434/v1"),
            llm_api_key=os.environ.get("LLM_API_KEY", ""),
            llm_model=os.environ.get("LLM_MODEL", "gpt-4o"),
            llm_timeout_secs=_env_float("LLM_TIMEOUT_SECS", 60.0),
            temperature=_env_float("LLM_TEMPERATURE", 0.2),
            max_output_tokens=_env_int("LLM_MAX_OUTPUT_TOKENS", 512),
            chunk_size=_env_int("CHUNK_SIZE", 1000),
            chunk_overlap=_env_int("CHUNK_OVERLAP", 200),
            max_upload_bytes=_env_int("MAX_UPLOAD_BYTES", 50 * 1024 * 1024),
            retrieval_k=_env_int("RETRIEVAL_K", 5),
            surfaced_references=_env_int("SURFACED_REFERENCES", 3),
            prompt_token_budget=_env_int("PROMPT_TOKEN_BUDGET", 6000),
            history_window=_env_int("HISTORY_WINDOW", 10),
            locate_tau=_env_float("LOCATE_TAU", 0.5),
            ref_summary=os.environ.get("REF_SUMMARY", "extractive"),
        )

"""
Configuration management for the Markov-Krein numerics library
"""

import json
import os
from typing import Optional, Dict, Any
from pathlib import Path
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from errors import InvalidArgument

class Config:
    """Configuration class for quadrature, sampling and output defaults"""

    def __init__(
        self,
        quad_tol: Optional[float] = None,
        max_evals: Optional[int] = None,
        tail_length: Optional[float] = None,
        line_delta: Optional[float] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        mc_samples: Optional[int] = None,
        reference_atoms: Optional[int] = None,
        output_dir: Optional[str] = None,
    ):
        # Load environment variables from .env file
        load_dotenv()

        # Quadrature configuration
        self.quad_tol = _positive(quad_tol, "MKREIN_QUAD_TOL", "1e-8", float)
        self.max_evals = _positive(max_evals, "MKREIN_MAX_EVALS", "2000000", int)
        self.tail_length = _positive(tail_length, "MKREIN_TAIL_LENGTH", "50", float)
        self.line_delta = _positive(line_delta, "MKREIN_LINE_DELTA", "1.0", float)
        self.initial_panels = 8

        # Sampling configuration
        self.seed = int(seed if seed is not None else os.getenv("MKREIN_SEED", "42"))
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidArgument(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        self.block_size = 8192
        self.mc_samples = _positive(mc_samples, "MKREIN_MC_SAMPLES", "20000", int)

        # MKREIN_THREADS wins over the command line
        env_threads = os.getenv("MKREIN_THREADS")
        if env_threads:
            self.threads = _positive(None, "MKREIN_THREADS", env_threads, int)
        else:
            self.threads = int(threads) if threads is not None else (os.cpu_count() or 1)
        if self.threads < 1:
            raise InvalidArgument(f"threads must be at least 1, got {self.threads}")

        # Limit experiment configuration
        self.reference_atoms = _positive(reference_atoms, "MKREIN_REFERENCE_ATOMS", "2000", int)
        self.reference_tol = 1e-9

        # Output configuration
        self.output_dir = Path(output_dir or os.getenv("OUTPUT_DIR", "output"))
        self.supported_formats = [".csv"]
        self.max_file_size_mb = int(os.getenv("MAX_FILE_SIZE_MB", "20"))

        # Logging configuration
        self.log_level = os.getenv("LOG_LEVEL", "INFO")
        self.log_file = os.getenv("LOG_FILE", "mkrein.log")

    def validate_file(self, file_path: str) -> bool:
        """Validate that a measure file exists, is CSV and is within size limits"""
        path = Path(file_path)

        if not path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")

        if path.suffix.lower() not in self.supported_formats:
            raise InvalidArgument(
                f"Unsupported file format: {path.suffix}. "
                f"Supported formats: {', '.join(self.supported_formats)}"
            )

        file_size_mb = path.stat().st_size / (1024 * 1024)
        if file_size_mb > self.max_file_size_mb:
            raise InvalidArgument(
                f"File too large: {file_size_mb:.1f}MB. "
                f"Maximum allowed: {self.max_file_size_mb}MB"
            )

        return True

    def ensure_output_dir(self) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir


def _positive(value, env_name: str, default: str, cast):
    raw = value if value is not None else os.getenv(env_name, default)
    try:
        parsed = cast(raw)
    except (TypeError, ValueError):
        raise InvalidArgument(f"{env_name} must be a number, got {raw!r}")
    if not parsed > 0:
        raise InvalidArgument(f"{env_name} must be positive, got {parsed}")
    return parsed


class RunConfig(BaseModel):
    """Fully resolved configuration of one CLI run, echoed into every output"""
    model_config = ConfigDict(frozen=True)

    subcommand: str
    options: Dict[str, Any] = Field(default_factory=dict)
    quad_tol: float = 1e-8
    max_evals: int = 2_000_000
    seed: int = 42
    threads: int = 1
    output: Optional[str] = None
    log_level: str = "INFO"

    @classmethod
    def from_args(cls, subcommand: str, options: Dict[str, Any], config: Config, output: Optional[str], log_level: str) -> "RunConfig":
        return cls(
            subcommand=subcommand,
            options={k: _jsonable(v) for k, v in options.items()},
            quad_tol=config.quad_tol,
            max_evals=config.max_evals,
            seed=config.seed,
            threads=config.threads,
            output=output,
            log_level=log_level.upper(),
        )

    def to_json(self) -> str:
        """Stable single-line JSON: sorted keys, no timestamps"""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def header_line(self) -> str:
        return f"# config: {self.to_json()}"


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value

"""
Configuration module for hutxosim.

Runtime settings (observability, validator defaults, benchmark constants) are
pydantic-settings classes read from the environment and an optional ``.env``
file; ``ExperimentConfig`` describes one benchmark run and is built by the
CLI from its flags.
"""

import os
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings

Benchmark = Literal["crowdfund", "map", "multisig", "registry"]
Mode = Literal["centralized", "distributed"]


class LogfireConfig(BaseSettings):
    """
    Logfire observability configuration.

    Enables Logfire tracing of validation runs, benchmark repetitions and
    contract compilation.
    """

    model_config = {
        "env_prefix": "LOGFIRE_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore",
    }

    enabled: bool = Field(
        default=False,
        description="Enable Logfire observability and tracing",
    )

    token: str | None = Field(
        default=None,
        description="Logfire API token for cloud logging",
    )

    service_name: str = Field(
        default="hutxosim",
        description="Service name for Logfire identification",
    )

    environment: str = Field(
        default="development",
        description="Environment tag (development, ci, benchmark)",
    )

    send_to_logfire: bool = Field(
        default=True,
        description="Send logs to Logfire cloud (requires token)",
    )

    console_logging: bool = Field(
        default=True,
        description="Keep Rich console logging alongside Logfire",
    )

    log_level: str = Field(
        default="INFO",
        description="Minimum log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(f"Invalid log level: {v}. Valid levels: {', '.join(valid_levels)}")
        return v_upper

    @model_validator(mode="after")
    def validate_token_when_enabled(self):
        """Ensure token is provided when Logfire is enabled and sending to cloud."""
        if self.enabled and self.send_to_logfire and not self.token:
            raise ValueError(
                "LOGFIRE_TOKEN is required when LOGFIRE_ENABLED=true and LOGFIRE_SEND_TO_LOGFIRE=true"
            )
        return self


class ValidatorConfig(BaseSettings):
    """Defaults for the sequential and parallel validators."""

    model_config = {
        "env_prefix": "HUTXO_VALIDATOR_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore",
    }

    n_workers: int = Field(
        default=0,
        ge=0,
        le=256,
        description="Worker threads (0 selects the sequential validator)",
    )

    measure_bytes: bool = Field(
        default=True,
        description="Report final ledger byte size after each run (the digest is always computed)",
    )


class BenchConfig(BaseSettings):
    """Constants shared by the benchmark workload generators."""

    model_config = {
        "env_prefix": "HUTXO_BENCH_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore",
    }

    seed: int = Field(default=42, description="Default workload seed")
    repetitions: int = Field(default=1, ge=1, description="Default repetitions per run")
    results_dir: Path = Field(
        default=Path("results"),
        description="Directory for CSV reports when --out is a bare file name",
    )
    fee: int = Field(
        default=1,
        ge=1,
        description="Fee paid by every generated transaction, in native tokens",
    )
    withdraw_time: int = Field(
        default=100,
        ge=1,
        description="Crowdfund withdraw deadline (ledger time)",
    )
    refund_time: int = Field(
        default=200,
        ge=1,
        description="Crowdfund refund deadline; also the registry ownership deadline",
    )
    validity_window: int = Field(
        default=10,
        ge=1,
        description="Length of the validity interval given to time-bounded invocations",
    )

    @model_validator(mode="after")
    def validate_deadlines(self):
        if self.refund_time <= self.withdraw_time:
            raise ValueError(
                f"refund_time ({self.refund_time}) must be later than withdraw_time ({self.withdraw_time})"
            )
        if self.validity_window >= self.withdraw_time:
            raise ValueError("validity_window must be shorter than withdraw_time")
        return self


class HutxoConfig(BaseSettings):
    """
    Main configuration class for hutxosim.

    Environment Variables:
    - HUTXO_ENVIRONMENT: deployment environment tag
    - HUTXO_VALIDATOR_*: validator defaults (see ``ValidatorConfig``)
    - HUTXO_BENCH_*: benchmark constants (see ``BenchConfig``)
    - LOGFIRE_*: observability (see ``LogfireConfig``)
    """

    model_config = {
        "env_prefix": "HUTXO_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore",
    }

    environment: str = Field("development", description="Deployment environment")

    logfire: LogfireConfig = Field(
        default_factory=LogfireConfig,
        description="Logfire observability configuration",
    )
    validator: ValidatorConfig = Field(
        default_factory=ValidatorConfig,
        description="Validator defaults",
    )
    bench: BenchConfig = Field(
        default_factory=BenchConfig,
        description="Benchmark constants",
    )

    def validate_configuration(self) -> dict[str, Any]:
        """
        Validate the complete configuration and return validation summary.

        Returns a dictionary with validation results including any warnings or issues.
        """
        warnings: list[str] = []
        errors: list[str] = []

        results = {
            "valid": True,
            "environment": self.environment,
            "n_workers": self.validator.n_workers,
            "cpu_count": os.cpu_count() or 1,
            "logfire_enabled": self.logfire.enabled,
            "warnings": warnings,
            "errors": errors,
        }

        cpus = os.cpu_count() or 1
        if self.validator.n_workers > cpus:
            warnings.append(f"n_workers={self.validator.n_workers} exceeds the {cpus} available CPUs")
        if not self.validator.measure_bytes:
            warnings.append("Ledger byte measurement is disabled; CSV ledger_bytes will be 0")
        if self.bench.results_dir.exists() and not self.bench.results_dir.is_dir():
            errors.append(f"Results path {self.bench.results_dir} is not a directory")
            results["valid"] = False

        return results


class ExperimentConfig(BaseModel):
    """One benchmark experiment: which workload, how big, which validator."""

    benchmark: Benchmark
    mode: Mode = "distributed"
    users: int = Field(default=100, ge=1, description="Crowdfund donors / registry users")
    ops: int = Field(default=1000, ge=0, description="Map and multisig operations")
    p: float = Field(default=0.5, ge=0.0, le=1.0, description="Map conflict probability")
    n: int = Field(default=4, description="Multisig authorized users (even)")
    n_workers: list[int] = Field(default_factory=lambda: [0], description="Validator sweep")
    seed: int = 42
    repetitions: int = Field(default=1, ge=1)

    @field_validator("n")
    @classmethod
    def validate_signer_count(cls, v: int) -> int:
        if v < 2 or v % 2:
            raise ValueError(f"Multisig signer count must be even and at least 2, got {v}")
        return v

    @field_validator("n_workers")
    @classmethod
    def validate_workers(cls, v: list[int]) -> list[int]:
        if not v:
            raise ValueError("At least one validator must be selected")
        if any(w < 0 for w in v):
            raise ValueError(f"Worker counts cannot be negative: {v}")
        return v

    @model_validator(mode="after")
    def validate_mode(self):
        if self.mode == "centralized" and self.benchmark != "crowdfund":
            raise ValueError(f"Centralized mode is only available for crowdfund, not {self.benchmark}")
        return self

    @property
    def size(self) -> int:
        """The size parameter reported in CSV rows."""
        match self.benchmark:
            case "crowdfund" | "registry":
                return self.users
            case _:
                return self.ops


def load_config(env_file: str | None = None) -> HutxoConfig:
    """
    Load configuration from environment file.

    Args:
        env_file: Optional path to .env file. Defaults to .env in current directory.

    Returns:
        Configured HutxoConfig instance.

    Raises:
        ValidationError: If configuration is invalid.
        FileNotFoundError: If specified env file doesn't exist.
    """
    if env_file:
        env_path = Path(env_file)
        if not env_path.exists():
            raise FileNotFoundError(f"Environment file not found: {env_file}")

        from dotenv import load_dotenv

        load_dotenv(env_path)

    return HutxoConfig()

"""
Centralized configuration management for the eliminax engine.

This module handles configuration values and environment variables for
the elimination engine, the order-independence trials, the symbolic
replays and the HTTP service, and provides type-safe access to them.
"""

import logging
from typing import List, Optional, Dict, Any
from pathlib import Path
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings
from enum import Enum

logger = logging.getLogger(__name__)


class LogLevel(str, Enum):
    """Logging levels enum"""
    CRITICAL = "CRITICAL"
    ERROR = "ERROR"
    WARNING = "WARNING"
    INFO = "INFO"
    DEBUG = "DEBUG"


class OutputFormat(str, Enum):
    """CLI output formats"""
    TEXT = "text"
    JSONL = "jsonl"


class ServerConfig(BaseSettings):
    """HTTP server configuration settings"""

    host: str = Field(default="0.0.0.0", description="Server host address")
    port: int = Field(default=8000, ge=1, le=65535, description="Server port")
    debug: bool = Field(default=False, description="Debug mode")
    log_level: LogLevel = Field(default=LogLevel.INFO, description="Logging level")

    api_title: str = Field(default="Eliminax", description="API title")
    api_version: str = Field(default="1.0.0", description="API version")
    docs_url: str = Field(default="/docs", description="API documentation URL")
    redoc_url: str = Field(default="/redoc", description="ReDoc documentation URL")

    class Config:
        env_prefix = ""
        case_sensitive = False


class EngineConfig(BaseSettings):
    """Iteration engine configuration"""

    cap: str = Field(default="w*2", description="Ordinal cap for iteration (e.g. 12, w, w+1, w*2)")
    max_finite_stages: int = Field(
        default=10000, ge=1, le=10_000_000,
        description="Finite stages computed before an unstabilised iteration reports CapReached",
    )
    log_level: LogLevel = Field(default=LogLevel.WARNING, description="CLI logging level")
    output_format: OutputFormat = Field(default=OutputFormat.TEXT, description="CLI output format")

    @field_validator("cap")
    @classmethod
    def cap_is_ordinal(cls, v: str) -> str:
        """Reject caps that are not ordinals below w*w"""
        from .services.lattice_service import parse_ordinal
        parse_ordinal(v)
        return v.strip()

    class Config:
        env_prefix = "ELIMINAX_"
        case_sensitive = False


class TrialConfig(BaseSettings):
    """Order-independence trial configuration"""

    trials: int = Field(default=20, ge=0, le=100_000, description="Default number of sampled relaxations")
    seed: Optional[int] = Field(default=None, ge=0, description="Default master seed for relaxation sampling")
    max_workers: int = Field(default=4, ge=1, le=64, description="Concurrent relaxation trials")

    class Config:
        env_prefix = "ELIMINAX_"
        case_sensitive = False


class ReplayConfig(BaseSettings):
    """Symbolic replay configuration"""

    check_finite_upto: int = Field(default=8, ge=2, le=10_000, description="Finite stages validated per replay")
    check_past_limit: int = Field(default=2, ge=0, le=1000, description="Stages validated past the first limit")

    class Config:
        env_prefix = "ELIMINAX_"
        case_sensitive = False


class EliminaxConfig:
    """Main configuration class that combines all configuration sections"""

    def __init__(self, env_file: Optional[str] = None):
        """Initialize configuration from environment variables and optional .env file"""
        self._load_environment(env_file)

        self.server = ServerConfig()
        self.engine = EngineConfig()
        self.trials = TrialConfig()
        self.replay = ReplayConfig()

        self._log_config_summary()

    def _load_environment(self, env_file: Optional[str] = None):
        """Load environment variables from .env file if available"""
        if env_file and Path(env_file).exists():
            from dotenv import load_dotenv
            load_dotenv(env_file)
            logger.info(f"Loaded environment from {env_file}")
        elif Path(".env").exists():
            from dotenv import load_dotenv
            load_dotenv()
            logger.info("Loaded environment from .env")

    def _log_config_summary(self):
        """Log configuration summary"""
        logger.info("Configuration loaded:")
        logger.info(f"  Engine: cap={self.engine.cap}, max_finite_stages={self.engine.max_finite_stages}")
        logger.info(f"  Trials: {self.trials.trials} (seed={self.trials.seed}, workers={self.trials.max_workers})")
        logger.info(f"  Replay: finite={self.replay.check_finite_upto}, past_limit={self.replay.check_past_limit}")

    def validate_configuration(self) -> List[str]:
        """Validate configuration and return list of warnings"""
        warnings = []

        from .services.lattice_service import parse_ordinal
        cap = parse_ordinal(self.engine.cap)
        if cap.omega == 0 and cap.finite < 2:
            warnings.append(f"Cap {self.engine.cap} stops before any fixpoint can be confirmed")
        if cap.omega > 2:
            warnings.append(f"Cap {self.engine.cap} exceeds w*2; finite games never need it")

        if self.trials.trials > 0 and self.trials.seed is None:
            warnings.append("ELIMINAX_SEED not set; order-independence trials need an explicit --seed")

        return warnings

    def to_dict(self) -> Dict[str, Any]:
        """Export configuration as dictionary"""
        return {
            'server': self.server.model_dump(mode="json"),
            'engine': self.engine.model_dump(mode="json"),
            'trials': self.trials.model_dump(mode="json"),
            'replay': self.replay.model_dump(mode="json"),
        }


# Global configuration instance
_config: Optional[EliminaxConfig] = None


def get_config(env_file: Optional[str] = None, reload: bool = False) -> EliminaxConfig:
    """
    Get the global configuration instance.

    Args:
        env_file: Optional path to .env file
        reload: Force reload of configuration

    Returns:
        EliminaxConfig instance
    """
    global _config

    if _config is None or reload:
        _config = EliminaxConfig(env_file)

        warnings = _config.validate_configuration()
        for warning in warnings:
            logger.warning(f"Configuration warning: {warning}")

    return _config


def reset_config():
    """Reset the global configuration (useful for testing)"""
    global _config
    _config = None

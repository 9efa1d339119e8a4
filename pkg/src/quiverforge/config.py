"""Configuration management for quiverforge."""

import logging
import os
from dataclasses import dataclass, replace
from typing import Any

import galois
from dotenv import load_dotenv

from quiverforge.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

# Load environment variables from a .env file if it exists
load_dotenv()

KPROXY_MODES = ("symbolic", "bigprime")


def _int_from_env(name: str, default: int, minimum: int, code: str) -> int:
    """
    Parse an integer environment variable with a lower bound.

    Args:
        name: Environment variable name.
        default: Value used when the variable is unset.
        minimum: Smallest accepted value.
        code: Error code stem; "_FORMAT" is appended for parse failures.

    Returns:
        The parsed value.

    Raises:
        ConfigurationError: If the value is not an integer or is below the minimum.
    """
    raw = os.getenv(name, str(default))
    try:
        value = int(raw)
    except ValueError as e:
        logger.error(f"Failed to parse {name} as int: {raw}")
        raise ConfigurationError(f"Failed to parse {name} as int: {raw}", f"{code}_FORMAT") from e
    if value < minimum:
        logger.error(f"{name} must be at least {minimum}, got: {value}")
        raise ConfigurationError(f"{name} must be at least {minimum}, got: {value}", code)
    return value


@dataclass
class ForgeConfig:
    """
    Bounds, K-proxy settings and sampling parameters shared by every operation.
    """

    seed: int = 0

    # Size bounds
    field_bound: int = 2**20
    trunc_basis_bound: int = 10**6
    span_bound: int = 4096
    pi_degree_bound: int = 6

    # K-proxy and sampling
    kproxy_mode: str = "symbolic"
    kproxy_prime: int = 32003
    trials: int = 8

    # Relation search; None derives t_max * (m - 1) from the algebra
    degree_bound: int | None = None

    # Sub-quiver embeddings must be unital when set
    unital_embedding: bool = False

    @property
    def probabilistic(self) -> bool:
        """Whether K-proxy results come from random sampling."""
        return self.kproxy_mode == "bigprime"

    def with_overrides(self, **changes: Any) -> "ForgeConfig":
        """
        Return a copy with the given fields replaced, validating the new values.

        Raises:
            ConfigurationError: If an override is out of range.
        """
        updated = replace(self, **{k: v for k, v in changes.items() if v is not None})
        updated.check()
        return updated

    def check(self) -> None:
        """
        Validate field ranges.

        Raises:
            ConfigurationError: On the first invalid field.
        """
        if self.kproxy_mode not in KPROXY_MODES:
            raise ConfigurationError(
                f"K-proxy mode must be one of {KPROXY_MODES}, got: {self.kproxy_mode}",
                "INVALID_KPROXY_MODE",
            )
        if not galois.is_prime(self.kproxy_prime):
            raise ConfigurationError(
                f"K-proxy prime must be prime, got: {self.kproxy_prime}", "INVALID_KPROXY_PRIME"
            )
        if self.trials < 1:
            raise ConfigurationError(
                f"Trials must be positive, got: {self.trials}", "INVALID_TRIALS"
            )
        if self.degree_bound is not None and self.degree_bound < 0:
            raise ConfigurationError(
                f"Degree bound must be non-negative, got: {self.degree_bound}",
                "INVALID_DEGREE_BOUND",
            )
        for name in ("field_bound", "trunc_basis_bound", "span_bound", "pi_degree_bound"):
            if getattr(self, name) < 1:
                raise ConfigurationError(
                    f"{name} must be positive, got: {getattr(self, name)}", "INVALID_BOUND"
                )

    @classmethod
    def from_env(cls) -> "ForgeConfig":
        """
        Creates a ForgeConfig instance by loading values from environment variables.
        Falls back to default values if environment variables are not set.

        Returns:
            An instance of ForgeConfig.

        Raises:
            ConfigurationError: If any environment variable has an invalid value.
        """
        logger.info("Loading configuration from environment variables")

        seed = _int_from_env("QUIVERFORGE_SEED", 0, 0, "INVALID_SEED")
        logger.info(f"Using seed: {seed}")

        field_bound = _int_from_env("QUIVERFORGE_FIELD_BOUND", 2**20, 2, "INVALID_FIELD_BOUND")
        logger.info(f"Using field size bound: {field_bound}")

        trunc_basis_bound = _int_from_env(
            "QUIVERFORGE_BASIS_BOUND", 10**6, 1, "INVALID_BASIS_BOUND"
        )
        logger.info(f"Using truncated-ring basis bound: {trunc_basis_bound}")

        span_bound = _int_from_env("QUIVERFORGE_SPAN_BOUND", 4096, 1, "INVALID_SPAN_BOUND")
        logger.info(f"Using span-closure basis bound: {span_bound}")

        pi_degree_bound = _int_from_env("QUIVERFORGE_PI_DEGREE", 6, 1, "INVALID_PI_DEGREE")
        logger.info(f"Using identity degree bound: {pi_degree_bound}")

        trials = _int_from_env("QUIVERFORGE_TRIALS", 8, 1, "INVALID_TRIALS")
        logger.info(f"Using sampling trials: {trials}")

        kproxy_mode = os.getenv("QUIVERFORGE_KPROXY", "symbolic").strip().lower()
        if kproxy_mode not in KPROXY_MODES:
            logger.error(f"QUIVERFORGE_KPROXY must be one of {KPROXY_MODES}, got: {kproxy_mode}")
            raise ConfigurationError(
                f"QUIVERFORGE_KPROXY must be one of {KPROXY_MODES}, got: {kproxy_mode}",
                "INVALID_KPROXY_MODE",
            )
        logger.info(f"Using K-proxy mode: {kproxy_mode}")

        kproxy_prime = _int_from_env("QUIVERFORGE_KPROXY_PRIME", 32003, 2, "INVALID_KPROXY_PRIME")
        if not galois.is_prime(kproxy_prime):
            logger.error(f"QUIVERFORGE_KPROXY_PRIME must be prime, got: {kproxy_prime}")
            raise ConfigurationError(
                f"QUIVERFORGE_KPROXY_PRIME must be prime, got: {kproxy_prime}",
                "INVALID_KPROXY_PRIME",
            )
        logger.info(f"Using K-proxy prime: {kproxy_prime}")

        degree_bound: int | None = None
        if os.getenv("QUIVERFORGE_DEGREE_BOUND"):
            degree_bound = _int_from_env("QUIVERFORGE_DEGREE_BOUND", 0, 0, "INVALID_DEGREE_BOUND")
            logger.info(f"Using relation degree bound: {degree_bound}")

        unital_raw = os.getenv("QUIVERFORGE_UNITAL_EMBEDDING", "false").strip().lower()
        if unital_raw not in ("true", "false", "1", "0", "yes", "no"):
            logger.error(f"QUIVERFORGE_UNITAL_EMBEDDING must be a boolean, got: {unital_raw}")
            raise ConfigurationError(
                f"QUIVERFORGE_UNITAL_EMBEDDING must be a boolean, got: {unital_raw}",
                "INVALID_UNITAL_EMBEDDING",
            )
        unital_embedding = unital_raw in ("true", "1", "yes")
        logger.info(f"Using unital embeddings: {unital_embedding}")

        config = cls(
            seed=seed,
            field_bound=field_bound,
            trunc_basis_bound=trunc_basis_bound,
            span_bound=span_bound,
            pi_degree_bound=pi_degree_bound,
            kproxy_mode=kproxy_mode,
            kproxy_prime=kproxy_prime,
            trials=trials,
            degree_bound=degree_bound,
            unital_embedding=unital_embedding,
        )
        logger.info("Configuration loaded successfully")
        return config

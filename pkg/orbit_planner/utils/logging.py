"""
Structured logging configuration for the orbit planner
"""

import logging
import sys
from typing import Any, Optional
import structlog
from structlog import get_logger

from ..config import settings


def configure_logging(level: Optional[str] = None):
    """
    Configure structured logging with appropriate settings

    Args:
        level: Override for the configured log level
    """
    level_name = (level or settings.log_level).upper()

    # Standard library logging (used by the HTTP client)
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level_name),
    )

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.dev.set_exc_info,
            structlog.processors.TimeStamper(fmt="ISO"),
            structlog.dev.ConsoleRenderer() if settings.is_development else structlog.processors.JSONRenderer(),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(getattr(logging, level_name)),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=settings.is_production,
    )


def get_run_logger(run_id: Optional[str] = None) -> Any:
    """
    Get logger with run context

    Args:
        run_id: Training run identifier

    Returns:
        Structured logger with run context
    """
    logger = get_logger()
    if run_id:
        logger = logger.bind(run_id=run_id)
    return logger


def bind_run_context(**context: Any) -> None:
    """Bind run-wide fields (run id, algorithm, seed) to every log line"""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(**context)


def clear_run_context() -> None:
    structlog.contextvars.clear_contextvars()


def log_http_call(
    logger: Any,
    method: str,
    url: str,
    status_code: int = None,
    duration: float = None,
    **kwargs
):
    """
    Log an HTTP call with structured data

    Args:
        logger: Structured logger instance
        method: HTTP method
        url: Requested URL
        status_code: HTTP status code
        duration: Request duration in seconds
        **kwargs: Additional context
    """
    log_data = {"method": method, "url": url, **kwargs}

    if status_code is not None:
        log_data["status_code"] = status_code

    if duration is not None:
        log_data["duration_ms"] = round(duration * 1000, 2)

    if status_code and status_code >= 400:
        logger.error("http_call_failed", **log_data)
    else:
        logger.info("http_call_completed", **log_data)


def log_rollout(
    logger: Any,
    timesteps: int,
    mean_ep_reward: float,
    policy_loss: float = None,
    value_loss: float = None,
    interventions: int = None,
    **kwargs
):
    """
    Log one training rollout with structured data

    Args:
        logger: Structured logger instance
        timesteps: Cumulative environment steps
        mean_ep_reward: Mean raw episodic reward over recent episodes
        policy_loss: Policy-gradient loss of the update
        value_loss: Value loss of the update
        interventions: Plateau interventions so far
        **kwargs: Additional context
    """
    log_data = {"timesteps": timesteps, "mean_ep_reward": round(float(mean_ep_reward), 6), **kwargs}

    if policy_loss is not None:
        log_data["policy_loss"] = round(float(policy_loss), 6)

    if value_loss is not None:
        log_data["value_loss"] = round(float(value_loss), 6)

    if interventions is not None:
        log_data["interventions"] = interventions

    logger.info("rollout_completed", **log_data)

"""
Retry policy for rebuilding transactions against stale contract state.

Building an invocation reads the contract's state-item index; when the
index lags behind the ledger, the builder raises ``StaleStateError`` and the
caller resynchronises and tries again. Tenacity drives the loop.
"""

import logging
from collections.abc import Callable
from typing import Any

from tenacity import (
    RetryCallState,
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
    wait_none,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATTEMPTS = 3


def create_stale_state_retry(
    retry_on: type[BaseException] | tuple[type[BaseException], ...],
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    on_retry: Callable[[RetryCallState], Any] | None = None,
) -> Retrying:
    """
    Create a retrying controller for stale-state rebuilds.

    There is no wait between attempts: staleness is cured by resynchronising,
    not by time passing.

    Args:
        retry_on: Exception type(s) that signal stale state.
        max_attempts: Maximum number of build attempts.
        on_retry: Extra hook run before each new attempt (after logging),
            typically the resynchronisation.

    Returns:
        Tenacity ``Retrying`` instance; the last exception is re-raised when
        attempts run out.
    """
    log_hook = before_sleep_log(logger, logging.WARNING)

    def before_sleep(retry_state: RetryCallState) -> None:
        log_hook(retry_state)
        if on_retry is not None:
            on_retry(retry_state)

    return Retrying(
        retry=retry_if_exception_type(retry_on),
        stop=stop_after_attempt(max_attempts),
        wait=wait_none(),
        before_sleep=before_sleep,
        reraise=True,
    )

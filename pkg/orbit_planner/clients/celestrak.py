"""
HTTP client for downloading TLE catalogs (Celestrak and compatible mirrors)
"""

import asyncio
import logging
import time
from typing import Optional

import httpx

from ..config import settings
from ..errors import CatalogTimeout, NetworkError, NonSuccessStatus

logger = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class CatalogClient:
    """
    Plain GET client for TLE text sources

    The response body is returned untouched; parsing belongs to
    astro.tle.load_catalog.
    """

    def __init__(
        self,
        timeout: Optional[float] = None,
        retries: Optional[int] = None,
        backoff: float = 1.0,
    ):
        self.timeout = settings.http_timeout if timeout is None else timeout
        self.retries = settings.http_retries if retries is None else retries
        self.backoff = backoff
        self.session = None

    async def __aenter__(self):
        """Async context manager entry"""
        self.session = httpx.AsyncClient(
            timeout=self.timeout,
            follow_redirects=True,
            limits=httpx.Limits(max_keepalive_connections=2, max_connections=4),
        )
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        """Async context manager exit"""
        if self.session:
            await self.session.aclose()

    async def fetch(self, url: str) -> bytes:
        """
        Download a catalog with retry logic

        Args:
            url: Catalog URL

        Returns:
            bytes: Raw response body

        Raises:
            NetworkError: Host unreachable or connection dropped
            CatalogTimeout: No response within the timeout
            NonSuccessStatus: Any non-2xx final status
        """
        if not self.session:
            raise ValueError("Client not initialized. Use async context manager.")

        for attempt in range(self.retries + 1):
            last_attempt = attempt == self.retries
            start = time.monotonic()
            try:
                logger.info(
                    "Catalog request",
                    extra={"url": url, "attempt": attempt + 1, "retries": self.retries + 1},
                )
                response = await self.session.get(url)
                logger.info(
                    "Catalog response",
                    extra={
                        "url": url,
                        "status_code": response.status_code,
                        "duration_ms": round((time.monotonic() - start) * 1000, 2),
                        "bytes": len(response.content),
                    },
                )

                if response.is_success:
                    return response.content

                if response.status_code in RETRYABLE_STATUS and not last_attempt:
                    logger.warning(f"Catalog returned {response.status_code}, retrying (attempt {attempt + 1})")
                    await asyncio.sleep(self.backoff * 2**attempt)
                    continue

                raise NonSuccessStatus(url, response.status_code)

            except httpx.TimeoutException as e:
                if last_attempt:
                    raise CatalogTimeout(f"Timed out fetching catalog: {e}", url) from e
                logger.warning(f"Catalog timeout (attempt {attempt + 1}/{self.retries + 1}): {e}")
                await asyncio.sleep(self.backoff * 2**attempt)

            except httpx.RequestError as e:
                if last_attempt:
                    raise NetworkError(f"Network error fetching catalog: {e}", url) from e
                logger.warning(f"Network error (attempt {attempt + 1}/{self.retries + 1}): {e}")
                await asyncio.sleep(self.backoff * 2**attempt)

        raise NetworkError("Max retries exceeded", url)


async def fetch_catalog_async(url: str, timeout: Optional[float] = None, retries: Optional[int] = None,
                              backoff: float = 1.0) -> bytes:
    async with CatalogClient(timeout=timeout, retries=retries, backoff=backoff) as client:
        return await client.fetch(url)


def fetch_catalog(url: str, timeout: Optional[float] = None, retries: Optional[int] = None,
                  backoff: float = 1.0) -> bytes:
    """Blocking wrapper around CatalogClient.fetch for command-line use"""
    return asyncio.run(fetch_catalog_async(url, timeout=timeout, retries=retries, backoff=backoff))

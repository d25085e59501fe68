"""
Catalog ingestion service: read a TLE source, validate it, write the clean catalog
"""

import time
from pathlib import Path
from typing import List, Optional, Tuple, Union

from ..astro.orbit import KeplerianElements
from ..astro.tle import CatalogLoadResult, format_tle, load_catalog, tle_to_elements
from ..clients.celestrak import CatalogClient
from ..config import settings
from ..errors import CatalogFetchError, DataError
from ..schemas.catalog import IngestSummary, RecordError
from ..utils.logging import get_run_logger, log_http_call

logger = get_run_logger()


def is_url(source: str) -> bool:
    return source.startswith(("http://", "https://"))


class CatalogIngestionService:
    """
    Reads TLE catalogs from local files or HTTP sources
    """

    def __init__(self, timeout: Optional[float] = None, retries: Optional[int] = None, backoff: float = 1.0):
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    async def read_source(self, source: Optional[str] = None) -> bytes:
        """
        Raw bytes of a catalog source

        Args:
            source: Local path or http(s) URL (defaults to the configured catalog URL)

        Raises:
            DataError: Missing file
            CatalogFetchError: Download failure
        """
        source = source or settings.catalog_url
        if is_url(source):
            start = time.monotonic()
            try:
                async with CatalogClient(timeout=self.timeout, retries=self.retries, backoff=self.backoff) as client:
                    body = await client.fetch(source)
            except CatalogFetchError as e:
                log_http_call(logger, "GET", source, status_code=e.status_code or 599,
                              duration=time.monotonic() - start, error=e.message)
                raise
            log_http_call(logger, "GET", source, status_code=200, duration=time.monotonic() - start, bytes=len(body))
            return body

        path = Path(source)
        if not path.is_file():
            raise DataError(f"catalog not found: {path}")
        return path.read_bytes()

    async def load(self, source: Optional[str] = None) -> CatalogLoadResult:
        return load_catalog(await self.read_source(source))

    async def ingest(self, source: Optional[str] = None, output: Optional[Union[str, Path]] = None) -> IngestSummary:
        """
        Parse a catalog and write every accepted record back out

        Args:
            source: Local path or URL
            output: Destination for the validated catalog (3-line groups)

        Returns:
            IngestSummary: Accepted/rejected counts with line-indexed errors
        """
        source = source or settings.catalog_url
        start_time = time.monotonic()
        logger.info("catalog_ingestion_started", source=source)

        result = await self.load(source)

        output_path = None
        if output is not None and result.records:
            output_path = Path(output)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            lines = []
            for record in result.records:
                line1, line2 = format_tle(record)
                lines.extend([record.name, line1, line2])
            output_path.write_text("\n".join(lines) + "\n", encoding="ascii")

        summary = IngestSummary(
            source=source,
            accepted=len(result.records),
            rejected=len(result.errors),
            errors=[RecordError(line=line, kind=type(exc).__name__, message=exc.message) for line, exc in result.errors],
            output=str(output_path) if output_path else None,
            duration_seconds=round(time.monotonic() - start_time, 3),
        )
        logger.info(
            "catalog_ingestion_completed",
            source=source,
            accepted=summary.accepted,
            rejected=summary.rejected,
            newest_epoch=max(r.epoch_datetime for r in result.records).isoformat() if result.records else None,
            duration_seconds=summary.duration_seconds,
        )
        return summary


def elements_from_result(result: CatalogLoadResult) -> List[KeplerianElements]:
    return [tle_to_elements(record) for record in result.records]


async def load_reference_orbits(source: Optional[str], service: Optional[CatalogIngestionService] = None
                                ) -> Tuple[List[KeplerianElements], int]:
    """Elements of every valid record of a catalog; no source means no catalog"""
    if not source:
        return [], 0
    result = await (service or CatalogIngestionService()).load(source)
    if result.errors:
        logger.warning("catalog_records_rejected", source=source, rejected=len(result.errors))
    return elements_from_result(result), len(result.records)

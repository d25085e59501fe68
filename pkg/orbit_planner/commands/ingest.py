"""
`ingest` command: validate a TLE catalog and write the accepted records
"""

import argparse
import asyncio

from ..errors import DataError
from ..services.ingest import CatalogIngestionService


def run_ingest(args: argparse.Namespace) -> int:
    service = CatalogIngestionService()
    summary = asyncio.run(service.ingest(args.catalog, args.output))

    print(summary.summary_line)
    for error in summary.errors:
        print(f"  line {error.line}: [{error.kind}] {error.message}")
    if summary.output:
        print(f"wrote {summary.output}")

    if summary.accepted == 0:
        raise DataError(f"no valid records in {summary.source} ({summary.summary_line})")
    return 0

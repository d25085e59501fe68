"""
Catalog ingestion schemas
"""

from typing import List, Optional

from pydantic import BaseModel, Field


class RecordError(BaseModel):
    """One rejected element set"""

    line: int = Field(description="1-based line where the group starts")
    kind: str
    message: str


class IngestSummary(BaseModel):
    source: str
    accepted: int = 0
    rejected: int = 0
    errors: List[RecordError] = Field(default_factory=list)
    output: Optional[str] = None
    duration_seconds: float = 0.0

    @property
    def summary_line(self) -> str:
        return f"{self.accepted} accepted, {self.rejected} rejected"

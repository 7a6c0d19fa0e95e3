from scikg.schemas.graph import (
    IdResponse,
    LabelCreate,
    LabelResponse,
    PaperPayload,
    PaperResponse,
    StatementPayload,
)

__all__ = [
    "IdResponse",
    "LabelCreate",
    "LabelResponse",
    "PaperPayload",
    "PaperResponse",
    "StatementPayload",
]

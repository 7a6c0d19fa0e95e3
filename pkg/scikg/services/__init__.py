from scikg.services.graph_client import GraphClient
from scikg.services.kg_service import ingest_pdf, map_to_paper, resolve_ids, upload
from scikg.services.parser_service import parse_source, strip_annotations
from scikg.services.pdf_service import embed_metadata, extract_metadata, load_pdf
from scikg.services.validation_service import group_contributions, validate
from scikg.services.xmp_service import parse_xmp, serialize_xmp

__all__ = [
    "GraphClient",
    "embed_metadata",
    "extract_metadata",
    "group_contributions",
    "ingest_pdf",
    "load_pdf",
    "map_to_paper",
    "parse_source",
    "parse_xmp",
    "resolve_ids",
    "serialize_xmp",
    "strip_annotations",
    "upload",
    "validate",
]

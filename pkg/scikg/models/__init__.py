from scikg.models.annotation import (
    AnnotationDocument,
    AnnotationWarning,
    Bibliographic,
    EntityLink,
    MandatoryKind,
    NamespaceDecl,
    PropertyAnnotation,
    PropertyKind,
    SourceDocument,
    WarningCode,
)
from scikg.models.paper import (
    PaperOverrides,
    PaperRecord,
    ResolvedRecord,
    UploadMode,
    UploadReport,
)
from scikg.models.pdf import EmbedMode, MetadataLocation, PdfDocument
from scikg.models.xmp import XmpPacket

__all__ = [
    "AnnotationDocument",
    "AnnotationWarning",
    "Bibliographic",
    "EmbedMode",
    "EntityLink",
    "MandatoryKind",
    "MetadataLocation",
    "NamespaceDecl",
    "PaperOverrides",
    "PaperRecord",
    "PdfDocument",
    "PropertyAnnotation",
    "PropertyKind",
    "ResolvedRecord",
    "SourceDocument",
    "UploadMode",
    "UploadReport",
    "WarningCode",
    "XmpPacket",
]

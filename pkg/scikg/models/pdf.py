from enum import Enum
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict
from pypdf.generic import DictionaryObject, IndirectObject, PdfObject


class PdfRef(NamedTuple):
    num: int
    gen: int

    @classmethod
    def of(cls, reference: IndirectObject) -> "PdfRef":
        return cls(reference.idnum, reference.generation)

    def __str__(self) -> str:
        return f"{self.num} {self.gen} R"


class EmbedMode(str, Enum):
    STANDARD = "standard"
    PDFA_COMPAT = "pdfa"


class MetadataLocationKind(str, Enum):
    STANDARD_STREAM = "standard_stream"
    CUSTOM_CATALOG_ENTRY = "custom_catalog_entry"


class MetadataLocation(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: MetadataLocationKind
    ref: PdfRef


class PdfDocument(BaseModel):
    """
    Grafo de objetos de un PDF leído con pypdf: solo la revisión más reciente de cada objeto.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    version: str
    objects: dict[PdfRef, PdfObject]
    trailer: DictionaryObject
    catalog_ref: PdfRef
    metadata_location: MetadataLocation | None = None
    startxref: int
    size: int

    @property
    def catalog(self) -> DictionaryObject:
        return self.objects[self.catalog_ref]

    def resolve(self, obj: PdfObject | None) -> PdfObject | None:
        if isinstance(obj, IndirectObject):
            return self.objects.get(PdfRef.of(obj))
        return obj

import logging
import re
from io import BytesIO
from pathlib import Path

from pypdf import PdfReader, PdfWriter
from pypdf.errors import PyPdfError
from pypdf.generic import (
    DecodedStreamObject,
    DictionaryObject,
    IndirectObject,
    NameObject,
    PdfObject,
    StreamObject,
)

from scikg.config import settings
from scikg.errors import (
    CorruptXrefError,
    EncryptedPdfError,
    MalformedPacketError,
    MissingCatalogError,
    NotAPdfError,
    NotSciKGError,
    UnsupportedFilterError,
)
from scikg.models.pdf import (
    EmbedMode,
    MetadataLocation,
    MetadataLocationKind,
    PdfDocument,
    PdfRef,
)
from scikg.models.xmp import XmpPacket
from scikg.services.xmp_service import parse_xmp

logger = logging.getLogger(__name__)

_HEADER = re.compile(rb"%PDF-(\d\.\d)")
_STARTXREF = re.compile(rb"startxref\s+(\d+)")

METADATA_KEY = NameObject("/Metadata")


def _name(key: str) -> NameObject:
    return NameObject(key if key.startswith("/") else f"/{key}")


def _locate_startxref(data: bytes) -> int | None:
    tail = data.rfind(b"startxref")
    m = _STARTXREF.match(data, tail) if tail >= 0 else None
    return int(m[1]) if m else None


def _open(data: bytes, startxref: int) -> PdfReader:
    try:
        return PdfReader(BytesIO(data), strict=settings.pdf_strict)
    except PyPdfError as exc:
        raise CorruptXrefError(startxref, str(exc)) from exc
    except (ValueError, KeyError, IndexError) as exc:
        raise CorruptXrefError(startxref, f"estructura ilegible: {exc}") from exc


def _object_refs(reader: PdfReader) -> list[PdfRef]:
    refs = {PdfRef(num, gen) for gen, entries in reader.xref.items() for num in entries}
    refs.update(PdfRef(num, 0) for num in reader.xref_objStm)
    return sorted(refs)


def _load_objects(reader: PdfReader, startxref: int) -> dict[PdfRef, PdfObject]:
    objects: dict[PdfRef, PdfObject] = {}
    for ref in _object_refs(reader):
        try:
            obj = reader.get_object(IndirectObject(ref.num, ref.gen, reader))
        except PyPdfError as exc:
            raise CorruptXrefError(startxref, f"objeto {ref}: {exc}") from exc
        except (ValueError, KeyError, IndexError, AssertionError) as exc:
            raise CorruptXrefError(startxref, f"objeto {ref} ilegible: {exc}") from exc
        if obj is not None:
            objects[ref] = obj
    return objects


def _metadata_location(catalog: DictionaryObject, catalog_key: str) -> MetadataLocation | None:
    custom = catalog.raw_get(_name(catalog_key)) if _name(catalog_key) in catalog else None
    if isinstance(custom, IndirectObject):
        return MetadataLocation(
            kind=MetadataLocationKind.CUSTOM_CATALOG_ENTRY, ref=PdfRef.of(custom)
        )
    standard = catalog.raw_get(METADATA_KEY) if METADATA_KEY in catalog else None
    if isinstance(standard, IndirectObject):
        return MetadataLocation(kind=MetadataLocationKind.STANDARD_STREAM, ref=PdfRef.of(standard))
    return None


def load_pdf(data: bytes, catalog_key: str | None = None) -> PdfDocument:
    """
    Lee la estructura de un PDF con pypdf: referencias cruzadas (tablas, streams
    e híbridos), object streams, trailer y catálogo.

    Args:
        data: Bytes del archivo
        catalog_key: Entrada propia del catálogo para los metadatos (por defecto la configurada)

    Returns:
        PdfDocument con la revisión más reciente de cada objeto

    Raises:
        NotAPdfError: Si no hay cabecera %PDF-
        CorruptXrefError: Si las referencias cruzadas no son válidas
        EncryptedPdfError: Si el PDF está cifrado
        MissingCatalogError: Si no hay /Root o no es un /Catalog
    """
    catalog_key = catalog_key or settings.catalog_key
    header = _HEADER.search(data[:1024])
    if not header:
        raise NotAPdfError()

    startxref = _locate_startxref(data)
    if startxref is None:
        raise CorruptXrefError(len(data), "falta startxref")
    if not 0 <= startxref < len(data):
        raise CorruptXrefError(startxref, "offset fuera del archivo")

    reader = _open(data, startxref)
    if reader.is_encrypted:
        raise EncryptedPdfError(startxref)

    root = reader.trailer.raw_get("/Root") if "/Root" in reader.trailer else None
    if not isinstance(root, IndirectObject):
        raise MissingCatalogError()
    catalog_ref = PdfRef.of(root)

    objects = _load_objects(reader, startxref)
    catalog = objects.get(catalog_ref)
    if not isinstance(catalog, DictionaryObject) or catalog.get("/Type") != "/Catalog":
        raise MissingCatalogError(f"{catalog_ref} no es un diccionario /Catalog")

    size = max([int(reader.trailer.get("/Size", 0)), *(ref.num + 1 for ref in objects)])
    logger.debug("PDF %s: %d objetos, startxref %d", header[1].decode(), len(objects), startxref)
    return PdfDocument(
        version=header[1].decode("ascii"),
        objects=objects,
        trailer=reader.trailer,
        catalog_ref=catalog_ref,
        metadata_location=_metadata_location(catalog, catalog_key),
        startxref=startxref,
        size=size,
    )


def embed_metadata(
    data: bytes,
    packet: XmpPacket,
    mode: EmbedMode = EmbedMode.STANDARD,
    catalog_key: str | None = None,
) -> bytes:
    """
    Añade el paquete XMP al PDF mediante una actualización incremental de pypdf.
    Los bytes originales quedan intactos como prefijo de la salida.

    Args:
        data: PDF original
        packet: Paquete XMP a incrustar
        mode: STANDARD enlaza /Metadata; PDFA_COMPAT usa la entrada propia del catálogo
        catalog_key: Nombre de la entrada propia (por defecto la configurada)

    Returns:
        Bytes del PDF actualizado
    """
    catalog_key = catalog_key or settings.catalog_key
    load_pdf(data, catalog_key)

    # La sección añadida empieza en una línea nueva
    source = data if data.endswith((b"\n", b"\r")) else data + b"\n"
    writer = PdfWriter(BytesIO(source), incremental=True)

    stream = DecodedStreamObject()
    stream.set_data(packet.data)
    stream[NameObject("/Type")] = NameObject("/Metadata")
    stream[NameObject("/Subtype")] = NameObject("/XML")
    metadata_ref = writer._add_object(stream)

    catalog = writer.root_object
    if mode is EmbedMode.STANDARD:
        catalog[METADATA_KEY] = metadata_ref
        catalog.pop(_name(catalog_key), None)
    else:
        # /Metadata existente (p. ej. XMP de PDF/A) no se toca
        catalog[_name(catalog_key)] = metadata_ref

    changed = len(writer.list_objects_in_increment())
    out = BytesIO()
    writer.write(out)
    result = out.getvalue()

    logger.info(
        "Metadatos incrustados como objeto %d (%s): %d objetos, %d bytes añadidos",
        metadata_ref.idnum,
        mode.value,
        changed,
        len(result) - len(data),
    )
    return result


def _stream_data(stream: StreamObject) -> bytes:
    try:
        return stream.get_data()
    except NotImplementedError as exc:
        filters = stream.get("/Filter")
        name = filters[0] if isinstance(filters, list) and filters else filters
        raise UnsupportedFilterError(str(name or "").lstrip("/")) from exc
    except (PyPdfError, ValueError) as exc:
        raise MalformedPacketError(str(exc)) from exc


def extract_metadata(
    data: bytes, namespace_uri: str | None = None, catalog_key: str | None = None
) -> XmpPacket | None:
    """
    Busca un paquete de SciKGTeX en el PDF: primero en la entrada propia
    del catálogo y después en /Metadata.

    Returns:
        El paquete con los bytes exactos del stream, o None si no hay metadatos de SciKGTeX

    Raises:
        UnsupportedFilterError: Si el stream usa un filtro que pypdf no decodifica
        MalformedPacketError: Si un stream de metadatos no es XML válido
    """
    catalog_key = catalog_key or settings.catalog_key
    doc = load_pdf(data, catalog_key)
    catalog = doc.catalog

    for key in (_name(catalog_key), METADATA_KEY):
        if key not in catalog:
            continue
        stream = doc.resolve(catalog.raw_get(key))
        if not isinstance(stream, StreamObject):
            logger.warning("La entrada %s del catálogo no apunta a un stream", key)
            continue
        content = _stream_data(stream)
        try:
            parse_xmp(content, namespace_uri)
        except NotSciKGError:
            logger.debug("%s contiene XMP ajeno", key)
            continue
        return XmpPacket.from_bytes(content)
    return None


def read_pdf(path: str | Path) -> bytes:
    return Path(path).read_bytes()

import asyncio
import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager

from scikg.config import settings
from scikg.errors import AmbiguousPaperError, EmptyRecordError, NotSciKGError, PaperNotFoundError
from scikg.models.annotation import AnnotationDocument
from scikg.models.paper import (
    UPLOAD_STEPS,
    PaperOverrides,
    PaperRecord,
    ResolvedRecord,
    ResolvedStatement,
    StatementEntry,
    UploadMode,
    UploadReport,
)
from scikg.schemas.graph import PaperPayload
from scikg.services.graph_client import GraphClient
from scikg.services.pdf_service import extract_metadata
from scikg.services.validation_service import group_contributions
from scikg.services.xmp_service import parse_xmp

logger = logging.getLogger(__name__)


class StepTimer:
    """
    Cronómetro monotónico por pasos, con precisión de milisegundos.
    """

    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextmanager
    def step(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - start, 3)

    def report(self, mode: UploadMode, paper_id: str) -> UploadReport:
        steps = tuple((name, self.timings.get(name, 0.0)) for name in UPLOAD_STEPS)
        return UploadReport(
            mode=mode,
            paper_id=paper_id,
            step_timings=steps,
            total_seconds=sum(seconds for _, seconds in steps),
        )


def graph_resource_id(uri: str) -> str | None:
    """
    ID del grafo si la URI ya apunta a un recurso del grafo (…/resource/R12259 → R12259).
    """
    for prefix in settings.graph_resource_prefixes:
        if uri.startswith(prefix):
            tail = uri[len(prefix) :].strip("/")
            if tail and "/" not in tail:
                return tail
    return None


def _id_key(identifier: str) -> tuple[int, str]:
    digits = "".join(ch for ch in identifier if ch.isdigit())
    return (int(digits) if digits else 1 << 62, identifier)


def map_to_paper(
    doc: AnnotationDocument,
    overrides: PaperOverrides | None = None,
    namespace_uri: str | None = None,
) -> PaperRecord:
    """
    Construye el registro del paper a partir de las anotaciones.
    DOI, fecha y revista solo se toman de overrides.

    Raises:
        EmptyRecordError: Si no hay anotaciones ni datos bibliográficos
    """
    if not doc.annotations and doc.biblio.is_empty:
        raise EmptyRecordError()

    toolkit_uri = namespace_uri or settings.toolkit_namespace_uri
    overrides = overrides or PaperOverrides()
    contributions = {
        cid: tuple(
            StatementEntry(
                property=entry.kind.label,
                namespace=doc.namespace_uri_for(entry.kind, toolkit_uri),
                value=entry.value,
                resource=entry.link.uri if entry.link else None,
            )
            for entry in entries
        )
        for cid, entries in group_contributions(doc).items()
    }
    return PaperRecord(
        doi=overrides.doi,
        title=doc.biblio.title,
        authors=doc.biblio.authors,
        publication_date=overrides.publication_date,
        published_in=overrides.published_in,
        research_field=doc.biblio.research_field,
        contributions=contributions,
    )


def _distinct(labels: list[str]) -> list[str]:
    # Primera aparición de cada etiqueta, sin distinguir mayúsculas
    seen: dict[str, str] = {}
    for label in labels:
        seen.setdefault(label.casefold(), label)
    return list(seen.values())


def _pick(kind: str, label: str, hits: list[dict[str, str]]) -> str | None:
    wanted = label.casefold()
    ids = sorted(
        (hit["id"] for hit in hits if hit.get("label", "").casefold() == wanted), key=_id_key
    )
    if len(ids) > 1:
        logger.warning(
            "Varios %s con la etiqueta %r: %s; se usa %s", kind, label, ", ".join(ids), ids[0]
        )
    return ids[0] if ids else None


async def resolve_ids(record: PaperRecord, client: GraphClient) -> ResolvedRecord:
    """
    Sustituye propiedades y entidades enlazadas por IDs del grafo.
    Las búsquedas se lanzan en paralelo; las creaciones van una a una.

    Raises:
        ServiceUnreachableError: Si el servicio no responde
        ServiceError: Si el servicio devuelve un error
    """
    entries = [entry for statements in record.contributions.values() for entry in statements]

    predicate_labels = _distinct([entry.property for entry in entries])
    resource_labels = _distinct(
        [
            entry.value
            for entry in entries
            if entry.resource is not None and graph_resource_id(entry.resource) is None
        ]
    )

    results = await asyncio.gather(
        *(client.find_predicates(label) for label in predicate_labels),
        *(client.find_resources(label) for label in resource_labels),
    )
    predicate_hits = results[: len(predicate_labels)]
    resource_hits = results[len(predicate_labels) :]

    created: list[tuple[str, str]] = []
    predicates: dict[str, str] = {}
    for label, hits in zip(predicate_labels, predicate_hits, strict=True):
        identifier = _pick("predicados", label, hits)
        if identifier is None:
            identifier = await client.create_predicate(label)
            created.append((label, identifier))
            logger.info("Predicado nuevo %s para %r", identifier, label)
        predicates[label.casefold()] = identifier

    resources: dict[str, str] = {}
    for label, hits in zip(resource_labels, resource_hits, strict=True):
        identifier = _pick("recursos", label, hits)
        if identifier is None:
            identifier = await client.create_resource(label)
            created.append((label, identifier))
            logger.info("Recurso nuevo %s para %r", identifier, label)
        resources[label.casefold()] = identifier

    def resolve(entry: StatementEntry) -> ResolvedStatement:
        resource = None
        if entry.resource is not None:
            resource = graph_resource_id(entry.resource) or resources[entry.value.casefold()]
        return ResolvedStatement(
            predicate=predicates[entry.property.casefold()], value=entry.value, resource=resource
        )

    return ResolvedRecord(
        doi=record.doi,
        title=record.title,
        authors=record.authors,
        publication_date=record.publication_date,
        published_in=record.published_in,
        research_field=record.research_field,
        contributions={
            cid: tuple(resolve(entry) for entry in statements)
            for cid, statements in record.contributions.items()
        },
        unresolved_created=tuple(created),
    )


def paper_payload(resolved: ResolvedRecord) -> PaperPayload:
    """
    Documento JSON que se envía al grafo.
    """
    return PaperPayload(
        title=resolved.title,
        doi=resolved.doi,
        authors=list(resolved.authors),
        publication_date=resolved.publication_date,
        published_in=resolved.published_in,
        research_field=resolved.research_field,
        contributions={
            cid: [statement.model_dump() for statement in statements]
            for cid, statements in resolved.contributions.items()
        },
    )


async def upload(
    resolved: ResolvedRecord,
    mode: UploadMode,
    client: GraphClient,
    timer: StepTimer | None = None,
) -> UploadReport:
    """
    Crea o actualiza el paper en el grafo.

    Args:
        resolved: Registro resuelto contra el mismo servicio
        mode: ADD crea un paper nuevo; UPDATE reemplaza el que tenga el mismo título
        client: Cliente del grafo
        timer: Cronómetro con los pasos anteriores (si falta, cuentan como 0)

    Returns:
        UploadReport con los tiempos de extract, resolve y upload

    Raises:
        PaperNotFoundError: En modo UPDATE, si ningún paper tiene ese título
        AmbiguousPaperError: En modo UPDATE, si varios papers tienen ese título
    """
    timer = timer or StepTimer()
    payload = paper_payload(resolved).model_dump(mode="json")

    with timer.step("upload"):
        if mode is UploadMode.ADD:
            paper_id = await client.create_paper(payload)
        else:
            if not resolved.title:
                raise PaperNotFoundError(resolved.title)
            matches = await client.find_papers(resolved.title)
            if not matches:
                raise PaperNotFoundError(resolved.title)
            if len(matches) > 1:
                raise AmbiguousPaperError(resolved.title, [match["id"] for match in matches])
            paper_id = matches[0]["id"]
            await client.replace_paper(paper_id, payload)

    logger.info("Paper %s subido (%s)", paper_id, mode.value)
    return timer.report(mode, paper_id)


async def ingest_pdf(
    pdf: bytes,
    client: GraphClient,
    mode: UploadMode = UploadMode.ADD,
    overrides: PaperOverrides | None = None,
    namespace_uri: str | None = None,
) -> UploadReport:
    """
    Flujo completo: leer los metadatos del PDF, resolver IDs y subir el paper.

    Raises:
        NotSciKGError: Si el PDF no contiene metadatos de SciKGTeX
    """
    timer = StepTimer()
    with timer.step("extract"):
        packet = extract_metadata(pdf, namespace_uri)
        if packet is None:
            raise NotSciKGError()
        record = map_to_paper(parse_xmp(packet, namespace_uri), overrides, namespace_uri)

    with timer.step("resolve"):
        resolved = await resolve_ids(record, client)

    return await upload(resolved, mode, client, timer)

from datetime import date
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class PaperOverrides(BaseModel):
    """
    Datos que no se conocen al anotar y se añaden a mano al subir el paper.
    """

    model_config = ConfigDict(frozen=True)

    doi: str | None = None
    publication_date: date | None = None
    published_in: str | None = None


class StatementEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    property: str
    namespace: str | None
    value: str
    resource: str | None = None


class PaperRecord(BaseModel):
    """
    Registro de paper listo para el grafo, construido a partir de las anotaciones.
    """

    model_config = ConfigDict(frozen=True)

    doi: str | None = None
    title: str | None = None
    authors: tuple[str, ...] = ()
    publication_date: date | None = None
    published_in: str | None = None
    research_field: str | None = None
    contributions: dict[str, tuple[StatementEntry, ...]] = Field(default_factory=dict)


class ResolvedStatement(BaseModel):
    model_config = ConfigDict(frozen=True)

    predicate: str
    value: str
    resource: str | None = None


class ResolvedRecord(BaseModel):
    """
    PaperRecord con propiedades y entidades sustituidas por identificadores del grafo.
    unresolved_created lista (etiqueta, id nuevo) de lo que hubo que crear.
    """

    model_config = ConfigDict(frozen=True)

    doi: str | None = None
    title: str | None = None
    authors: tuple[str, ...] = ()
    publication_date: date | None = None
    published_in: str | None = None
    research_field: str | None = None
    contributions: dict[str, tuple[ResolvedStatement, ...]] = Field(default_factory=dict)
    unresolved_created: tuple[tuple[str, str], ...] = ()


class UploadMode(str, Enum):
    ADD = "add"
    UPDATE = "update"


UPLOAD_STEPS = ("extract", "resolve", "upload")


class UploadReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: UploadMode
    paper_id: str
    step_timings: tuple[tuple[str, float], ...]
    total_seconds: float

    @model_validator(mode="after")
    def check_timings(self) -> "UploadReport":
        if tuple(name for name, _ in self.step_timings) != UPLOAD_STEPS:
            raise ValueError(f"Los pasos deben ser {', '.join(UPLOAD_STEPS)}")
        if abs(sum(seconds for _, seconds in self.step_timings) - self.total_seconds) > 1e-6:
            raise ValueError("total_seconds no coincide con la suma de los pasos")
        return self

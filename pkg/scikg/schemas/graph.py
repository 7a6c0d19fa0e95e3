from datetime import date

from pydantic import BaseModel, Field


class LabelCreate(BaseModel):
    """
    Cuerpo para crear un recurso o un predicado.
    """

    label: str = Field(..., min_length=1, description="Etiqueta, se guarda tal cual")

    class Config:
        json_schema_extra = {"example": {"label": "p-value"}}


class IdResponse(BaseModel):
    id: str = Field(..., description="Identificador asignado (R<n> o P<n>)")


class LabelResponse(BaseModel):
    id: str
    label: str


class StatementPayload(BaseModel):
    predicate: str = Field(..., min_length=1, description="ID del predicado")
    value: str
    resource: str | None = Field(None, description="ID del recurso enlazado")


class PaperPayload(BaseModel):
    """
    Documento JSON de un paper, tal como lo envía el cliente.
    """

    title: str | None = None
    doi: str | None = None
    authors: list[str] = Field(default_factory=list)
    publication_date: date | None = None
    published_in: str | None = None
    research_field: str | None = None
    contributions: dict[str, list[StatementPayload]] = Field(default_factory=dict)

    class Config:
        json_schema_extra = {
            "example": {
                "title": "Aspirin as a treatment for headache",
                "doi": None,
                "authors": ["Ada Lovelace", "Alan Turing"],
                "publication_date": None,
                "published_in": None,
                "research_field": "pharmacology",
                "contributions": {
                    "1": [
                        {"predicate": "P1", "value": "headache", "resource": None},
                        {"predicate": "P2", "value": "aspirin", "resource": "R12259"},
                    ]
                },
            }
        }


class PaperResponse(PaperPayload):
    id: str = Field(..., description="ID del paper")

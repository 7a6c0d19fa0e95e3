import hashlib
import re
from enum import Enum
from typing import Any, NamedTuple
from urllib.parse import urlsplit

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Nombre local válido en XML (sin ':'), usado para propiedades y prefijos
NAME_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


def is_absolute_uri(value: str) -> bool:
    return bool(value) and bool(urlsplit(value).scheme)


class MandatoryKind(str, Enum):
    """
    Las cinco propiedades predefinidas, en el orden fijo de los avisos.
    El valor es el nombre del comando LaTeX.
    """

    RESEARCH_PROBLEM = "researchproblem"
    OBJECTIVE = "objective"
    METHOD = "method"
    RESULT = "result"
    CONCLUSION = "conclusion"

    @property
    def label(self) -> str:
        return MANDATORY_LABELS[self]


MANDATORY_LABELS: dict[MandatoryKind, str] = {
    MandatoryKind.RESEARCH_PROBLEM: "research problem",
    MandatoryKind.OBJECTIVE: "objective",
    MandatoryKind.METHOD: "method",
    MandatoryKind.RESULT: "result",
    MandatoryKind.CONCLUSION: "conclusion",
}

MANDATORY_COMMANDS = frozenset(kind.value for kind in MandatoryKind)


class PropertyKind(BaseModel):
    """
    Tipo de una propiedad anotada: una de las cinco obligatorias
    o una propiedad propia con prefijo opcional.
    """

    model_config = ConfigDict(frozen=True)

    mandatory: MandatoryKind | None = None
    prefix: str | None = None
    name: str | None = None

    @model_validator(mode="after")
    def check_variant(self) -> "PropertyKind":
        if self.mandatory is not None:
            if self.prefix is not None or self.name is not None:
                raise ValueError("Una propiedad obligatoria no lleva prefijo ni nombre")
            return self

        if not self.name or not NAME_PATTERN.match(self.name):
            raise ValueError(f"Nombre de propiedad inválido: {self.name!r}")
        if self.prefix is not None and not NAME_PATTERN.match(self.prefix):
            raise ValueError(f"Prefijo inválido: {self.prefix!r}")
        if self.prefix is None and self.name in MANDATORY_COMMANDS:
            raise ValueError(f"'{self.name}' es una propiedad obligatoria, use PropertyKind.of()")
        return self

    @classmethod
    def of(cls, kind: MandatoryKind) -> "PropertyKind":
        return cls(mandatory=kind)

    @classmethod
    def custom(cls, name: str, prefix: str | None = None) -> "PropertyKind":
        """
        Construye una propiedad propia.
        Un nombre sin prefijo igual a un comando obligatorio se normaliza a ese tipo.
        """
        if prefix is None and name in MANDATORY_COMMANDS:
            return cls.of(MandatoryKind(name))
        return cls(prefix=prefix, name=name)

    @classmethod
    def from_qualified(cls, qualified: str) -> "PropertyKind":
        """
        Interpreta 'amo:claim' o 'p-value' tal como aparecen en \\contribution.
        """
        prefix, sep, name = qualified.partition(":")
        if sep:
            return cls.custom(name.strip(), prefix.strip())
        return cls.custom(qualified.strip())

    @property
    def is_mandatory(self) -> bool:
        return self.mandatory is not None

    @property
    def local_name(self) -> str:
        return self.mandatory.value if self.mandatory is not None else self.name

    @property
    def label(self) -> str:
        return self.mandatory.label if self.mandatory is not None else self.name

    @property
    def qualified_name(self) -> str:
        if self.prefix:
            return f"{self.prefix}:{self.name}"
        return self.local_name

    def __str__(self) -> str:
        return self.qualified_name


class EntityLink(BaseModel):
    model_config = ConfigDict(frozen=True)

    uri: str
    label: str | None = None

    @field_validator("uri")
    @classmethod
    def uri_is_absolute(cls, v: str) -> str:
        if not is_absolute_uri(v):
            raise ValueError(f"La URI del enlace debe ser absoluta: {v!r}")
        return v

    @field_validator("label")
    @classmethod
    def label_not_empty(cls, v: str | None) -> str | None:
        if v is not None and not v:
            raise ValueError("La etiqueta del enlace no puede estar vacía")
        return v


class PropertyAnnotation(BaseModel):
    """
    Una propiedad anotada en la fuente.
    span es el rango de caracteres [inicio, fin) del comando completo;
    no existe cuando el documento proviene de un paquete XMP.
    """

    model_config = ConfigDict(frozen=True)

    kind: PropertyKind
    value: str
    contributions: tuple[str, ...] = ("1",)
    visible: bool = True
    link: EntityLink | None = None
    span: tuple[int, int] | None = None

    @field_validator("contributions")
    @classmethod
    def contributions_are_ordered_set(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        if not v:
            raise ValueError("Una anotación pertenece al menos a una contribución")
        if any(not cid for cid in v):
            raise ValueError("Los identificadores de contribución no pueden estar vacíos")
        # Conjunto ordenado: se conserva la primera aparición
        return tuple(dict.fromkeys(v))

    @field_validator("span")
    @classmethod
    def span_is_range(cls, v: tuple[int, int] | None) -> tuple[int, int] | None:
        if v is not None and not 0 <= v[0] < v[1]:
            raise ValueError(f"Rango inválido: {v}")
        return v


class NamespaceDecl(BaseModel):
    model_config = ConfigDict(frozen=True)

    abbreviation: str | None = None
    uri: str
    property: str

    @field_validator("uri")
    @classmethod
    def uri_is_absolute(cls, v: str) -> str:
        if not is_absolute_uri(v):
            raise ValueError(f"La URI del namespace debe ser absoluta: {v!r}")
        return v


class Bibliographic(BaseModel):
    model_config = ConfigDict(frozen=True)

    title: str | None = None
    authors: tuple[str, ...] = ()
    research_field: str | None = None

    @property
    def is_empty(self) -> bool:
        return self.title is None and not self.authors and self.research_field is None


class AnnotationDocument(BaseModel):
    """
    Resultado del análisis: anotaciones, namespaces registrados y metadatos bibliográficos.
    """

    model_config = ConfigDict(frozen=True)

    annotations: tuple[PropertyAnnotation, ...] = ()
    namespaces: tuple[NamespaceDecl, ...] = ()
    biblio: Bibliographic = Field(default_factory=Bibliographic)
    source_digest: str | None = None
    # (campo, posición) de cada \metatitle o \researchfield repetido
    duplicates: tuple[tuple[str, int], ...] = ()

    @model_validator(mode="after")
    def check_spans(self) -> "AnnotationDocument":
        spans = [a.span for a in self.annotations]
        if all(span is not None for span in spans):
            for previous, current in zip(spans, spans[1:], strict=False):
                if current[0] < previous[1]:
                    raise ValueError(f"Anotaciones solapadas o desordenadas: {previous} y {current}")

        registered: dict[str, str] = {}
        for decl in self.namespaces:
            if decl.abbreviation is None:
                continue
            known = registered.setdefault(decl.abbreviation, decl.uri)
            if known != decl.uri:
                raise ValueError(f"La abreviatura '{decl.abbreviation}' tiene dos URIs")
        return self

    @staticmethod
    def digest(text: str) -> str:
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def namespace_for(self, prefix: str) -> NamespaceDecl | None:
        return next((d for d in self.namespaces if d.abbreviation == prefix), None)

    def namespace_uri_for(self, kind: PropertyKind, toolkit_uri: str) -> str | None:
        """
        URI del namespace en el que se serializa una propiedad.
        None cuando el prefijo no está registrado.
        """
        if kind.is_mandatory:
            return toolkit_uri
        if kind.prefix is not None:
            decl = self.namespace_for(kind.prefix)
            return decl.uri if decl else None
        for decl in self.namespaces:
            if decl.abbreviation is None and decl.property == kind.name:
                return decl.uri
        return toolkit_uri

    def structure(self) -> tuple[Any, ...]:
        """
        Clave de comparación estructural: ignora spans, visibilidad, hash y duplicados.
        """
        annotations = tuple(
            (a.kind, a.value, tuple(sorted(a.contributions)), a.link) for a in self.annotations
        )
        return annotations, self.namespaces, self.biblio


class WarningCode(str, Enum):
    MISSING_MANDATORY = "missing_mandatory"
    DUPLICATE_BIBLIO = "duplicate_biblio"
    UNKNOWN_PREFIX = "unknown_prefix"


class AnnotationWarning(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: WarningCode
    subject: str
    message: str
    position: int | None = None

    def __str__(self) -> str:
        return self.message


class ContributionEntry(NamedTuple):
    kind: PropertyKind
    value: str
    link: EntityLink | None


class SourceDocument(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    origin: str = "<stdin>"

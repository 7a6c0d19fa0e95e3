from enum import IntEnum


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    PARSE = 2
    PDF = 3
    SERVICE = 4


class SciKGError(Exception):
    """
    Error base de la herramienta.
    Cada subclase define el código de salida que usa la CLI.
    """

    exit_code: ExitCode = ExitCode.USAGE


class UsageError(SciKGError):
    exit_code = ExitCode.USAGE


# Errores de anotación (fuente LaTeX y modelo)


class ParseError(SciKGError):
    exit_code = ExitCode.PARSE


class UnbalancedBracesError(ParseError):
    def __init__(self, position: int):
        self.position = position
        super().__init__(f"Llaves desbalanceadas en la posición {position}")


class MalformedCommandError(ParseError):
    def __init__(self, position: int, command: str, detail: str = ""):
        self.position = position
        self.command = command
        message = f"Comando \\{command} mal formado en la posición {position}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class DuplicateNamespaceConflictError(ParseError):
    def __init__(self, abbreviation: str, uris: tuple[str, str]):
        self.abbreviation = abbreviation
        self.uris = uris
        super().__init__(
            f"La abreviatura '{abbreviation}' ya está registrada para {uris[0]}, "
            f"no puede apuntar también a {uris[1]}"
        )


class SpanMismatchError(ParseError):
    def __init__(self):
        super().__init__("El documento de anotaciones no corresponde a esta fuente")


class UnresolvedPrefixError(ParseError):
    def __init__(self, prefix: str):
        self.prefix = prefix
        super().__init__(f"El prefijo '{prefix}' no tiene un \\addmetaproperty registrado")


class EmptyRecordError(ParseError):
    def __init__(self):
        super().__init__("El documento no tiene anotaciones ni metadatos bibliográficos")


# Errores de PDF y XMP


class PdfError(SciKGError):
    exit_code = ExitCode.PDF


class NotAPdfError(PdfError):
    def __init__(self):
        super().__init__("El archivo no tiene cabecera %PDF")


class CorruptXrefError(PdfError):
    def __init__(self, offset: int, detail: str = ""):
        self.offset = offset
        message = f"Tabla de referencias cruzadas inválida en el offset {offset}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class EncryptedPdfError(CorruptXrefError):
    def __init__(self, offset: int):
        super().__init__(offset, "los PDF cifrados no están soportados")


class MissingCatalogError(PdfError):
    def __init__(self, detail: str = "el trailer no apunta a un /Catalog"):
        super().__init__(f"Catálogo no encontrado: {detail}")


class UnsupportedFilterError(PdfError):
    def __init__(self, filter_name: str):
        self.filter_name = filter_name
        super().__init__(f"Filtro de stream no soportado: /{filter_name}")


class MalformedPacketError(PdfError):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(f"Paquete XMP mal formado: {detail}")


class NotSciKGError(PdfError):
    def __init__(self):
        super().__init__("El paquete XMP no contiene metadatos de SciKGTeX")


# Errores del grafo de conocimiento


class GraphServiceError(SciKGError):
    exit_code = ExitCode.SERVICE


class ServiceUnreachableError(GraphServiceError):
    def __init__(self, url: str, reason: str):
        self.url = url
        super().__init__(f"No se pudo conectar con el grafo en {url}: {reason}")


class ServiceError(GraphServiceError):
    def __init__(self, status: int, body: str):
        self.status = status
        self.body = body
        super().__init__(f"El grafo respondió {status}: {body}")


class PaperNotFoundError(GraphServiceError):
    def __init__(self, title: str | None):
        self.title = title
        super().__init__(f"No existe un paper con el título {title!r}")


class AmbiguousPaperError(GraphServiceError):
    def __init__(self, title: str, ids: list[str]):
        self.title = title
        self.ids = ids
        super().__init__(f"Varios papers tienen el título {title!r}: {', '.join(ids)}")


class BindFailureError(GraphServiceError):
    def __init__(self, address: str):
        self.address = address
        super().__init__(f"No se pudo abrir el servicio en {address}")

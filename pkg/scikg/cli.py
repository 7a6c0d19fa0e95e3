"""
Línea de comandos: anotar, incrustar, extraer y subir contribuciones.
"""

import argparse
import asyncio
import logging
import sys
from collections.abc import Callable, Sequence
from datetime import date
from pathlib import Path

import uvicorn
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from scikg import __version__
from scikg.config import settings
from scikg.database import GraphStore
from scikg.errors import ExitCode, SciKGError, UsageError
from scikg.main import create_app
from scikg.models.annotation import AnnotationDocument, SourceDocument, is_absolute_uri
from scikg.models.paper import PaperOverrides, UploadMode
from scikg.models.pdf import EmbedMode
from scikg.server import bind_socket
from scikg.services.graph_client import GraphClient
from scikg.services.kg_service import ingest_pdf
from scikg.services.parser_service import parse_source, read_source, strip_annotations
from scikg.services.pdf_service import embed_metadata, extract_metadata, read_pdf
from scikg.services.validation_service import validate
from scikg.services.xmp_service import serialize_xmp

logger = logging.getLogger(__name__)

WARNING_PREFIX = "SciKGTeX Warning:"


class CliConfig(BaseModel):
    """
    Configuración efectiva de una ejecución: Settings más las opciones de la línea de comandos.
    """

    model_config = ConfigDict(frozen=True)

    toolkit_namespace_uri: str = settings.toolkit_namespace_uri
    graph_base_url: str = settings.graph_url
    embed_mode: EmbedMode = EmbedMode.STANDARD
    output: Path | None = None

    @field_validator("toolkit_namespace_uri", "graph_base_url")
    @classmethod
    def uri_is_absolute(cls, v: str) -> str:
        if not is_absolute_uri(v):
            raise ValueError(f"La URI debe ser absoluta: {v!r}")
        return v

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        return cls(
            toolkit_namespace_uri=args.namespace_uri or settings.toolkit_namespace_uri,
            graph_base_url=args.graph_url or settings.graph_url,
            embed_mode=(
                EmbedMode.PDFA_COMPAT if getattr(args, "pdfa", False) else EmbedMode.STANDARD
            ),
            output=getattr(args, "output", None),
        )


class _ArgumentParser(argparse.ArgumentParser):
    # Los errores de uso salen con código 1, no con el 2 de argparse
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage().strip()}")


def sidecar_path(path: Path) -> Path:
    return path.with_suffix(".xmp")


def _print_warnings(doc: AnnotationDocument) -> int:
    warnings = validate(doc)
    for warning in warnings:
        print(f"{WARNING_PREFIX} {warning.message}", file=sys.stderr)
    return len(warnings)


def _load(tex: str) -> tuple[SourceDocument, AnnotationDocument]:
    src = read_source(tex)
    return src, parse_source(src)


def _write_text(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def _write_bytes(data: bytes, output: Path | None) -> None:
    if output is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        output.write_bytes(data)


# Subcomandos


def cmd_check(args: argparse.Namespace, config: CliConfig) -> int:
    _, doc = _load(args.tex)
    count = _print_warnings(doc)
    print(
        f"{len(doc.annotations)} anotaciones, {len(doc.namespaces)} namespaces, {count} avisos"
    )
    return ExitCode.OK


def cmd_strip(args: argparse.Namespace, config: CliConfig) -> int:
    src, doc = _load(args.tex)
    _write_text(strip_annotations(src, doc), config.output)
    return ExitCode.OK


def cmd_xmp(args: argparse.Namespace, config: CliConfig) -> int:
    _, doc = _load(args.tex)
    _print_warnings(doc)
    packet = serialize_xmp(doc, config.toolkit_namespace_uri)

    output = config.output
    if output is None and args.tex != "-":
        output = sidecar_path(Path(args.tex))
    _write_bytes(packet.data, output)
    if output is not None:
        print(output)
    return ExitCode.OK


def cmd_embed(args: argparse.Namespace, config: CliConfig) -> int:
    _, doc = _load(args.tex)
    _print_warnings(doc)
    packet = serialize_xmp(doc, config.toolkit_namespace_uri)

    pdf_path = Path(args.pdf)
    data = embed_metadata(read_pdf(pdf_path), packet, config.embed_mode)
    output = config.output or pdf_path.with_name(f"{pdf_path.stem}_annotated.pdf")
    output.write_bytes(data)
    sidecar = packet.write_sidecar(sidecar_path(output))
    print(output)
    print(sidecar)
    return ExitCode.OK


def cmd_extract(args: argparse.Namespace, config: CliConfig) -> int:
    packet = extract_metadata(read_pdf(args.pdf), config.toolkit_namespace_uri)
    if packet is None:
        print(f"{args.pdf}: no toolkit metadata")
        return ExitCode.OK
    _write_bytes(packet.data, config.output)
    return ExitCode.OK


def cmd_upload(args: argparse.Namespace, config: CliConfig) -> int:
    overrides = PaperOverrides(doi=args.doi, publication_date=args.date, published_in=args.venue)
    mode = UploadMode.UPDATE if args.update else UploadMode.ADD
    data = read_pdf(args.pdf)

    async def run_upload():
        async with GraphClient(config.graph_base_url) as client:
            return await ingest_pdf(data, client, mode, overrides, config.toolkit_namespace_uri)

    report = asyncio.run(run_upload())
    print(report.model_dump_json(indent=2))
    return ExitCode.OK


def cmd_serve(args: argparse.Namespace, config: CliConfig) -> int:
    store = GraphStore.load(args.seed) if args.seed else GraphStore()
    sock = bind_socket(f"{args.host}:{args.port}")
    host, port = sock.getsockname()[:2]
    print(f"🚀 Grafo simulado en http://{host}:{port} (Ctrl+C para salir)", file=sys.stderr)
    server = uvicorn.Server(uvicorn.Config(create_app(store), log_level="info"))
    try:
        server.run(sockets=[sock])
    finally:
        sock.close()
        if args.dump:
            store.dump(args.dump)
    return ExitCode.OK


def _iso_date(value: str) -> date:
    try:
        return date.fromisoformat(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"fecha inválida {value!r} (use AAAA-MM-DD)") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="scikg",
        description="Anotaciones de contribuciones científicas en LaTeX, XMP y PDF.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--namespace-uri", help="Namespace de las propiedades (SCIKG_TOOLKIT_NAMESPACE_URI)"
    )
    parser.add_argument("--graph-url", help="URL base del grafo (SCIKG_GRAPH_URL)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Más detalle en el log")

    commands = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def add(name: str, handler: Callable[..., int], help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text, description=help_text)
        sub.set_defaults(handler=handler)
        return sub

    check = add("check", cmd_check, "Analiza la fuente y muestra los avisos")
    check.add_argument("tex", help="Fuente LaTeX ('-' para stdin)")

    strip = add("strip", cmd_strip, "Emite la fuente sin el marcado de anotación")
    strip.add_argument("tex", help="Fuente LaTeX ('-' para stdin)")
    strip.add_argument("-o", "--output", type=Path, help="Archivo de salida (por defecto stdout)")

    xmp = add("xmp", cmd_xmp, "Escribe el paquete XMP de la fuente")
    xmp.add_argument("tex", help="Fuente LaTeX ('-' para stdin)")
    xmp.add_argument(
        "-o", "--output", type=Path, help="Archivo .xmp (por defecto junto a la fuente)"
    )

    embed = add("embed", cmd_embed, "Incrusta las anotaciones en un PDF")
    embed.add_argument("tex", help="Fuente LaTeX")
    embed.add_argument("pdf", help="PDF de entrada")
    embed.add_argument(
        "--pdfa", action="store_true", help="Usa la entrada propia del catálogo (PDF/A)"
    )
    embed.add_argument(
        "-o", "--output", type=Path, help="PDF de salida (por defecto <pdf>_annotated.pdf)"
    )

    extract = add("extract", cmd_extract, "Muestra el paquete XMP de un PDF")
    extract.add_argument("pdf", help="PDF anotado")
    extract.add_argument("-o", "--output", type=Path, help="Archivo de salida (por defecto stdout)")

    upload = add("upload", cmd_upload, "Sube el paper de un PDF anotado al grafo")
    upload.add_argument("pdf", help="PDF anotado")
    upload.add_argument(
        "--update", action="store_true", help="Reemplaza el paper con el mismo título"
    )
    upload.add_argument("--doi", help="DOI del paper")
    upload.add_argument("--date", type=_iso_date, help="Fecha de publicación (AAAA-MM-DD)")
    upload.add_argument("--venue", help="Revista o congreso")

    serve = add("serve", cmd_serve, "Ejecuta el grafo simulado en primer plano")
    serve.add_argument("--seed", type=Path, help="Snapshot JSON inicial")
    serve.add_argument("--dump", type=Path, help="Guarda un snapshot al terminar")
    serve.add_argument("--host", default=settings.api_host)
    serve.add_argument("--port", type=int, default=settings.api_port)

    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


def run(argv: Sequence[str] | None = None) -> int:
    """
    Ejecuta la CLI y devuelve el código de salida.

    Returns:
        0 éxito, 1 uso, 2 anotación, 3 PDF, 4 servicio
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _configure_logging(args.verbose)
        config = CliConfig.from_args(args)
        return int(args.handler(args, config))
    except SystemExit as exc:
        # --help y --version
        return exc.code if isinstance(exc.code, int) else ExitCode.OK
    except SciKGError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return int(exc.exit_code)
    except ValidationError as exc:
        print(f"error: {exc.errors()[0]['msg']}", file=sys.stderr)
        return int(ExitCode.USAGE)
    except OSError as exc:
        print(f"error: {exc.strerror or exc}: {exc.filename or ''}".rstrip(": "), file=sys.stderr)
        return int(ExitCode.USAGE)


def main() -> None:
    sys.exit(run())

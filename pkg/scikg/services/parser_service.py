import logging
import re
import sys
from enum import Enum
from pathlib import Path
from typing import NamedTuple

from pydantic import ValidationError

from scikg.errors import (
    DuplicateNamespaceConflictError,
    MalformedCommandError,
    ParseError,
    SpanMismatchError,
    UnbalancedBracesError,
)
from scikg.models.annotation import (
    NAME_PATTERN,
    AnnotationDocument,
    Bibliographic,
    EntityLink,
    MandatoryKind,
    NamespaceDecl,
    PropertyAnnotation,
    PropertyKind,
    SourceDocument,
)

logger = logging.getLogger(__name__)

BIBLIO_COMMANDS = frozenset({"metatitle", "metaauthor", "researchfield"})
PROPERTY_COMMANDS = frozenset(kind.value for kind in MandatoryKind) | {"contribution"}
# Comandos del paquete que no se pueden anidar dentro del valor de una propiedad
TOOLKIT_COMMANDS = PROPERTY_COMMANDS | BIBLIO_COMMANDS | {"addmetaproperty"}

_SPECIAL = re.compile(r"[\\{}%]")
_COMMAND_NAME = re.compile(r"[A-Za-z]+")
_VERBATIM_BEGIN = re.compile(r"\s*\{(verbatim\*?|Verbatim|lstlisting|minted|comment)\}")
_INLINE_SPACE = " \t"


class EditKind(str, Enum):
    REPLACE = "replace"
    REMOVE_INLINE = "remove_inline"
    REMOVE_LINE = "remove_line"


class _Edit(NamedTuple):
    start: int
    end: int
    kind: EditKind
    replacement: str = ""


class _Fragment(NamedTuple):
    """Resultado de recorrer el contenido de un argumento."""

    plain: str
    rendered: str
    link: EntityLink | None


class _Scanner:
    """
    Recorre la fuente una sola vez y reúne anotaciones, namespaces,
    metadatos bibliográficos y las ediciones que produce el texto limpio.
    """

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.annotations: list[PropertyAnnotation] = []
        self.namespaces: list[NamespaceDecl] = []
        self.title: str | None = None
        self.authors: list[str] = []
        self.research_field: str | None = None
        self.duplicates: list[tuple[str, int]] = []
        self.edits: list[_Edit] = []

    def run(self) -> "_Scanner":
        text = self.text
        open_braces: list[int] = []
        while True:
            match = _SPECIAL.search(text, self.pos)
            if match is None:
                break
            self.pos = match.start()
            char = match.group()
            if char == "%":
                self.pos = self._end_of_comment(self.pos)
            elif char == "\\":
                self._top_level_command()
            elif char == "{":
                open_braces.append(self.pos)
                self.pos += 1
            else:
                if not open_braces:
                    raise UnbalancedBracesError(self.pos)
                open_braces.pop()
                self.pos += 1

        if open_braces:
            raise UnbalancedBracesError(open_braces[-1])
        return self

    def document(self) -> AnnotationDocument:
        return AnnotationDocument(
            annotations=tuple(self.annotations),
            namespaces=tuple(self.namespaces),
            biblio=Bibliographic(
                title=self.title,
                authors=tuple(self.authors),
                research_field=self.research_field,
            ),
            source_digest=AnnotationDocument.digest(self.text),
            duplicates=tuple(self.duplicates),
        )

    # Lectura de bajo nivel

    def _end_of_comment(self, pos: int, limit: int | None = None) -> int:
        limit = len(self.text) if limit is None else limit
        newline = self.text.find("\n", pos, limit)
        return limit if newline == -1 else newline + 1

    def _read_name(self, pos: int) -> str | None:
        match = _COMMAND_NAME.match(self.text, pos + 1)
        return match.group() if match else None

    def _skip_space(self, pos: int) -> int:
        while pos < len(self.text) and self.text[pos].isspace():
            pos += 1
        return pos

    def _read_star(self, pos: int) -> tuple[bool, int]:
        pos = self._skip_space(pos)
        if self.text.startswith("*", pos):
            return True, pos + 1
        return False, pos

    def _read_optional(self, pos: int, start: int, command: str) -> tuple[str | None, int]:
        """
        Lee un argumento opcional [...] si existe.
        """
        ahead = self._skip_space(pos)
        if not self.text.startswith("[", ahead):
            return None, pos
        depth = 0
        i = ahead + 1
        while i < len(self.text):
            char = self.text[i]
            if char == "\\":
                i += 2
                continue
            if char == "{":
                depth += 1
            elif char == "}":
                depth -= 1
            elif char == "]" and depth == 0:
                return self.text[ahead + 1 : i], i + 1
            i += 1
        raise MalformedCommandError(start, command, "falta el ']' de cierre")

    def _read_group(
        self, pos: int, start: int, command: str, verbatim: bool = False
    ) -> tuple[int, int, int]:
        """
        Lee un argumento {...} con llaves anidadas.

        Returns:
            Tuple: (inicio del contenido, fin del contenido, posición tras la llave de cierre)
        """
        pos = self._skip_space(pos)
        if not self.text.startswith("{", pos):
            raise MalformedCommandError(start, command, "falta un argumento entre llaves")
        depth = 1
        i = pos + 1
        while i < len(self.text):
            char = self.text[i]
            if char == "\\":
                i += 2
                continue
            if char == "%" and not verbatim:
                i = self._end_of_comment(i)
                continue
            if char == "{":
                depth += 1
            elif char == "}":
                depth -= 1
                if depth == 0:
                    return pos + 1, i, i + 1
            i += 1
        raise UnbalancedBracesError(pos)

    def _has_group(self, pos: int) -> bool:
        ahead = pos
        while ahead < len(self.text) and self.text[ahead] in _INLINE_SPACE:
            ahead += 1
        return self.text.startswith("{", ahead)

    # Contenido de los argumentos

    def _walk(self, begin: int, end: int, allow_uri: bool) -> _Fragment:
        """
        Convierte el contenido de un argumento a texto plano y a su forma renderizada.
        Solo \\uri puede aparecer anidado; los demás comandos se descartan conservando
        el contenido de sus llaves.
        """
        text = self.text
        plain: list[str] = []
        rendered: list[str] = []
        link: EntityLink | None = None
        i = begin
        while i < end:
            char = text[i]
            if char == "%":
                stop = self._end_of_comment(i, end)
                rendered.append(text[i:stop])
                i = stop
            elif char == "\\":
                name = self._read_name(i)
                if name is None:
                    # Caracter escapado: se conserva literal
                    plain.append(text[i : i + 2])
                    rendered.append(text[i : i + 2])
                    i += 2
                elif name == "uri":
                    if not allow_uri:
                        raise MalformedCommandError(i, name, "no se permite aquí")
                    if link is not None:
                        raise MalformedCommandError(i, name, "solo se admite un \\uri por valor")
                    link, markup, i = self._uri(i)
                    plain.append(link.label or link.uri)
                    rendered.append(markup)
                elif name in TOOLKIT_COMMANDS:
                    raise MalformedCommandError(i, name, "no se puede anidar dentro de otra anotación")
                else:
                    stop = i + 1 + len(name)
                    rendered.append(text[i:stop])
                    i = stop
            elif char in "{}":
                rendered.append(char)
                i += 1
            elif char == "~":
                plain.append(" ")
                rendered.append(char)
                i += 1
            else:
                plain.append(char)
                rendered.append(char)
                i += 1

        return _Fragment(" ".join("".join(plain).split()), "".join(rendered), link)

    def _uri(self, start: int) -> tuple[EntityLink, str, int]:
        """
        Lee \\uri{URI}{etiqueta} o \\uri{URI}.

        Returns:
            Tuple: (enlace, marcado hyperref, posición final)
        """
        after = start + len("\\uri")
        u_begin, u_end, pos = self._read_group(after, start, "uri", verbatim=True)
        uri = self.text[u_begin:u_end].strip()

        label = None
        label_source = None
        if self._has_group(pos):
            l_begin, l_end, pos = self._read_group(pos, start, "uri")
            label_source = self.text[l_begin:l_end]
            label = self._walk(l_begin, l_end, allow_uri=False).plain or None

        try:
            link = EntityLink(uri=uri, label=label)
        except ValidationError as exc:
            raise MalformedCommandError(start, "uri", f"URI inválida {uri!r}") from exc

        if label is None:
            return link, f"\\url{{{uri}}}", pos
        return link, f"\\href{{{uri}}}{{{label_source}}}", pos

    # Comandos de nivel superior

    def _top_level_command(self) -> None:
        start = self.pos
        name = self._read_name(start)
        if name is None:
            self.pos = start + 2
            return
        after = start + 1 + len(name)

        if name == "begin":
            self.pos = self._skip_verbatim(start, after)
        elif name == "verb":
            self.pos = self._skip_verb(start, after)
        elif name in PROPERTY_COMMANDS:
            self.pos = self._property(start, after, name)
        elif name in BIBLIO_COMMANDS:
            self.pos = self._biblio(start, after, name)
        elif name == "addmetaproperty":
            self.pos = self._addmetaproperty(start, after)
        elif name == "uri":
            _, markup, end = self._uri(start)
            self.edits.append(_Edit(start, end, EditKind.REPLACE, markup))
            self.pos = end
        else:
            self.pos = after

    def _skip_verbatim(self, start: int, after: int) -> int:
        match = _VERBATIM_BEGIN.match(self.text, after)
        if match is None:
            return after
        closing = f"\\end{{{match.group(1)}}}"
        found = self.text.find(closing, match.end())
        if found == -1:
            raise MalformedCommandError(start, "begin", f"falta {closing}")
        return found + len(closing)

    def _skip_verb(self, start: int, after: int) -> int:
        pos = after + 1 if self.text.startswith("*", after) else after
        if pos >= len(self.text):
            raise MalformedCommandError(start, "verb", "falta el delimitador")
        found = self.text.find(self.text[pos], pos + 1)
        if found == -1:
            raise MalformedCommandError(start, "verb", "falta el delimitador de cierre")
        return found + 1

    def _contribution_ids(self, raw: str | None, start: int, command: str) -> tuple[str, ...]:
        if raw is None:
            return ("1",)
        ids = tuple(part.strip() for part in raw.split(","))
        if not all(ids):
            raise MalformedCommandError(start, command, f"identificador vacío en [{raw}]")
        return ids

    def _property(self, start: int, after: int, name: str) -> int:
        starred, pos = self._read_star(after)
        raw_ids, pos = self._read_optional(pos, start, name)
        contributions = self._contribution_ids(raw_ids, start, name)

        if name == "contribution":
            n_begin, n_end, pos = self._read_group(pos, start, name)
            qualified = self.text[n_begin:n_end].strip()
            try:
                kind = PropertyKind.from_qualified(qualified)
            except ValidationError as exc:
                raise MalformedCommandError(
                    start, name, f"nombre de propiedad inválido {qualified!r}"
                ) from exc
        else:
            kind = PropertyKind.of(MandatoryKind(name))

        v_begin, v_end, end = self._read_group(pos, start, name)
        fragment = self._walk(v_begin, v_end, allow_uri=True)
        value = fragment.plain
        if fragment.link is not None:
            value = fragment.link.label or fragment.link.uri

        self.annotations.append(
            PropertyAnnotation(
                kind=kind,
                value=value,
                contributions=contributions,
                visible=not starred,
                link=fragment.link,
                span=(start, end),
            )
        )
        if starred:
            self.edits.append(_Edit(start, end, EditKind.REMOVE_INLINE))
        else:
            self.edits.append(_Edit(start, end, EditKind.REPLACE, fragment.rendered))
        return end

    def _biblio(self, start: int, after: int, name: str) -> int:
        begin, stop, end = self._read_group(after, start, name)
        value = self._walk(begin, stop, allow_uri=False).plain

        if name == "metaauthor":
            self.authors.append(value)
        elif name == "metatitle":
            if self.title is None:
                self.title = value
            else:
                self.duplicates.append((name, start))
        elif self.research_field is None:
            self.research_field = value
        else:
            self.duplicates.append((name, start))

        self.edits.append(_Edit(start, end, EditKind.REPLACE, self.text[begin:stop]))
        return end

    def _addmetaproperty(self, start: int, after: int) -> int:
        command = "addmetaproperty"
        raw, pos = self._read_optional(after, start, command)
        if raw is None:
            raise MalformedCommandError(start, command, "falta [abreviatura, URI]")
        n_begin, n_end, end = self._read_group(pos, start, command, verbatim=True)
        prop = self.text[n_begin:n_end].strip()
        if not NAME_PATTERN.match(prop):
            raise MalformedCommandError(start, command, f"nombre de propiedad inválido {prop!r}")

        first, sep, rest = raw.partition(",")
        abbreviation, uri = (first.strip() or None, rest.strip()) if sep else (None, first.strip())
        if abbreviation is not None and not NAME_PATTERN.match(abbreviation):
            raise MalformedCommandError(start, command, f"abreviatura inválida {abbreviation!r}")

        for known in self.namespaces:
            if abbreviation is not None and known.abbreviation == abbreviation and known.uri != uri:
                raise DuplicateNamespaceConflictError(abbreviation, (known.uri, uri))

        try:
            decl = NamespaceDecl(abbreviation=abbreviation, uri=uri, property=prop)
        except ValidationError as exc:
            raise MalformedCommandError(start, command, f"URI inválida {uri!r}") from exc
        if decl not in self.namespaces:
            self.namespaces.append(decl)

        self.edits.append(_Edit(start, end, EditKind.REMOVE_LINE))
        return end


def parse_source(src: SourceDocument) -> AnnotationDocument:
    """
    Analiza la fuente LaTeX y devuelve sus anotaciones.

    Args:
        src: Fuente a analizar

    Returns:
        AnnotationDocument: Anotaciones en orden de aparición

    Raises:
        UnbalancedBracesError: Si las llaves no están balanceadas
        MalformedCommandError: Si un comando no tiene la forma esperada
        DuplicateNamespaceConflictError: Si una abreviatura se registra con dos URIs
    """
    doc = _Scanner(src.text).run().document()
    logger.debug(
        "%s: %d anotaciones, %d namespaces", src.origin, len(doc.annotations), len(doc.namespaces)
    )
    return doc


def strip_annotations(src: SourceDocument, doc: AnnotationDocument) -> str:
    """
    Produce la fuente sin el marcado del paquete.
    Las anotaciones visibles quedan como su texto, las invisibles desaparecen.

    Raises:
        SpanMismatchError: Si doc no se obtuvo de esta fuente
    """
    if doc.source_digest != AnnotationDocument.digest(src.text):
        raise SpanMismatchError()

    text = src.text
    scanner = _Scanner(text).run()
    out: list[str] = []
    cursor = 0

    for edit in scanner.edits:
        if edit.kind is EditKind.REPLACE:
            out.append(text[cursor : edit.start])
            out.append(edit.replacement)
            cursor = edit.end
            continue

        if edit.kind is EditKind.REMOVE_LINE:
            line_start = text.rfind("\n", 0, edit.start) + 1
            line_end = text.find("\n", edit.end)
            line_end = len(text) if line_end == -1 else line_end + 1
            if (
                line_start >= cursor
                and not text[line_start : edit.start].strip()
                and not text[edit.end : line_end].strip()
            ):
                out.append(text[cursor:line_start])
                cursor = line_end
                continue

        out.append(text[cursor : edit.start])
        cursor = _remove_inline(text, out, edit.end)

    out.append(text[cursor:])
    return "".join(out)


def _last_char(out: list[str]) -> str:
    while out and not out[-1]:
        out.pop()
    return out[-1][-1] if out else ""


def _remove_inline(text: str, out: list[str], end: int) -> int:
    """
    Elimina un comando invisible dejando un único espacio entre las palabras vecinas.
    Devuelve la nueva posición de lectura.
    """
    after = end
    while after < len(text) and text[after] in _INLINE_SPACE:
        after += 1
    if after == end:
        return end

    last = _last_char(out)
    if not last or last == "\n":
        return after
    if last in _INLINE_SPACE:
        while out and not out[-1].strip(_INLINE_SPACE):
            out.pop()
        if out:
            out[-1] = out[-1].rstrip(_INLINE_SPACE)
        out.append(" ")
        return after
    return end


def read_source(path: str | Path | None) -> SourceDocument:
    """
    Lee un archivo de texto UTF-8, o la entrada estándar si path es None o '-'.
    """
    if path is None or str(path) == "-":
        return SourceDocument(text=sys.stdin.read(), origin="<stdin>")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} no es texto UTF-8 válido") from exc
    return SourceDocument(text=text, origin=str(path))

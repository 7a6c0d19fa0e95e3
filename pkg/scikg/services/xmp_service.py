import logging
import re
from itertools import count

from lxml import etree
from pydantic import ValidationError

from scikg.config import settings
from scikg.errors import MalformedPacketError, NotSciKGError, UnresolvedPrefixError
from scikg.models.annotation import (
    MANDATORY_COMMANDS,
    AnnotationDocument,
    Bibliographic,
    EntityLink,
    MandatoryKind,
    NamespaceDecl,
    PropertyAnnotation,
    PropertyKind,
)
from scikg.models.xmp import XPACKET_BEGIN, XPACKET_END, XmpPacket, xml_parser

logger = logging.getLogger(__name__)

XMP_NS_X = "adobe:ns:meta/"
XMP_NS_RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XMP_NS_DC = "http://purl.org/dc/elements/1.1/"

XMP_TOOLKIT = "SciKGTeX"
RESERVED_PREFIXES = frozenset({"x", "rdf", "dc", "xml", "xmlns"})

# Caracteres no permitidos en XML 1.0
_XML_ILLEGAL = re.compile(r"[^\x09\x0A\x0D\x20-\uD7FF\uE000-\uFFFD\U00010000-\U0010FFFF]")


def _q(namespace: str, local: str) -> str:
    return f"{{{namespace}}}{local}"


def _clean(text: str) -> str:
    return _XML_ILLEGAL.sub("", text)


def _allocate_prefixes(
    doc: AnnotationDocument, used_uris: list[str], toolkit_uri: str, toolkit_prefix: str
) -> dict[str, str]:
    """
    Asigna un prefijo XML a cada URI usada.
    Se prefiere la abreviatura declarada; si no sirve se usa ns1, ns2, ...
    """
    prefixes = {XMP_NS_DC: "dc", XMP_NS_RDF: "rdf", toolkit_uri: toolkit_prefix}
    taken = set(prefixes.values()) | RESERVED_PREFIXES
    generated = count(1)

    for uri in used_uris:
        if uri in prefixes:
            continue
        candidate = next(
            (d.abbreviation for d in doc.namespaces if d.uri == uri and d.abbreviation), None
        )
        if (
            candidate is None
            or candidate in taken
            or "." in candidate
            or candidate.lower().startswith("xml")
        ):
            candidate = next(f"ns{n}" for n in generated if f"ns{n}" not in taken)
        prefixes[uri] = candidate
        taken.add(candidate)
    return prefixes


def serialize_xmp(
    doc: AnnotationDocument,
    namespace_uri: str | None = None,
    prefix: str | None = None,
) -> XmpPacket:
    """
    Serializa el documento como paquete XMP (RDF/XML) en forma canónica.

    Args:
        doc: Documento de anotaciones
        namespace_uri: Namespace del paquete (por defecto el de la configuración)
        prefix: Prefijo XML de ese namespace

    Returns:
        XmpPacket: Bytes idénticos para documentos iguales

    Raises:
        UnresolvedPrefixError: Si una propiedad usa un prefijo no registrado
    """
    toolkit_uri = namespace_uri or settings.toolkit_namespace_uri
    toolkit_prefix = prefix or settings.toolkit_prefix

    uris: list[str] = []
    for annotation in doc.annotations:
        uri = doc.namespace_uri_for(annotation.kind, toolkit_uri)
        if uri is None:
            raise UnresolvedPrefixError(annotation.kind.prefix)
        uris.append(uri)

    prefixes = _allocate_prefixes(doc, uris, toolkit_uri, toolkit_prefix)
    nsmap = dict(sorted((p, uri) for uri, p in prefixes.items()))

    root = etree.Element(_q(XMP_NS_X, "xmpmeta"), nsmap={"x": XMP_NS_X})
    root.set(_q(XMP_NS_X, "xmptk"), XMP_TOOLKIT)
    rdf = etree.SubElement(root, _q(XMP_NS_RDF, "RDF"), nsmap=nsmap)
    description = etree.SubElement(rdf, _q(XMP_NS_RDF, "Description"))
    description.set(_q(XMP_NS_RDF, "about"), "")

    # Metadatos bibliográficos
    biblio = doc.biblio
    if biblio.title is not None:
        etree.SubElement(description, _q(XMP_NS_DC, "title")).text = _clean(biblio.title)
    if biblio.authors:
        creator = etree.SubElement(description, _q(XMP_NS_DC, "creator"))
        seq = etree.SubElement(creator, _q(XMP_NS_RDF, "Seq"))
        for author in biblio.authors:
            etree.SubElement(seq, _q(XMP_NS_RDF, "li")).text = _clean(author)
    if biblio.research_field is not None:
        field = etree.SubElement(description, _q(toolkit_uri, "researchfield"))
        field.text = _clean(biblio.research_field)

    # Un nodo por contribución, con sus propiedades en orden de aparición
    groups: dict[str, list[tuple[int, PropertyAnnotation, str]]] = {}
    for position, (annotation, uri) in enumerate(zip(doc.annotations, uris, strict=True)):
        for cid in annotation.contributions:
            groups.setdefault(cid, []).append((position, annotation, uri))

    if groups:
        container = etree.SubElement(description, _q(toolkit_uri, "contributions"))
        seq = etree.SubElement(container, _q(XMP_NS_RDF, "Seq"))
        for cid in sorted(groups):
            item = etree.SubElement(seq, _q(XMP_NS_RDF, "li"))
            node = etree.SubElement(item, _q(XMP_NS_RDF, "Description"))
            node.set(_q(toolkit_uri, "contribution"), cid)
            for position, annotation, uri in groups[cid]:
                element = etree.SubElement(node, _q(uri, annotation.kind.local_name))
                element.set(_q(toolkit_uri, "position"), str(position))
                if annotation.kind.prefix is not None:
                    element.set(_q(toolkit_uri, "prefix"), annotation.kind.prefix)
                link = annotation.link
                if link is not None:
                    element.set(_q(XMP_NS_RDF, "resource"), link.uri)
                    if link.label is not None:
                        element.text = _clean(annotation.value)
                else:
                    element.text = _clean(annotation.value)

    if doc.namespaces:
        container = etree.SubElement(description, _q(toolkit_uri, "namespaces"))
        seq = etree.SubElement(container, _q(XMP_NS_RDF, "Seq"))
        for decl in doc.namespaces:
            item = etree.SubElement(seq, _q(XMP_NS_RDF, "li"))
            node = etree.SubElement(item, _q(XMP_NS_RDF, "Description"))
            if decl.abbreviation is not None:
                node.set(_q(toolkit_uri, "abbreviation"), decl.abbreviation)
            node.set(_q(toolkit_uri, "property"), decl.property)
            node.set(_q(toolkit_uri, "uri"), decl.uri)

    etree.indent(root, space="  ")
    body = etree.tostring(root, encoding="utf-8", xml_declaration=False)
    data = XPACKET_BEGIN + b"\n" + body + b"\n" + XPACKET_END

    namespaces = dict(sorted({"x": XMP_NS_X, **nsmap}.items()))
    return XmpPacket(data=data, namespaces=namespaces)


def _text(element: etree._Element) -> str:
    return (element.text or "").strip()


def _items(container: etree._Element) -> list[etree._Element]:
    """
    Elementos rdf:li de un contenedor rdf:Seq / rdf:Bag / rdf:Alt.
    """
    items: list[etree._Element] = []
    for kind in ("Seq", "Bag", "Alt"):
        for collection in container.findall(_q(XMP_NS_RDF, kind)):
            items.extend(collection.findall(_q(XMP_NS_RDF, "li")))
    return items


def _nodes(container: etree._Element) -> list[etree._Element]:
    nodes = []
    for item in _items(container):
        node = item.find(_q(XMP_NS_RDF, "Description"))
        nodes.append(node if node is not None else item)
    return nodes


def _kind_for(
    uri: str,
    local: str,
    namespaces: list[NamespaceDecl],
    toolkit_uri: str,
    prefix: str | None = None,
) -> PropertyKind | None:
    """
    Recupera el tipo de propiedad a partir del nombre XML del elemento
    y de su atributo toolkit:prefix. None para elementos ajenos al paquete.
    """
    if prefix is not None:
        return PropertyKind.custom(local, prefix)
    if uri == toolkit_uri and local in MANDATORY_COMMANDS:
        return PropertyKind.of(MandatoryKind(local))
    if uri == toolkit_uri or any(
        d.abbreviation is None and d.uri == uri and d.property == local for d in namespaces
    ):
        return PropertyKind.custom(local)

    # Paquetes sin toolkit:prefix: se deduce de las declaraciones
    matching = [d for d in namespaces if d.uri == uri and d.abbreviation is not None]
    for decl in matching:
        if decl.property == local:
            return PropertyKind.custom(local, decl.abbreviation)
    if matching:
        return PropertyKind.custom(local, matching[0].abbreviation)
    return None


def parse_xmp(packet: XmpPacket | bytes, namespace_uri: str | None = None) -> AnnotationDocument:
    """
    Reconstruye el documento de anotaciones a partir de un paquete XMP.
    Los elementos de namespaces ajenos se ignoran.

    Raises:
        MalformedPacketError: Si el XML es inválido o falta rdf:RDF
        NotSciKGError: Si el paquete no usa el namespace de la herramienta
    """
    toolkit_uri = namespace_uri or settings.toolkit_namespace_uri
    data = packet.data if isinstance(packet, XmpPacket) else packet

    try:
        root = etree.fromstring(data.strip(), parser=xml_parser())
    except (etree.XMLSyntaxError, ValueError) as exc:
        raise MalformedPacketError(str(exc) or "documento vacío") from exc

    rdf = root if root.tag == _q(XMP_NS_RDF, "RDF") else root.find(f".//{_q(XMP_NS_RDF, 'RDF')}")
    if rdf is None:
        raise MalformedPacketError("falta el elemento rdf:RDF")

    if not any(toolkit_uri in el.nsmap.values() for el in root.iter(tag=etree.Element)):
        raise NotSciKGError()

    descriptions = rdf.findall(_q(XMP_NS_RDF, "Description"))

    # Primero los namespaces, porque determinan el tipo de las propiedades propias
    namespaces: list[NamespaceDecl] = []
    for description in descriptions:
        for container in description.findall(_q(toolkit_uri, "namespaces")):
            for node in _nodes(container):
                try:
                    decl = NamespaceDecl(
                        abbreviation=node.get(_q(toolkit_uri, "abbreviation")),
                        uri=node.get(_q(toolkit_uri, "uri"), ""),
                        property=node.get(_q(toolkit_uri, "property"), ""),
                    )
                except ValidationError as exc:
                    raise MalformedPacketError(f"namespace inválido: {exc}") from exc
                if decl not in namespaces:
                    namespaces.append(decl)

    title: str | None = None
    authors: list[str] = []
    research_field: str | None = None
    # clave de orden -> [tipo, valor, enlace, contribuciones]
    collected: dict[tuple[int, int], list] = {}
    auto = count()

    for description in descriptions:
        for child in description:
            if not isinstance(child.tag, str):
                continue
            if child.tag == _q(XMP_NS_DC, "title"):
                alternatives = _items(child)
                title = _text(alternatives[0]) if alternatives else _text(child)
            elif child.tag == _q(XMP_NS_DC, "creator"):
                authors.extend(_text(item) for item in _items(child))
            elif child.tag == _q(toolkit_uri, "researchfield"):
                research_field = _text(child)
            elif child.tag == _q(toolkit_uri, "contributions"):
                for node in _nodes(child):
                    cid = node.get(_q(toolkit_uri, "contribution"))
                    if not cid:
                        raise MalformedPacketError("contribución sin identificador")
                    _collect_properties(node, cid, namespaces, toolkit_uri, collected, auto)

    try:
        annotations = tuple(
            PropertyAnnotation(kind=kind, value=value, link=link, contributions=tuple(cids))
            for _, (kind, value, link, cids) in sorted(collected.items())
        )
        return AnnotationDocument(
            annotations=annotations,
            namespaces=tuple(namespaces),
            biblio=Bibliographic(title=title, authors=tuple(authors), research_field=research_field),
        )
    except ValidationError as exc:
        raise MalformedPacketError(str(exc)) from exc


def _collect_properties(
    node: etree._Element,
    cid: str,
    namespaces: list[NamespaceDecl],
    toolkit_uri: str,
    collected: dict[tuple[int, int], list],
    auto: count,
) -> None:
    for element in node:
        if not isinstance(element.tag, str):
            continue
        qname = etree.QName(element)
        try:
            kind = _kind_for(
                qname.namespace or "",
                qname.localname,
                namespaces,
                toolkit_uri,
                element.get(_q(toolkit_uri, "prefix")),
            )
        except ValidationError:
            kind = None
        if kind is None:
            logger.debug("Elemento ignorado en el paquete XMP: %s", element.tag)
            continue

        raw_position = element.get(_q(toolkit_uri, "position"))
        if raw_position is None:
            key = (1, next(auto))
        elif raw_position.isdigit():
            key = (0, int(raw_position))
        else:
            raise MalformedPacketError(f"posición inválida {raw_position!r}")

        if key in collected:
            collected[key][3].append(cid)
            continue

        value = _text(element)
        link = None
        resource = element.get(_q(XMP_NS_RDF, "resource"))
        if resource is not None:
            try:
                link = EntityLink(uri=resource, label=value or None)
            except ValidationError as exc:
                raise MalformedPacketError(f"rdf:resource inválido {resource!r}") from exc
            value = value or resource
        collected[key] = [kind, value, link, [cid]]


from io import BytesIO

import httpx
import pytest
from fastapi.testclient import TestClient
from pypdf import PdfWriter
from pypdf.filters import FlateDecode
from pypdf.generic import PdfObject

from scikg.database import GraphStore
from scikg.main import create_app
from scikg.services.graph_client import GraphClient
from scikg.services.pdf_service import load_pdf

# Corpus de fuentes anotadas

LISTING_ENTITY_LINK = (
    "The role of \\researchproblem{\\uri{https://www.orkg.org/orkg/resource/R12259}"
    "{antibiotic therapy}} in managing acute bacterial sinusitis (ABS) in children "
    "is controversial...\n"
)

LISTING_BIBLIO = (
    "\\title{\\metatitle{Effectiveness of Amoxicillin/Clavulanate Potassium in the "
    "Treatment of Acute Bacterial Sinusitis in Children.}}\n"
    "\\author{\\metaauthor{Ellen R. Wald} \\and \\metaauthor{David Nash} \\and "
    "\\metaauthor{Jens Eickhoff}}\n"
    "\\researchfield{pharmacology}\n"
)

LISTING_CUSTOM = (
    "\\addmetaproperty[amo, http://purl.org/spar/amo#]{claim}\n"
    "\\addmetaproperty[patent, https://other.type/of/ontology]{claim}\n"
    "...\\contribution{amo:claim}{The earth is round}.\n"
    "Our patent has the following claim:\n"
    "\\contribution{patent:claim}{An apparatus to achieve something new.}...\n"
)

LISTING_INVISIBLE = (
    "...the p-value was 0.01\\% higher \\contribution*{p-value}{0.06} "
    "than in the earlier experiment...\n"
)

SAMPLE_ABSTRACT = (
    "\\title{\\metatitle{Amoxicillin for acute sinusitis in children}}\n"
    "\\author{\\metaauthor{Ellen R. Wald} \\and \\metaauthor{David Nash}}\n"
    "\\researchfield{pharmacology}\n"
    "\\addmetaproperty[amo, http://purl.org/spar/amo#]{claim}\n"
    "The role of \\researchproblem{\\uri{https://www.orkg.org/orkg/resource/R12259}"
    "{antibiotic therapy}} is controversial. We aim to \\objective{compare amoxicillin "
    "with placebo} using a \\method[1,2]{randomized controlled trial}. "
    "Cure rates were \\result{50\\% vs 14\\%} and "
    "\\contribution*{p-value}{0.01}. \\conclusion{Amoxicillin is effective}. "
    "\\contribution[2]{amo:claim}{\\uri{http://example.org/entity/sinusitis}{Sinusitis} "
    "resolves faster}.\n"
)


@pytest.fixture
def listing_sources():
    return {
        "entity_link": LISTING_ENTITY_LINK,
        "biblio": LISTING_BIBLIO,
        "custom": LISTING_CUSTOM,
        "invisible": LISTING_INVISIBLE,
        "abstract": SAMPLE_ABSTRACT,
    }


# PDFs construidos a mano

PDF_HEADER = b"%PDF-1.7\n%\xe2\xe3\xcf\xd3\n"
PAGE_CONTENT = b"BT /F1 12 Tf 72 712 Td (Hello) Tj ET"

BASE_OBJECTS = {
    1: b"<< /Type /Catalog /Pages 2 0 R >>",
    2: b"<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
    3: b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Contents 4 0 R >>",
    4: b"<< /Length %d >>\nstream\n" % len(PAGE_CONTENT) + PAGE_CONTENT + b"\nendstream",
    5: b"<< /Title (Sample \\(draft\\)) /Producer (hand) >>",
}

FILE_ID = b"[<0123456789abcdef0123456789abcdef> <0123456789abcdef0123456789abcdef>]"

FOREIGN_XMP = (
    b'<?xpacket begin="\xef\xbb\xbf" id="W5M0MpCehiHzreSzNTczkc9d"?>\n'
    b'<x:xmpmeta xmlns:x="adobe:ns:meta/">\n'
    b'  <rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#" '
    b'xmlns:dc="http://purl.org/dc/elements/1.1/" '
    b'xmlns:pdfaid="http://www.aiim.org/pdfa/ns/id/">\n'
    b'    <rdf:Description rdf:about="" pdfaid:part="2" pdfaid:conformance="B">\n'
    b"      <dc:title><rdf:Alt><rdf:li xml:lang=\"x-default\">Sample</rdf:li></rdf:Alt></dc:title>\n"
    b"    </rdf:Description>\n"
    b"  </rdf:RDF>\n"
    b"</x:xmpmeta>\n"
    b'<?xpacket end="w"?>'
)


def assemble_pdf(objects: dict[int, bytes], trailer_extra: bytes = b"") -> bytes:
    """
    PDF con tabla xref clásica. Los números ausentes quedan como entradas libres.
    """
    out = bytearray(PDF_HEADER)
    offsets: dict[int, int] = {}
    for num, body in sorted(objects.items()):
        offsets[num] = len(out)
        out += b"%d 0 obj\n" % num + body + b"\nendobj\n"

    size = max(offsets) + 1
    xref = len(out)
    out += b"xref\n0 %d\n" % size
    for num in range(size):
        if num in offsets:
            out += b"%010d 00000 n\r\n" % offsets[num]
        else:
            out += b"0000000000 65535 f\r\n"
    out += b"trailer\n<< /Size %d /Root 1 0 R " % size + trailer_extra + b" >>\n"
    out += b"startxref\n%d\n%%%%EOF\n" % xref
    return bytes(out)


def _png_up(rows: list[bytes]) -> bytes:
    # Predictor PNG "Up" (tipo 2) por fila
    out = bytearray()
    previous = bytes(len(rows[0]))
    for row in rows:
        out.append(2)
        out += bytes((b - p) & 0xFF for b, p in zip(row, previous, strict=True))
        previous = row
    return bytes(out)


def assemble_xref_stream_pdf() -> bytes:
    """
    PDF 1.5 con catálogo, páginas y página dentro de un object stream comprimido
    y un stream de referencias con predictor PNG.
    """
    compressed = {n: BASE_OBJECTS[n] for n in (1, 2, 3)}
    header_parts: list[bytes] = []
    body = bytearray()
    for num, obj in compressed.items():
        header_parts.append(b"%d %d" % (num, len(body)))
        body += obj + b"\n"
    header = b" ".join(header_parts) + b"\n"
    objstm_data = FlateDecode.encode(header + bytes(body))

    out = bytearray(b"%PDF-1.5\n%\xe2\xe3\xcf\xd3\n")
    offsets: dict[int, int] = {}
    offsets[4] = len(out)
    out += b"4 0 obj\n" + BASE_OBJECTS[4] + b"\nendobj\n"
    offsets[5] = len(out)
    out += (
        b"5 0 obj\n<< /Type /ObjStm /N 3 /First %d /Filter /FlateDecode /Length %d >>\nstream\n"
        % (len(header), len(objstm_data))
        + objstm_data
        + b"\nendstream\nendobj\n"
    )
    offsets[6] = len(out)

    rows = [bytes([0]) + (0).to_bytes(4, "big") + (65535).to_bytes(2, "big")]
    for index, num in enumerate((1, 2, 3)):
        rows.append(bytes([2]) + (5).to_bytes(4, "big") + index.to_bytes(2, "big"))
    for num in (4, 5, 6):
        rows.append(bytes([1]) + offsets[num].to_bytes(4, "big") + (0).to_bytes(2, "big"))
    xref_data = FlateDecode.encode(_png_up(rows))

    out += (
        b"6 0 obj\n<< /Type /XRef /Size 7 /W [1 4 2] /Root 1 0 R /ID "
        + FILE_ID
        + b" /Filter /FlateDecode /DecodeParms << /Predictor 12 /Columns 7 >> /Length %d >>\nstream\n"
        % len(xref_data)
        + xref_data
        + b"\nendstream\nendobj\n"
    )
    out += b"startxref\n%d\n%%%%EOF\n" % offsets[6]
    return bytes(out)


def assemble_hybrid_pdf() -> bytes:
    """
    PDF híbrido: la tabla clásica marca el catálogo como libre y el stream
    /XRefStm lo sitúa dentro de un object stream sin comprimir.
    """
    header = b"1 0\n"
    objstm_data = header + BASE_OBJECTS[1] + b"\n"

    out = bytearray(b"%PDF-1.5\n%\xe2\xe3\xcf\xd3\n")
    offsets: dict[int, int] = {}
    for num in (2, 3, 4):
        offsets[num] = len(out)
        out += b"%d 0 obj\n" % num + BASE_OBJECTS[num] + b"\nendobj\n"
    offsets[5] = len(out)
    out += (
        b"5 0 obj\n<< /Type /ObjStm /N 1 /First %d /Length %d >>\nstream\n"
        % (len(header), len(objstm_data))
        + objstm_data
        + b"\nendstream\nendobj\n"
    )

    # Tipo 2: objeto 1 en el object stream 5, índice 0
    entry = bytes([2]) + (5).to_bytes(2, "big") + bytes([0])
    offsets[6] = len(out)
    out += (
        b"6 0 obj\n<< /Type /XRef /Size 7 /W [1 2 1] /Index [1 1] /Length %d >>\nstream\n"
        % len(entry)
        + entry
        + b"\nendstream\nendobj\n"
    )

    xref = len(out)
    out += b"xref\n0 7\n"
    for num in range(7):
        if num in offsets:
            out += b"%010d 00000 n\r\n" % offsets[num]
        else:
            out += b"0000000000 65535 f\r\n"
    out += b"trailer\n<< /Size 7 /Root 1 0 R /XRefStm %d >>\n" % offsets[6]
    out += b"startxref\n%d\n%%%%EOF\n" % xref
    return bytes(out)


def serialized(obj: PdfObject) -> bytes:
    out = BytesIO()
    obj.write_to_stream(out)
    return out.getvalue()


def assert_incremental(original: bytes, updated: bytes) -> None:
    """
    Los bytes originales son prefijo y una lectura independiente de la salida
    encuentra todos los objetos previos sin cambios.
    """
    assert len(updated) > len(original)
    assert updated.startswith(original)
    before = load_pdf(original)
    after = load_pdf(updated)
    for ref, obj in before.objects.items():
        if ref == before.catalog_ref:
            continue
        assert ref in after.objects
        assert serialized(after.objects[ref]) == serialized(obj)


@pytest.fixture(scope="session")
def minimal_pdf() -> bytes:
    return assemble_pdf(BASE_OBJECTS, b"/Info 5 0 R /ID " + FILE_ID)


@pytest.fixture(scope="session")
def xref_stream_pdf() -> bytes:
    return assemble_xref_stream_pdf()


@pytest.fixture(scope="session")
def hybrid_pdf() -> bytes:
    return assemble_hybrid_pdf()


@pytest.fixture(scope="session")
def foreign_metadata_pdf() -> bytes:
    """
    PDF/A con un paquete XMP ajeno (solo dc:title), comprimido con Flate.
    """
    packed = FlateDecode.encode(FOREIGN_XMP)
    objects = dict(BASE_OBJECTS)
    objects[1] = b"<< /Type /Catalog /Pages 2 0 R /Metadata 6 0 R >>"
    objects[6] = (
        b"<< /Type /Metadata /Subtype /XML /Filter /FlateDecode /Length %d >>\nstream\n"
        % len(packed)
        + packed
        + b"\nendstream"
    )
    return assemble_pdf(objects, b"/Info 5 0 R")


@pytest.fixture(scope="session")
def encrypted_pdf() -> bytes:
    """
    PDF cifrado con RC4 por pypdf, con contraseña de usuario.
    """
    writer = PdfWriter()
    writer.add_blank_page(width=612, height=792)
    writer.encrypt(user_password="secret", owner_password="owner", algorithm="RC4-128")
    out = BytesIO()
    writer.write(out)
    return out.getvalue()


# Grafo simulado


@pytest.fixture
def store():
    return GraphStore()


@pytest.fixture
def client(store):
    """
    Cliente de prueba para el grafo simulado.
    """
    with TestClient(create_app(store)) as test_client:
        yield test_client


@pytest.fixture
async def graph_client(store):
    """
    GraphClient conectado en proceso a la aplicación ASGI.
    """
    transport = httpx.ASGITransport(app=create_app(store))
    async with GraphClient("http://mockgraph", transport=transport) as graph:
        yield graph

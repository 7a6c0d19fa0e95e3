import json

import pytest

from scikg import __version__
from scikg.cli import run
from scikg.server import serve
from scikg.services.pdf_service import extract_metadata, load_pdf
from tests.conftest import SAMPLE_ABSTRACT


@pytest.fixture
def tex(tmp_path):
    path = tmp_path / "paper.tex"
    path.write_text(SAMPLE_ABSTRACT, encoding="utf-8")
    return path


@pytest.fixture
def pdf(tmp_path, minimal_pdf):
    path = tmp_path / "paper.pdf"
    path.write_bytes(minimal_pdf)
    return path


class TestCheck:
    """
    Tests del subcomando check.
    """

    def test_empty_file_warns_five_times(self, tmp_path, capsys):
        empty = tmp_path / "empty.tex"
        empty.write_text("", encoding="utf-8")
        assert run(["check", str(empty)]) == 0

        captured = capsys.readouterr()
        warnings = captured.err.strip().splitlines()
        assert len(warnings) == 5
        assert all(line.startswith("SciKGTeX Warning:") for line in warnings)
        assert "0 anotaciones" in captured.out

    def test_complete_file(self, tex, capsys):
        assert run(["check", str(tex)]) == 0
        captured = capsys.readouterr()
        assert captured.err == ""
        assert "7 anotaciones, 1 namespaces, 0 avisos" in captured.out


class TestOutputs:
    """
    Tests de strip, xmp y embed.
    """

    def test_strip_to_file(self, tex, tmp_path):
        output = tmp_path / "clean.tex"
        assert run(["strip", str(tex), "-o", str(output)]) == 0
        text = output.read_text(encoding="utf-8")
        assert "\\metatitle" not in text
        assert "0.01" not in text
        assert "\\href{https://www.orkg.org/orkg/resource/R12259}{antibiotic therapy}" in text

    def test_strip_to_stdout(self, tex, capsys):
        assert run(["strip", str(tex)]) == 0
        assert "randomized controlled trial" in capsys.readouterr().out

    def test_xmp_sidecar(self, tex, capsys):
        assert run(["xmp", str(tex)]) == 0
        sidecar = tex.with_suffix(".xmp")
        assert sidecar.read_bytes().startswith(b"<?xpacket begin=")
        assert capsys.readouterr().out.strip() == str(sidecar)

    def test_embed_and_extract(self, tex, pdf, capsys, minimal_pdf):
        assert run(["embed", str(tex), str(pdf)]) == 0
        output = pdf.with_name("paper_annotated.pdf")
        lines = capsys.readouterr().out.split()
        assert lines == [str(output), str(output.with_suffix(".xmp"))]

        data = output.read_bytes()
        assert data.startswith(minimal_pdf)
        assert extract_metadata(data).data == output.with_suffix(".xmp").read_bytes()

        extracted = output.with_name("extracted.xmp")
        assert run(["extract", str(output), "-o", str(extracted)]) == 0
        assert extracted.read_bytes() == output.with_suffix(".xmp").read_bytes()

    def test_embed_pdfa(self, tex, pdf, tmp_path):
        output = tmp_path / "out.pdf"
        assert run(["embed", "--pdfa", str(tex), str(pdf), "-o", str(output)]) == 0
        doc = load_pdf(output.read_bytes())
        assert "/SciKGMetadata" in doc.catalog
        assert "/Metadata" not in doc.catalog

    def test_extract_plain_pdf(self, pdf, capsys):
        assert run(["extract", str(pdf)]) == 0
        assert capsys.readouterr().out.strip() == f"{pdf}: no toolkit metadata"


class TestExitCodes:
    """
    Tests de los códigos de salida.
    """

    def test_version(self, capsys):
        assert run(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_usage_error(self, capsys):
        assert run(["embed", "only-one-argument.tex"]) == 1
        assert run(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run(["check", str(tmp_path / "missing.tex")]) == 1

    def test_parse_error(self, tmp_path, capsys):
        broken = tmp_path / "broken.tex"
        broken.write_text("\\method{x", encoding="utf-8")
        assert run(["check", str(broken)]) == 2
        assert "posición 7" in capsys.readouterr().err

    def test_not_a_pdf(self, tex, tmp_path):
        fake = tmp_path / "fake.pdf"
        fake.write_bytes(b"not a pdf")
        assert run(["embed", str(tex), str(fake)]) == 3

    def test_invalid_namespace_uri(self, tex):
        assert run(["--namespace-uri", "relative/path", "xmp", str(tex)]) == 1

    def test_unreachable_graph(self, tex, pdf, tmp_path):
        output = tmp_path / "out.pdf"
        assert run(["embed", str(tex), str(pdf), "-o", str(output)]) == 0
        with serve("127.0.0.1:0") as server:
            url = server.url
        assert run(["--graph-url", url, "upload", str(output)]) == 4


class TestUpload:
    """
    Tests de upload contra el grafo simulado en un hilo.
    """

    def test_add_then_update(self, tex, pdf, tmp_path, capsys):
        output = tmp_path / "out.pdf"
        assert run(["embed", str(tex), str(pdf), "-o", str(output)]) == 0
        capsys.readouterr()

        with serve("127.0.0.1:0") as server:
            args = ["--graph-url", server.url, "upload", str(output)]
            assert run([*args, "--doi", "10.1000/xyz", "--date", "2022-05-01"]) == 0
            added = json.loads(capsys.readouterr().out)
            assert added["mode"] == "add"
            assert [name for name, _ in added["step_timings"]] == ["extract", "resolve", "upload"]

            paper = server.store.get_paper(added["paper_id"])
            assert paper["doi"] == "10.1000/xyz"
            assert paper["publication_date"] == "2022-05-01"

            assert run([*args, "--update"]) == 0
            updated = json.loads(capsys.readouterr().out)
            assert updated["paper_id"] == added["paper_id"]
            assert len(server.store.papers) == 1

    def test_plain_pdf_is_a_pdf_error(self, pdf):
        with serve("127.0.0.1:0") as server:
            assert run(["--graph-url", server.url, "upload", str(pdf)]) == 3

    def test_invalid_date(self, pdf):
        assert run(["upload", str(pdf), "--date", "yesterday"]) == 1

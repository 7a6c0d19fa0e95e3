import pytest

from scikg.errors import (
    DuplicateNamespaceConflictError,
    MalformedCommandError,
    SpanMismatchError,
    UnbalancedBracesError,
)
from scikg.models.annotation import (
    AnnotationDocument,
    EntityLink,
    MandatoryKind,
    NamespaceDecl,
    PropertyKind,
    SourceDocument,
    WarningCode,
)
from scikg.services.parser_service import parse_source, read_source, strip_annotations
from scikg.services.validation_service import validate


def parse(text: str) -> AnnotationDocument:
    return parse_source(SourceDocument(text=text))


def strip(text: str) -> str:
    src = SourceDocument(text=text)
    return strip_annotations(src, parse_source(src))


class TestListings:
    """
    Tests con los listados de ejemplo.
    """

    def test_entity_link(self, listing_sources):
        doc = parse(listing_sources["entity_link"])
        assert len(doc.annotations) == 1
        annotation = doc.annotations[0]
        assert annotation.kind == PropertyKind.of(MandatoryKind.RESEARCH_PROBLEM)
        assert annotation.value == "antibiotic therapy"
        assert annotation.link == EntityLink(
            uri="https://www.orkg.org/orkg/resource/R12259", label="antibiotic therapy"
        )
        assert annotation.contributions == ("1",)
        assert annotation.visible is True

    def test_bibliographic(self, listing_sources):
        doc = parse(listing_sources["biblio"])
        assert doc.annotations == ()
        assert doc.biblio.title == (
            "Effectiveness of Amoxicillin/Clavulanate Potassium in the Treatment of "
            "Acute Bacterial Sinusitis in Children."
        )
        assert doc.biblio.authors == ("Ellen R. Wald", "David Nash", "Jens Eickhoff")
        assert doc.biblio.research_field == "pharmacology"

    def test_custom_properties(self, listing_sources):
        doc = parse(listing_sources["custom"])
        assert doc.namespaces == (
            NamespaceDecl(abbreviation="amo", uri="http://purl.org/spar/amo#", property="claim"),
            NamespaceDecl(
                abbreviation="patent", uri="https://other.type/of/ontology", property="claim"
            ),
        )
        assert [(str(a.kind), a.value) for a in doc.annotations] == [
            ("amo:claim", "The earth is round"),
            ("patent:claim", "An apparatus to achieve something new."),
        ]

    def test_invisible_markup(self, listing_sources):
        doc = parse(listing_sources["invisible"])
        (annotation,) = doc.annotations
        assert annotation.kind == PropertyKind.custom("p-value")
        assert annotation.value == "0.06"
        assert annotation.visible is False


class TestParseSource:
    """
    Tests del análisis de comandos.
    """

    def test_empty_source(self):
        doc = parse("")
        assert doc.annotations == ()
        assert doc.namespaces == ()
        assert doc.biblio.is_empty

    def test_contribution_without_prefix(self):
        (annotation,) = parse("\\contribution{p-value}{0.05}").annotations
        assert annotation.kind == PropertyKind.custom("p-value")
        assert annotation.value == "0.05"
        assert annotation.visible is True

    def test_contribution_ids(self):
        doc = parse("\\method[1, 2]{X} and \\researchproblem[2]{B}")
        assert doc.annotations[0].contributions == ("1", "2")
        assert doc.annotations[1].contributions == ("2",)

    def test_contribution_with_ids_and_star(self):
        (annotation,) = parse("\\contribution*[3]{accuracy}{0.876}").annotations
        assert annotation.contributions == ("3",)
        assert annotation.visible is False

    def test_spans_start_with_backslash(self, listing_sources):
        text = listing_sources["abstract"]
        doc = parse(text)
        assert doc.annotations
        for annotation in doc.annotations:
            start, end = annotation.span
            assert text[start] == "\\"
            assert text[start:end].endswith("}")

    def test_value_plain_text(self):
        (annotation,) = parse("\\result{  about~50\\%   of \\emph{all}\n cases }").annotations
        assert annotation.value == "about 50\\% of all cases"

    def test_uri_without_label(self):
        (annotation,) = parse("\\method{\\uri{https://orkg.org/resource/R1}}").annotations
        assert annotation.value == "https://orkg.org/resource/R1"
        assert annotation.link == EntityLink(uri="https://orkg.org/resource/R1")

    def test_comments_and_verbatim_ignored(self):
        text = (
            "% \\method{commented}\n"
            "\\begin{verbatim}\\result{verbatim}\\end{verbatim}\n"
            "\\verb|\\objective{inline}|\n"
            "\\conclusion{kept} % \\result{also comment}\n"
        )
        doc = parse(text)
        assert [a.value for a in doc.annotations] == ["kept"]

    def test_duplicate_title_keeps_first(self):
        doc = parse("\\metatitle{A}\n\\metatitle{B}\n")
        assert doc.biblio.title == "A"
        assert doc.duplicates == (("metatitle", 14),)
        codes = [w.code for w in validate(doc)]
        assert WarningCode.DUPLICATE_BIBLIO in codes

    def test_unknown_prefix_is_a_warning(self):
        doc = parse("\\contribution{zz:claim}{x}")
        warnings = [w for w in validate(doc) if w.code is WarningCode.UNKNOWN_PREFIX]
        assert [w.subject for w in warnings] == ["zz"]

    def test_addmetaproperty_without_abbreviation(self):
        doc = parse("\\addmetaproperty[http://stats.example/]{accuracy}")
        assert doc.namespaces == (NamespaceDecl(uri="http://stats.example/", property="accuracy"),)

    def test_identical_declaration_is_deduplicated(self):
        line = "\\addmetaproperty[amo, http://purl.org/spar/amo#]{claim}\n"
        assert len(parse(line + line).namespaces) == 1

    def test_deterministic(self, listing_sources):
        text = listing_sources["abstract"]
        assert parse(text) == parse(text)


class TestParseErrors:
    """
    Tests de los errores del análisis.
    """

    @pytest.mark.parametrize(
        ("text", "position"),
        [("\\method{x", 7), ("a } b", 2), ("{ {", 2)],
    )
    def test_unbalanced_braces(self, text, position):
        with pytest.raises(UnbalancedBracesError) as exc_info:
            parse(text)
        assert exc_info.value.position == position

    def test_missing_argument(self):
        with pytest.raises(MalformedCommandError) as exc_info:
            parse("text \\method without braces")
        assert exc_info.value.command == "method"
        assert exc_info.value.position == 5

    def test_nested_property_rejected(self):
        with pytest.raises(MalformedCommandError):
            parse("\\method{uses \\result{x}}")

    def test_two_uris_rejected(self):
        with pytest.raises(MalformedCommandError):
            parse("\\method{\\uri{http://a.org/}{a} and \\uri{http://b.org/}{b}}")

    def test_relative_uri_rejected(self):
        with pytest.raises(MalformedCommandError):
            parse("\\method{\\uri{resource/R1}{x}}")

    def test_empty_contribution_id(self):
        with pytest.raises(MalformedCommandError):
            parse("\\method[1,]{x}")

    def test_addmetaproperty_requires_bracket(self):
        with pytest.raises(MalformedCommandError):
            parse("\\addmetaproperty{claim}")

    def test_namespace_conflict(self):
        with pytest.raises(DuplicateNamespaceConflictError) as exc_info:
            parse(
                "\\addmetaproperty[amo, http://purl.org/spar/amo#]{claim}\n"
                "\\addmetaproperty[amo, http://other.org/]{claim}\n"
            )
        assert exc_info.value.abbreviation == "amo"


class TestStripAnnotations:
    """
    Tests del texto limpio.
    """

    def test_invisible_removed(self, listing_sources):
        output = strip(listing_sources["invisible"])
        assert output == "...the p-value was 0.01\\% higher than in the earlier experiment...\n"
        assert "0.06" not in output

    def test_entity_link_renders_href(self, listing_sources):
        output = strip(listing_sources["entity_link"])
        assert output.startswith(
            "The role of \\href{https://www.orkg.org/orkg/resource/R12259}{antibiotic therapy} "
            "in managing"
        )

    def test_command_free_identity(self):
        text = "Plain \\textbf{text} with {groups} and 100\\% % a comment\n\nsecond paragraph\n"
        assert strip(text) == text

    def test_biblio_unwrapped_and_addmetaproperty_removed(self, listing_sources):
        output = strip(listing_sources["biblio"] + listing_sources["custom"])
        assert "\\metatitle" not in output
        assert "\\metaauthor{" not in output
        assert "\\title{Effectiveness of" in output
        assert "\\author{Ellen R. Wald \\and David Nash" in output
        assert "\\addmetaproperty" not in output
        assert "...The earth is round.\n" in output

    def test_uri_without_label_renders_url(self):
        assert strip("see \\method{\\uri{http://a.org/x}}.") == "see \\url{http://a.org/x}."

    def test_visible_values_kept_and_starred_dropped(self, listing_sources):
        for text in listing_sources.values():
            src = SourceDocument(text=text)
            doc = parse_source(src)
            output = strip_annotations(src, doc)
            for annotation in doc.annotations:
                start, end = annotation.span
                if annotation.visible and annotation.link is None:
                    assert annotation.value.replace("\\%", "%") in output.replace("\\%", "%")
                elif not annotation.visible:
                    assert text[start:end] not in output

    def test_invisible_collapses_surrounding_spaces(self):
        assert strip("x \t\\contribution*{k}{v}\t y") == "x y"
        assert strip("x\n\\contribution*{k}{v} y") == "x\ny"

    def test_many_consecutive_invisible(self):
        text = "a " + "\\contribution*{k}{v} " * 5000 + "b\n"
        assert strip(text) == "a b\n"

    def test_span_mismatch(self):
        doc = parse("\\method{x}")
        with pytest.raises(SpanMismatchError):
            strip_annotations(SourceDocument(text="\\method{y}"), doc)


class TestReadSource:
    def test_reads_file(self, tmp_path):
        path = tmp_path / "paper.tex"
        path.write_text("\\method{x}", encoding="utf-8")
        src = read_source(path)
        assert src.text == "\\method{x}"
        assert src.origin == str(path)

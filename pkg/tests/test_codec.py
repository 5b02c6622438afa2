import json
import pytest
from datetime import timedelta
from fractions import Fraction

from app.api.codec import (
    dump_document,
    field_from_document,
    field_to_document,
    load_document,
    map_from_document,
    matrix_from_document,
    parse_document,
    series_from_document,
    series_to_document,
)
from app.api.models import FieldDocument, MapDocument, MatrixDocument, OutputFormat, SeriesDocument
from app.core.bialgebra import w1_canonical
from app.core.coefficients import CoeffPoly
from app.core.fields import BiField, VectorField
from app.core.grouppoisson import coordinate
from app.core.series import Series, Truncation
from app.utils.document_generator import DocumentGenerator, block_names, sections
from app.utils.helpers import ProgressTracker
from app.utils.validators import ParseError


@pytest.fixture
def w1_document():
    """Fixture pour le document JSON de u²v - uv²."""
    return {
        "dim": 1,
        "components": [[{
            "nvars": 2,
            "trunc": {"max_total_degree": 8, "min_exponent": [0, 0]},
            "terms": [{"e": [2, 1], "c": "1/1"}, {"e": [1, 2], "c": "-1/1"}],
        }]],
    }


def series_document(terms, nvars=1, order=4):
    return SeriesDocument.model_validate({
        "nvars": nvars,
        "trunc": {"max_total_degree": order, "min_exponent": [0] * nvars},
        "terms": terms,
    })


# --- lecture -------------------------------------------------------------------------------


def test_field_document_matches_w1(w1_document):
    """Test la lecture d'une r-matrice JSON."""
    doc = parse_document(json.dumps(w1_document), FieldDocument)
    phi = field_from_document(doc, BiField)
    assert phi[0, 0] == w1_canonical(1)[0, 0]
    assert phi.is_exact


def test_parse_document_reports_json_position():
    """Test la localisation d'un JSON mal formé."""
    with pytest.raises(ParseError, match="ligne 1"):
        parse_document('{"dim": 1,', FieldDocument, "phi.json")


@pytest.mark.parametrize("value", ["1/0", "0.5", "x"])
def test_rejects_bad_rationals(value):
    """Test le refus d'un coefficient mal écrit."""
    text = json.dumps({
        "nvars": 1,
        "trunc": {"max_total_degree": 4, "min_exponent": [0]},
        "terms": [{"e": [1], "c": value}],
    })
    with pytest.raises(ParseError, match="terms"):
        parse_document(text, SeriesDocument, "f.json")


def test_rejects_repeated_exponent():
    """Test le refus d'un exposant répété."""
    doc = series_document([{"e": [1], "c": "1"}, {"e": [1], "c": "2"}])
    with pytest.raises(ParseError, match="répété"):
        series_from_document(doc)


def test_rejects_exponent_below_bounds():
    """Test le refus d'un exposant sous les bornes de troncature."""
    doc = series_document([{"e": [-1], "c": "1"}])
    with pytest.raises(ParseError):
        series_from_document(doc, "generators.components[0]")


def test_rejects_field_shape(w1_document):
    """Test le refus d'un champ dont la forme ne correspond pas à dim."""
    w1_document["dim"] = 2
    doc = parse_document(json.dumps(w1_document), FieldDocument)
    with pytest.raises(ParseError):
        field_from_document(doc, BiField, "phi.json")


def test_map_source_dim_mismatch():
    """Test le refus d'un source_dim incohérent."""
    doc = MapDocument.model_validate({
        "source_dim": 2,
        "target_dim": 1,
        "components": [series_document([{"e": [1], "c": "1"}]).model_dump()],
    })
    with pytest.raises(ParseError, match="source_dim"):
        map_from_document(doc, "jet.json")


def test_matrix_document_validation():
    """Test la validation des matrices entières."""
    D = matrix_from_document(parse_document('{"n": 2, "rows": [[2, 1], [1, 1]]}', MatrixDocument))
    assert D.det == 1
    with pytest.raises(ParseError):
        parse_document('{"n": 2, "rows": [[1, 0]]}', MatrixDocument)
    with pytest.raises(ParseError):
        parse_document('{"n": 1, "rows": [[1.5]]}', MatrixDocument)


def test_load_document(tmp_path, w1_document):
    """Test la lecture depuis un fichier."""
    path = tmp_path / "phi.json"
    path.write_text(json.dumps(w1_document), encoding="utf-8")
    doc = load_document(path, FieldDocument)
    assert doc.dim == 1


# --- écriture ------------------------------------------------------------------------------


def test_dump_is_canonical():
    """Test l'ordre des termes, les rationnels p/q et l'absence de prec pour une série exacte."""
    trunc = Truncation.power_series(1, 4)
    f = Series(trunc, {(3,): Fraction(-2, 4), (1,): 3})
    text = dump_document(series_to_document(f))
    assert text == (
        '{"nvars":1,"trunc":{"max_total_degree":4,"min_exponent":[0]},'
        '"terms":[{"e":[1],"c":"3/1"},{"e":[3],"c":"-1/2"}]}'
    )
    again = Series(trunc, {(1,): 3, (3,): Fraction(-1, 2)})
    assert dump_document(series_to_document(again)) == text


def test_dump_keeps_precision():
    """Test la présence de prec pour une série non exacte."""
    f = Series(Truncation.power_series(1, 4), {(1,): 1}, precision=2)
    assert json.loads(dump_document(series_to_document(f)))["prec"] == 2


def test_symbolic_coefficients_survive_reading():
    """Test la relecture d'un coefficient polynomial en x^i_I."""
    x1 = CoeffPoly.variable(coordinate(1, (1,)))
    f = Series(Truncation.power_series(1, 4), {(2,): x1 * x1 - 1})
    doc = parse_document(dump_document(series_to_document(f)), SeriesDocument)
    assert series_from_document(doc) == f


def test_vector_field_document():
    """Test un champ de vecteurs de rang 1."""
    trunc = Truncation.power_series(1, 4)
    X = VectorField(dim=1, components=(Series.monomial(trunc, (2,)),))
    doc = parse_document(dump_document(field_to_document(X)), FieldDocument)
    assert field_from_document(doc, VectorField)[0] == X[0]


# --- mise en forme ---------------------------------------------------------------------------


def test_block_names():
    """Test les noms de variables par bloc."""
    assert block_names(1, 3) == ["u", "v", "w"]
    assert block_names(2, 2) == ["u1", "u2", "v1", "v2"]
    assert block_names(2, 1, OutputFormat.LATEX) == ["u^1", "u^2"]


def test_array_lines_text_and_latex():
    """Test l'affichage de φ en texte et en LaTeX."""
    phi = w1_canonical(1)
    assert DocumentGenerator(OutputFormat.TEXT).array_lines(phi, "φ") == ["φ = u**2*v - u*v**2"]
    assert DocumentGenerator(OutputFormat.LATEX).array_lines(phi, r"\varphi") == [r"\varphi = u^{2} v - u v^{2}"]
    assert DocumentGenerator().array_lines(w1_canonical(0), "φ") == ["φ = 0"]


def test_save_document(tmp_path):
    """Test l'écriture d'un artefact dans un répertoire."""
    path = DocumentGenerator(OutputFormat.JSON).save_document("{}", tmp_path)
    assert path.name == "artefact.json"
    assert path.read_text(encoding="utf-8") == "{}\n"


def test_save_document_sanitizes_stem(tmp_path):
    """Test le nettoyage du nom d'artefact dérivé de la tâche."""
    path = DocumentGenerator(OutputFormat.LATEX).save_document("x", tmp_path, "canonical_mon D:2")
    assert path.name == "canonical_mon_D_2.tex"


def test_sections():
    """Test la concaténation de blocs titrés."""
    assert sections({"α": ["α = 0"], "Jacobi": ["ok"]}) == ["# α", "α = 0", "# Jacobi", "ok"]


def test_progress_tracker():
    """Test la progression et le temps écoulé de la suite."""
    tracker = ProgressTracker(4, "suite")
    assert tracker.progress == 0
    tracker.update("series/unit_inverse")
    assert tracker.update("series/ring_laws") >= timedelta(0)
    assert tracker.progress == 50
    assert tracker.elapsed_time >= timedelta(0)
    assert ProgressTracker(0).progress == 0

import json
import random
import pytest
from unittest.mock import patch

from app.api.codec import field_from_document, parse_document
from app.api.models import CanonicalBundle, CheckResult, Command, FieldDocument, JobSpec, SuiteReport
from app.core.fields import BiField
from app.core.runner import EXIT_FAILED, EXIT_INPUT, EXIT_OK, run
from app.core.series import Series, Truncation
from app.config import settings
from app.core.suite import MIN_CERTIFIED_DEGREE, all_vanish, n3_family
from app.main import build_parser, job_from_args, main


def series(terms, nvars=2, order=8):
    return {
        "nvars": nvars,
        "trunc": {"max_total_degree": order, "min_exponent": [0] * nvars},
        "terms": [{"e": e, "c": c} for e, c in terms],
    }


@pytest.fixture
def phi_w1(tmp_path):
    """Fixture pour φ = u²v - uv² (solution de Yang-Baxter)."""
    path = tmp_path / "phi_w1.json"
    path.write_text(json.dumps({"dim": 1, "components": [[series([([2, 1], "1"), ([1, 2], "-1")])]]}))
    return path


@pytest.fixture
def phi_control(tmp_path):
    """Fixture pour φ = u² - v² (contrôle négatif)."""
    path = tmp_path / "phi_control.json"
    path.write_text(json.dumps({"dim": 1, "components": [[series([([2, 0], "1"), ([0, 2], "-1")])]]}))
    return path


@pytest.fixture
def identity_matrix(tmp_path):
    """Fixture pour D = I_2."""
    path = tmp_path / "identity.json"
    path.write_text(json.dumps({"n": 2, "rows": [[1, 0], [0, 1]]}))
    return path


def test_parser_defaults():
    """Test les valeurs par défaut de la ligne de commande."""
    args = build_parser().parse_args(["verify", "--suite", "series,jetgroup", "bialgebra"])
    job = job_from_args(args)
    assert job.command == Command.VERIFY
    assert job.order == 8 and job.seed == 42
    assert job.suite == ["series", "jetgroup", "bialgebra"]


def test_w1_requires_d():
    """Test l'argument --d obligatoire."""
    with pytest.raises(SystemExit):
        build_parser().parse_args(["w1"])


def test_w1_text(capsys):
    """Test la sortie texte de w1."""
    assert main(["w1", "--d", "1"]) == EXIT_OK
    assert "φ = u**2*v - u*v**2" in capsys.readouterr().out


def test_w1_json_is_deterministic(capsys):
    """Test deux exécutions identiques donnant les mêmes octets."""
    main(["w1", "--d", "2", "--format", "json"])
    first = capsys.readouterr().out
    main(["w1", "--d", "2", "--format", "json"])
    assert capsys.readouterr().out == first
    assert json.loads(first)["dim"] == 1


def test_cybe_check_exit_codes(phi_w1, phi_control, capsys):
    """Test le code 0 pour une solution et 1 pour le contrôle négatif."""
    assert main(["cybe-check", "--phi", str(phi_w1)]) == EXIT_OK
    assert "résidu nul jusqu'au degré 8" in capsys.readouterr().out
    assert main(["cybe-check", "--phi", str(phi_control)]) == EXIT_FAILED
    assert "résidu non nul" in capsys.readouterr().out


def test_cybe_check_json_report(phi_control, capsys):
    """Test le rapport JSON d'un résidu non nul."""
    main(["cybe-check", "--phi", str(phi_control), "--format", "json"])
    report = json.loads(capsys.readouterr().out)
    assert report["zero"] is False
    assert report["nonzero_components"] == 1
    assert "residual" in report


def test_missing_file_is_input_error(tmp_path, capsys):
    """Test le code 2 pour un fichier absent."""
    assert main(["cybe-check", "--phi", str(tmp_path / "absent.json")]) == EXIT_INPUT
    assert "n'existe pas" in capsys.readouterr().err


def test_malformed_json_is_input_error(tmp_path, capsys):
    """Test le code 2 pour un JSON mal formé."""
    path = tmp_path / "broken.json"
    path.write_text('{"dim": 1, "components": [')
    assert main(["rmatrix", "--phi", str(path)]) == EXIT_INPUT
    assert "JSON invalide" in capsys.readouterr().err


def test_missing_input_is_input_error(capsys):
    """Test le code 2 lorsque la commande n'a aucune entrée."""
    assert main(["alpha"]) == EXIT_INPUT
    assert "--phi" in capsys.readouterr().err


def test_canonical(identity_matrix, capsys):
    """Test le représentant canonique de D = I."""
    assert main(["canonical", "--matrix", str(identity_matrix)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "F1 = 1/u1" in out
    assert "# α" in out


def test_canonical_degenerate_matrix(tmp_path, capsys):
    """Test le code 1 pour une matrice dégénérée."""
    path = tmp_path / "singular.json"
    path.write_text(json.dumps({"n": 2, "rows": [[1, 2], [2, 4]]}))
    assert main(["canonical", "--matrix", str(path)]) == EXIT_FAILED
    assert "DegenerateMatrixError" in capsys.readouterr().err


def test_alpha_from_matrix(identity_matrix, capsys):
    """Test α et son résidu de Jacobi."""
    assert main(["alpha", "--matrix", str(identity_matrix), "--order", "5"]) == EXIT_OK
    assert "alpha_jacobi_residual : résidu nul" in capsys.readouterr().out


def test_brackets(phi_w1, capsys):
    """Test la table des crochets pour d = 1."""
    assert main(["brackets", "--phi", str(phi_w1), "--bound", "2", "--format", "json"]) == EXIT_OK
    table = json.loads(capsys.readouterr().out)
    assert table["bound"] == 2
    assert [pair["a"] for pair in table["pairs"]] == [[1, [1]]]


def test_jet_pi(phi_w1, tmp_path, capsys):
    """Test Π pour un jet R -> R."""
    jet = tmp_path / "jet.json"
    jet.write_text(json.dumps({
        "source_dim": 1,
        "target_dim": 1,
        "components": [series([([1], "2"), ([2], "1")], nvars=1)],
    }))
    assert main(["jet-pi", "--phi", str(phi_w1), "--jet", str(jet), "--order", "6"]) == EXIT_OK
    assert "pi_jacobi_certificate : résidu nul" in capsys.readouterr().out


def test_sample_writes_artifact(identity_matrix, tmp_path):
    """Test le tirage 𝓕_D et l'écriture de l'artefact."""
    out = tmp_path / "sample.json"
    code = main(["sample", "--matrix", str(identity_matrix), "--order", "4", "--seed", "3",
                 "--format", "json", "--out", str(out)])
    assert code == EXIT_OK
    bundle = json.loads(out.read_text(encoding="utf-8"))
    assert bundle["seed"] == 3
    assert bundle["certificate"]["zero"] is True


def test_verify_unknown_suite(capsys):
    """Test le code 2 pour un module inconnu."""
    assert main(["verify", "--suite", "nonsense"]) == EXIT_INPUT
    assert "Suite inconnue" in capsys.readouterr().err


def test_verify_series(capsys):
    """Test la suite réduite au module series."""
    assert main(["verify", "--suite", "series"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[OK] series/unit_inverse" in out
    assert "2/2 vérifications réussies (graine 42)" in out


def test_verify_failure_status():
    """Test le code 1 lorsqu'une vérification échoue."""
    report = SuiteReport(
        seed=1,
        scope=["series"],
        passed=False,
        checks=[CheckResult(name="ring_laws", module="series", passed=False, detail="écart")],
    )
    with patch("app.core.runner.verify_suite", return_value=report) as mock_suite:
        outcome = run(JobSpec(command=Command.VERIFY, seed=1, suite=["series"]))
    mock_suite.assert_called_once_with(["series"], 1, None)
    assert outcome.status == EXIT_FAILED
    assert "[ÉCHEC] series/ring_laws : écart" in outcome.content


def test_out_without_value_uses_output_dir(tmp_path, monkeypatch):
    """Test l'écriture dans le répertoire de sortie par défaut."""
    monkeypatch.chdir(tmp_path)
    assert main(["w1", "--d", "1", "--format", "latex", "--out"]) == EXIT_OK
    assert (tmp_path / "output" / "w1_d1.tex").read_text(encoding="utf-8").startswith(r"\varphi = ")


def test_all_vanish_requires_certified_degree():
    """Test qu'un résidu nul mais non certifié fait échouer le contrôle."""
    trunc = Truncation.power_series(2, 5)
    uncertified = Series(trunc, {(3, 0): 1}, precision=MIN_CERTIFIED_DEGREE - 1)
    outcome = all_vanish([uncertified], "résidu")
    assert uncertified.vanishes()
    assert not outcome.passed
    assert "certifié seulement" in outcome.detail
    assert all_vanish([Series(trunc, {(3, 0): 1}, precision=2)], "résidu").passed


@pytest.mark.parametrize("seed", [0, 42])
def test_n3_family_enumerates_binary_matrices(seed):
    """Test l'énumération complète des 174 matrices 3×3 inversibles à entrées 0/1, puis le tirage."""
    family = n3_family(random.Random(seed))
    assert len(family) == 174 + settings.suite_n3_sample
    assert all(max(max(row) for row in D.rows) <= 1 for D in family[:174])
    assert all(D.det != 0 and D.n == 3 for D in family)
    assert len({tuple(map(tuple, D.rows)) for D in family}) == len(family)
    assert family == n3_family(random.Random(seed))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_w1_appendix_matches_canonical(d, tmp_path, capsys):
    """Test que w1 et canonical donnent le même φ en normalisation appendix pour D = (d)."""
    matrix = tmp_path / "d.json"
    matrix.write_text(json.dumps({"n": 1, "rows": [[d]]}))
    assert main(["w1", "--d", str(d), "--normalize", "appendix", "--format", "json"]) == EXIT_OK
    w1 = parse_document(capsys.readouterr().out, FieldDocument, "w1")
    assert main(["canonical", "--matrix", str(matrix), "--normalize", "appendix", "--format", "json"]) == EXIT_OK
    bundle = parse_document(capsys.readouterr().out, CanonicalBundle, "canonical")
    assert field_from_document(w1, BiField) == field_from_document(bundle.phi, BiField)


def test_w1_appendix_text(capsys):
    """Test la forme u^{d+1}v - uv^{d+1} en normalisation appendix."""
    assert main(["w1", "--d", "2", "--normalize", "appendix"]) == EXIT_OK
    assert "φ = u**3*v - u*v**3" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv, name",
    [
        (["w1", "--d", "-1"], "w1_d-1.txt"),
        (["canonical", "--matrix", "{matrix}", "--format", "json"], "canonical_identity.json"),
        (["sample", "--matrix", "{matrix}", "--order", "4", "--seed", "3"], "sample_identity_graine3.txt"),
    ],
)
def test_artifact_name_follows_job(argv, name, identity_matrix, tmp_path):
    """Test le nom d'artefact dérivé de la commande dans un répertoire de sortie."""
    out = tmp_path / "artefacts"
    out.mkdir()
    argv = [arg.format(matrix=identity_matrix) for arg in argv]
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    assert [p.name for p in out.iterdir()] == [name]

"""
Exécution d'une tâche de la ligne de commande : lecture des documents JSON,
calcul, mise en forme et code de sortie.
"""
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional

from pydantic import BaseModel

from app.api.codec import (
    bracket_table_to_document,
    dump_document,
    field_from_document,
    field_to_document,
    load_document,
    map_from_document,
    map_to_document,
    matrix_from_document,
    matrix_to_document,
)
from app.api.models import (
    CanonicalBundle,
    Command,
    FieldDocument,
    JobSpec,
    MapDocument,
    MatrixDocument,
    Normalization,
    OutputFormat,
    ResidualReport,
    SampleBundle,
)
from app.config import settings
from app.core.bialgebra import GeneratorTuple, cybe_residual, rmatrix_from_generators, w1_canonical
from app.core.classify import (
    IntegerMatrix,
    SampleBudget,
    canonical_generators,
    canonical_rmatrix,
    laurent_family_sample,
    normalization_factor,
)
from app.core.fields import BiField, SeriesArray
from app.core.grouppoisson import SymbolicJet, bracket_table, omega_bifield
from app.core.homspace import alpha_jacobi_residual, induced_alpha, jet_pi, pi_jacobi_certificate
from app.core.jetgroup import FormalMap
from app.core.suite import verify_suite
from app.utils.document_generator import DocumentGenerator, block_names, render, sections
from app.utils.validators import AlgebraError, ParseError, ShapeError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


class RunOutcome(BaseModel):
    """Résultat d'une tâche : code de sortie, rapport et artefact éventuel."""
    status: int
    content: str = ""
    error: Optional[str] = None
    artifact: Optional[Path] = None


class _Output(BaseModel):
    status: int
    text: List[str]
    document: Optional[BaseModel] = None


# --- entrées ----------------------------------------------------------------------------------


def _matrix(job: JobSpec) -> IntegerMatrix:
    if job.matrix is None:
        raise ParseError(f"La commande {job.command.value} attend --matrix")
    return matrix_from_document(load_document(job.matrix, MatrixDocument))


def _generators(job: JobSpec) -> GeneratorTuple:
    X = map_from_document(load_document(job.generators, MapDocument), str(job.generators))
    if X.source_dim != X.target_dim:
        raise ParseError(f"{job.generators}: {X.target_dim} générateurs en {X.source_dim} variables")
    try:
        return GeneratorTuple(generators=X.components).with_order(job.order)
    except ShapeError as exc:
        raise ParseError(f"{job.generators}: {exc}")


def _bifield(path: Path, order: int) -> BiField:
    return field_from_document(load_document(path, FieldDocument), BiField, str(path)).with_order(order)


def _jet(job: JobSpec) -> FormalMap:
    if job.jet is None:
        raise ParseError("La commande jet-pi attend --jet")
    return map_from_document(load_document(job.jet, MapDocument), str(job.jet)).with_order(job.order)


def _phi(job: JobSpec) -> BiField:
    """φ depuis --phi, sinon depuis --generators, sinon la r-matrice canonique de --matrix."""
    if job.phi is not None:
        return _bifield(job.phi, job.order)
    if job.generators is not None:
        return rmatrix_from_generators(_generators(job))
    if job.matrix is not None:
        return canonical_rmatrix(_matrix(job), job.normalization, job.order)
    raise ParseError(f"La commande {job.command.value} attend --phi, --generators ou --matrix")


# --- rapports -----------------------------------------------------------------------------------


def residual_report(name: str, residual: SeriesArray, detail: Optional[str] = None) -> ResidualReport:
    zero = residual.vanishes()
    return ResidualReport(
        name=name,
        zero=zero,
        certified_degree=residual.certified_degree,
        nonzero_components=0 if zero else sum(1 for _ in residual.nonzero()),
        residual=None if zero else field_to_document(residual),
        detail=detail,
    )


# --- commandes ------------------------------------------------------------------------------------


def _rmatrix(job: JobSpec, doc: DocumentGenerator) -> _Output:
    phi = _phi(job)
    text = doc.array_lines(phi, "φ" if doc.fmt == OutputFormat.TEXT else r"\varphi")
    text.append(f"degré certifié {phi.certified_degree}")
    return _Output(status=EXIT_OK, text=text, document=field_to_document(phi))


def _cybe_check(job: JobSpec, doc: DocumentGenerator) -> _Output:
    residual = cybe_residual(_phi(job))
    report = residual_report("cybe_residual", residual)
    return _Output(
        status=EXIT_OK if report.zero else EXIT_FAILED,
        text=doc.residual_lines(report, None if report.zero else residual),
        document=report,
    )


def _brackets(job: JobSpec, doc: DocumentGenerator) -> _Output:
    phi = _phi(job)
    omega = omega_bifield(phi, SymbolicJet(dim=phi.dim, max_degree=job.order))
    entries = bracket_table(omega, job.bound)
    table = bracket_table_to_document(entries, phi.dim, job.bound, omega.certified_degree)
    text = doc.bracket_lines(entries)
    text.append(f"{len(entries)} crochets, degré certifié {omega.certified_degree}")
    return _Output(status=EXIT_OK, text=text, document=table)


def _alpha(job: JobSpec, doc: DocumentGenerator) -> _Output:
    alpha = induced_alpha(_phi(job))
    jacobi = alpha_jacobi_residual(alpha)
    report = residual_report("alpha_jacobi_residual", jacobi)
    text = sections({
        "α": doc.array_lines(alpha, "α" if doc.fmt == OutputFormat.TEXT else r"\alpha"),
        "Jacobi": doc.residual_lines(report, None if report.zero else jacobi),
    })
    return _Output(status=EXIT_OK if report.zero else EXIT_FAILED, text=text, document=field_to_document(alpha))


def _jet_pi(job: JobSpec, doc: DocumentGenerator) -> _Output:
    phi_m = _phi(job)
    phi_n = _bifield(job.phi_target, job.order) if job.phi_target is not None else phi_m
    F = _jet(job)
    pi = jet_pi(F, phi_m, phi_n)
    certificate = pi_jacobi_certificate(phi_m, phi_n, F)
    report = residual_report(
        "pi_jacobi_certificate",
        certificate.defect,
        detail=f"Φ source nul : {certificate.source_cybe_zero}, Φ cible nul : {certificate.target_cybe_zero}",
    )
    report = report.model_copy(update={"zero": certificate.certified})
    text = sections({
        "Π": doc.array_lines(pi, "Π" if doc.fmt == OutputFormat.TEXT else r"\Pi"),
        "Jacobi": doc.residual_lines(report),
    })
    return _Output(status=EXIT_OK if certificate.certified else EXIT_FAILED, text=text, document=field_to_document(pi))


def _canonical(job: JobSpec, doc: DocumentGenerator) -> _Output:
    D = _matrix(job)
    F = canonical_generators(D, job.order)
    phi = canonical_rmatrix(D, job.normalization, job.order)
    alpha = induced_alpha(phi)
    bundle = CanonicalBundle(
        matrix=matrix_to_document(D),
        normalization=job.normalization,
        generators=map_to_document(FormalMap.from_components(F.generators)),
        phi=field_to_document(phi),
        alpha=field_to_document(alpha),
    )
    names = [f"F{k + 1}" for k in range(D.n)] if doc.fmt == OutputFormat.TEXT else [f"F^{k + 1}" for k in range(D.n)]
    variables = block_names(D.n, 1, doc.fmt)
    text = sections({
        f"D = {D} ({D.kind.value}, det {D.det})": [
            doc.series_line(F[k], names[k], variables) for k in range(D.n)
        ],
        "φ": doc.array_lines(phi, "φ" if doc.fmt == OutputFormat.TEXT else r"\varphi"),
        "α": doc.array_lines(alpha, "α" if doc.fmt == OutputFormat.TEXT else r"\alpha"),
    })
    return _Output(status=EXIT_OK, text=text, document=bundle)


def _w1(job: JobSpec, doc: DocumentGenerator) -> _Output:
    if job.d is None:
        raise ParseError("La commande w1 attend --d")
    phi = w1_canonical(job.d, job.order)
    if job.normalization == Normalization.APPENDIX:
        # w1 vaut -φ_D brute pour D = (d)
        phi = phi.scaled(-normalization_factor(IntegerMatrix(rows=[[job.d]]), job.normalization))
    text = doc.array_lines(phi, "φ" if doc.fmt == OutputFormat.TEXT else r"\varphi")
    return _Output(status=EXIT_OK, text=text, document=field_to_document(phi))


def _sample(job: JobSpec, doc: DocumentGenerator) -> _Output:
    D = _matrix(job)
    sample = laurent_family_sample(D, job.seed, SampleBudget(order=job.order, tail_terms=settings.sample_tail_terms))
    residual = cybe_residual(sample.phi)
    report = residual_report("cybe_residual", residual)
    bundle = SampleBundle(
        matrix=matrix_to_document(D),
        seed=job.seed,
        generators=map_to_document(FormalMap.from_components(sample.generators.generators)),
        phi=field_to_document(sample.phi),
        certificate=report,
    )
    text = sections({
        f"𝓕_D pour D = {D}, graine {job.seed}": doc.array_lines(
            sample.phi, "φ" if doc.fmt == OutputFormat.TEXT else r"\varphi"
        ),
        "Yang-Baxter": doc.residual_lines(report, None if report.zero else residual),
    })
    return _Output(status=EXIT_OK if report.zero else EXIT_FAILED, text=text, document=bundle)


def _verify(job: JobSpec, doc: DocumentGenerator) -> _Output:
    phi = _bifield(job.phi, job.order) if job.phi is not None else None
    report = verify_suite(job.suite, job.seed, phi)
    return _Output(status=EXIT_OK if report.passed else EXIT_FAILED, text=doc.suite_lines(report), document=report)


_HANDLERS: Dict[Command, Callable[[JobSpec, DocumentGenerator], _Output]] = {
    Command.RMATRIX: _rmatrix,
    Command.CYBE_CHECK: _cybe_check,
    Command.BRACKETS: _brackets,
    Command.ALPHA: _alpha,
    Command.JET_PI: _jet_pi,
    Command.CANONICAL: _canonical,
    Command.W1: _w1,
    Command.SAMPLE: _sample,
    Command.VERIFY: _verify,
}


def artifact_stem(job: JobSpec) -> str:
    """Nom d'artefact : commande, puis d, entrée principale et graine selon la commande."""
    parts = [job.command.value]
    if job.d is not None:
        parts.append(f"d{job.d}")
    source = next((p for p in (job.matrix, job.phi, job.generators, job.jet) if p is not None), None)
    if source is not None:
        parts.append(Path(source).stem)
    if job.command == Command.SAMPLE:
        parts.append(f"graine{job.seed}")
    return "_".join(parts)


def run(job: JobSpec) -> RunOutcome:
    """
    Exécute une tâche.

    Le code de sortie vaut 0 si tous les certificats demandés sont nuls,
    1 pour un certificat non nul ou une précondition mathématique non
    satisfaite, 2 pour une entrée mal formée.
    """
    doc = DocumentGenerator(job.format)
    logger.info(f"Commande {job.command.value} (ordre {job.order}, graine {job.seed}, format {job.format.value})")
    try:
        output = _HANDLERS[job.command](job, doc)
    except ParseError as exc:
        logger.error(f"Entrée invalide : {exc}")
        return RunOutcome(status=EXIT_INPUT, error=str(exc))
    except AlgebraError as exc:
        logger.error(f"{type(exc).__name__} : {exc}")
        return RunOutcome(status=EXIT_FAILED, error=f"{type(exc).__name__}: {exc}")

    if job.format == OutputFormat.JSON:
        content = dump_document(output.document) if output.document is not None else render(output.text)
    else:
        content = render(output.text)

    artifact = None
    if job.out is not None:
        artifact = doc.save_document(content, job.out, artifact_stem(job))
    if output.status != EXIT_OK:
        logger.error(f"Commande {job.command.value} : certificat non nul")
    return RunOutcome(status=output.status, content=content, artifact=artifact)

from typing import Dict, Iterable, List, Optional, Sequence
from pathlib import Path
import logging

import sympy

from app.api.models import OutputFormat, ResidualReport, SuiteReport
from app.core.fields import SeriesArray
from app.core.grouppoisson import BracketEntry
from app.core.series import Series
from app.utils.helpers import sanitize_filename

logger = logging.getLogger(__name__)

BLOCK_LETTERS = "uvw"


def block_names(block_dim: int, blocks: int, fmt: OutputFormat = OutputFormat.TEXT) -> List[str]:
    """
    Noms des variables par blocs : u, v, w pour une variable par bloc,
    sinon u1..un (texte) ou u^1..u^n (LaTeX).
    """
    names = []
    for b in range(blocks):
        letter = BLOCK_LETTERS[b]
        if block_dim == 1:
            names.append(letter)
        elif fmt == OutputFormat.LATEX:
            names.extend(f"{letter}^{k + 1}" for k in range(block_dim))
        else:
            names.extend(f"{letter}{k + 1}" for k in range(block_dim))
    return names


def _index_label(idx: Sequence[int], fmt: OutputFormat) -> str:
    label = "".join(str(i + 1) for i in idx)
    return f"^{{{label}}}" if fmt == OutputFormat.LATEX else label


class DocumentGenerator:
    """Mise en forme des résultats (texte, LaTeX) et écriture des artefacts."""

    def __init__(self, fmt: OutputFormat = OutputFormat.TEXT):
        self.fmt = OutputFormat(fmt)

    # --- expressions -------------------------------------------------------------

    def expression(self, series: Series, names: Sequence[str], factor: bool = False) -> str:
        expr = sympy.expand(series.to_sympy(names))
        if factor and expr != 0:
            expr = sympy.factor(expr)
        if self.fmt == OutputFormat.LATEX:
            return sympy.latex(expr)
        return sympy.sstr(expr)

    def array_lines(self, array: SeriesArray, label: str, factor: bool = False) -> List[str]:
        """Une ligne par composante non nulle : `label^{ij} = ...`."""
        names = block_names(array.block_dim, array.blocks, self.fmt)
        lines = []
        for idx, series in array.nonzero():
            suffix = _index_label(idx, self.fmt) if array.dim > 1 else ""
            lines.append(f"{label}{suffix} = {self.expression(series, names, factor)}")
        if not lines:
            lines.append(f"{label} = 0")
        return lines

    def series_line(self, series: Series, label: str, names: Sequence[str]) -> str:
        return f"{label} = {self.expression(series, names)}"

    # --- rapports -------------------------------------------------------------------

    def residual_lines(self, report: ResidualReport, residual: Optional[SeriesArray] = None) -> List[str]:
        if report.zero:
            lines = [f"{report.name} : résidu nul jusqu'au degré {report.certified_degree}"]
        else:
            lines = [
                f"{report.name} : résidu non nul ({report.nonzero_components} composantes, "
                f"degré certifié {report.certified_degree})"
            ]
            if residual is not None:
                lines.extend(self.array_lines(residual, "Φ" if self.fmt == OutputFormat.TEXT else r"\Phi", factor=True))
        if report.detail:
            lines.append(report.detail)
        return lines

    def bracket_lines(self, entries: Iterable[BracketEntry]) -> List[str]:
        lines = []
        for entry in entries:
            if self.fmt == OutputFormat.LATEX:
                lines.append(
                    rf"\{{{entry.a.latex()},{entry.b.latex()}\}} = {sympy.latex(sympy.expand(entry.poly.to_sympy()))}"
                )
            else:
                lines.append(f"{{{entry.a}, {entry.b}}} = {entry.poly!r}")
        return lines

    def suite_lines(self, report: SuiteReport) -> List[str]:
        lines = []
        for check in report.checks:
            status = "OK" if check.passed else "ÉCHEC"
            degree = f" (degré {check.certified_degree})" if check.certified_degree is not None else ""
            detail = f" : {check.detail}" if check.detail and not check.passed else ""
            lines.append(f"[{status}] {check.module}/{check.name}{degree}{detail}")
        total = len(report.checks)
        failed = len(report.failures)
        lines.append(f"{total - failed}/{total} vérifications réussies (graine {report.seed})")
        return lines

    # --- fichiers ---------------------------------------------------------------------

    def save_document(self, content: str, path: Path, stem: str = "artefact") -> Path:
        """Écrit un artefact ; un répertoire reçoit stem comme nom de fichier nettoyé."""
        path = Path(path)
        if path.is_dir() or not path.suffix:
            path = path / sanitize_filename(f"{stem}.{self.extension}")
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(content if content.endswith("\n") else content + "\n")
        logger.info(f"Artefact écrit : {path}")
        return path

    @property
    def extension(self) -> str:
        return {"text": "txt", "json": "json", "latex": "tex"}[self.fmt.value]


def render(lines: Iterable[str]) -> str:
    return "\n".join(lines)


def sections(blocks: Dict[str, List[str]]) -> List[str]:
    """Concatène des blocs de lignes sous des titres."""
    lines = []
    for title, body in blocks.items():
        lines.append(f"# {title}")
        lines.extend(body)
    return lines

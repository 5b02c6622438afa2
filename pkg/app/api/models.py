from pydantic import BaseModel, Field, field_validator, model_validator
from typing import List, Optional, Tuple, Union
from pathlib import Path
from enum import Enum

from app.utils.validators import validate_integer_rows, validate_job_paths, validate_rational_text


class Command(str, Enum):
    """Sous-commandes de la ligne de commande."""
    RMATRIX = "rmatrix"
    CYBE_CHECK = "cybe-check"
    BRACKETS = "brackets"
    ALPHA = "alpha"
    JET_PI = "jet-pi"
    CANONICAL = "canonical"
    W1 = "w1"
    SAMPLE = "sample"
    VERIFY = "verify"


class OutputFormat(str, Enum):
    """Formats de sortie."""
    TEXT = "text"
    JSON = "json"
    LATEX = "latex"


class Normalization(str, Enum):
    """Normalisation des r-matrices canoniques."""
    RAW = "raw"
    APPENDIX = "appendix"


# --- documents de séries -------------------------------------------------------------


class PolyTermDocument(BaseModel):
    """Terme c·Π x^i_I^p d'un coefficient symbolique."""
    mono: List[Tuple[Tuple[str, int, List[int]], int]]
    c: str

    @field_validator("c")
    @classmethod
    def _check_rational(cls, value: str) -> str:
        if not validate_rational_text(value):
            raise ValueError(f"rationnel invalide '{value}'")
        return value


class PolyDocument(BaseModel):
    """Coefficient symbolique {"poly": [...]}."""
    poly: List[PolyTermDocument]


class TermDocument(BaseModel):
    """Terme {"e": [...], "c": "p/q" | {"poly": [...]}}."""
    e: List[int]
    c: Union[str, PolyDocument]

    @field_validator("c")
    @classmethod
    def _check_rational(cls, value):
        if isinstance(value, str) and not validate_rational_text(value):
            raise ValueError(f"rationnel invalide '{value}'")
        return value


class TruncDocument(BaseModel):
    max_total_degree: int = Field(..., ge=0)
    min_exponent: List[int]


class SeriesDocument(BaseModel):
    """Série tronquée ; "prec" n'est présent que pour une série non exacte."""
    nvars: int = Field(..., ge=0)
    trunc: TruncDocument
    terms: List[TermDocument] = Field(default_factory=list)
    prec: Optional[int] = None


class MapDocument(BaseModel):
    """Jet d'application R^m -> R^n (ou générateurs F^1..F^n si m = n)."""
    source_dim: int = Field(..., ge=1)
    target_dim: int = Field(..., ge=1)
    components: List[SeriesDocument]

    @model_validator(mode="after")
    def _check_components(self) -> "MapDocument":
        if len(self.components) != self.target_dim:
            raise ValueError(f"{len(self.components)} composantes pour target_dim={self.target_dim}")
        return self


class FieldDocument(BaseModel):
    """
    Tableau de séries : champ de vecteurs (rang 1), bi-champ (rang 2) ou
    résidu à trois points (rang 3). Les variables du bloc u précèdent celles
    de v puis de w.
    """
    dim: int = Field(..., ge=1)
    source_dim: Optional[int] = Field(None, ge=1)
    components: Union[
        List[SeriesDocument],
        List[List[SeriesDocument]],
        List[List[List[SeriesDocument]]],
    ]


class MatrixDocument(BaseModel):
    """Matrice entière D : {"n": k, "rows": [[...]...]}."""
    n: int = Field(..., ge=1)
    rows: List[List[int]]

    @model_validator(mode="after")
    def _check_rows(self) -> "MatrixDocument":
        errors = validate_integer_rows(self.rows)
        if len(self.rows) != self.n:
            errors.append(f"{len(self.rows)} lignes pour n={self.n}")
        if errors:
            raise ValueError("; ".join(errors))
        return self


# --- rapports -------------------------------------------------------------------------


class BracketPairDocument(BaseModel):
    """Entrée {x_A, x_B} : A = [i, I], B = [j, J]."""
    a: Tuple[int, List[int]]
    b: Tuple[int, List[int]]
    poly: List[PolyTermDocument]


class BracketTable(BaseModel):
    dim: int
    bound: int
    certified_degree: int
    pairs: List[BracketPairDocument] = Field(default_factory=list)


class ResidualReport(BaseModel):
    """Certificat de résidu : nul jusqu'au degré certifié ou non."""
    name: str
    zero: bool
    certified_degree: int
    nonzero_components: int = 0
    residual: Optional[FieldDocument] = None
    detail: Optional[str] = None


class CheckResult(BaseModel):
    """Résultat d'une vérification de la suite."""
    name: str
    module: str
    passed: bool
    certified_degree: Optional[int] = None
    duration: float = Field(0.0, exclude=True)
    detail: Optional[str] = None


class SuiteReport(BaseModel):
    seed: int
    scope: List[str]
    passed: bool
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]


class CanonicalBundle(BaseModel):
    """Représentant canonique : D, générateurs, φ, α."""
    matrix: MatrixDocument
    normalization: Normalization
    generators: MapDocument
    phi: FieldDocument
    alpha: FieldDocument


class SampleBundle(BaseModel):
    """Élément tiré de la famille de Laurent 𝓕_D(n) et son certificat."""
    matrix: MatrixDocument
    seed: int
    generators: MapDocument
    phi: FieldDocument
    certificate: ResidualReport


# --- tâche --------------------------------------------------------------------------


class JobSpec(BaseModel):
    """Une invocation de la ligne de commande."""
    command: Command
    generators: Optional[Path] = None
    matrix: Optional[Path] = None
    phi: Optional[Path] = None
    phi_target: Optional[Path] = None
    jet: Optional[Path] = None
    order: int = Field(8, ge=1)
    seed: int = Field(42, ge=0)
    format: OutputFormat = OutputFormat.TEXT
    normalization: Normalization = Normalization.RAW
    out: Optional[Path] = None
    d: Optional[int] = None
    bound: int = Field(2, ge=0)
    suite: List[str] = Field(default_factory=lambda: ["all"])

    @model_validator(mode="after")
    def _check_paths(self) -> "JobSpec":
        errors = validate_job_paths({
            "generators": self.generators,
            "matrix": self.matrix,
            "phi": self.phi,
            "phi_target": self.phi_target,
            "jet": self.jet,
        })
        if errors:
            raise ValueError("; ".join(errors))
        return self

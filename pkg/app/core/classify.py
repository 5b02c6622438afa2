"""
Représentants d'orbites des solutions de l'équation de Yang-Baxter.

À une matrice entière D (lignes d_1..d_n) on associe les monômes de Laurent
F^i(u) = Π_k (u^k)^{-d_ik} puis la r-matrice triangulaire correspondante.
Sont aussi fournis l'orbite spéciale φ^{ij} = u^i - v^j, la détection des
matrices dégénérées et le tirage d'éléments de la famille de Laurent 𝓕_D(n).
"""
import logging
import random
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import sympy
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.api.models import Normalization
from app.core.bialgebra import GeneratorTuple, rmatrix_from_generators
from app.core.coefficients import from_sympy_rational
from app.core.fields import BiField, BiVectorOnSpace
from app.core.homspace import induced_alpha
from app.core.series import Series, Truncation
from app.utils.helpers import multi_indices_upto
from app.utils.validators import (
    BudgetError,
    DegenerateMatrixError,
    OutOfModuliError,
    PreconditionError,
    ShapeError,
    validate_integer_rows,
)

logger = logging.getLogger(__name__)


class MatrixClass(str, Enum):
    """Classe d'une matrice entière D."""
    NONNEGATIVE = "nonneg-nonsingular"   # 𝓓₊
    SINGULAR = "singular"                # det D = 0
    GENERAL = "general"                  # 𝓓, entrées de signe quelconque


class IntegerMatrix(BaseModel):
    """Matrice carrée D à entrées entières."""
    model_config = ConfigDict(frozen=True)

    rows: Tuple[Tuple[int, ...], ...]

    @field_validator("rows", mode="before")
    @classmethod
    def _to_tuples(cls, value):
        return tuple(tuple(row) for row in value)

    @model_validator(mode="after")
    def _check_square(self) -> "IntegerMatrix":
        errors = validate_integer_rows(self.rows)
        if errors:
            raise ShapeError("; ".join(errors))
        return self

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(rows=[[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, values: Sequence[int]) -> "IntegerMatrix":
        n = len(values)
        return cls(rows=[[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def n(self) -> int:
        return len(self.rows)

    def row(self, k: int) -> Tuple[int, ...]:
        return self.rows[k]

    def to_sympy(self) -> sympy.Matrix:
        return sympy.Matrix(self.rows)

    @property
    def det(self) -> int:
        return int(self.to_sympy().det())

    @property
    def is_nonnegative(self) -> bool:
        return all(entry >= 0 for row in self.rows for entry in row)

    @property
    def kind(self) -> MatrixClass:
        if self.det == 0:
            return MatrixClass.SINGULAR
        return MatrixClass.NONNEGATIVE if self.is_nonnegative else MatrixClass.GENERAL

    def inverse(self) -> Tuple[Tuple[Fraction, ...], ...]:
        if self.det == 0:
            raise DegenerateMatrixError(f"D = {list(self.rows)} singulière")
        inverse = self.to_sympy().inv()
        return tuple(tuple(from_sympy_rational(inverse[i, j]) for j in range(self.n)) for i in range(self.n))

    def __str__(self) -> str:
        return "[" + ", ".join(str(list(row)) for row in self.rows) + "]"


class MinorTable(BaseModel):
    """Mineurs (n-1)×(n-1) D_{ij} (indices à partir de 1) et déterminant."""
    model_config = ConfigDict(frozen=True)

    dim: int
    det: int
    minors: Tuple[Tuple[int, ...], ...]

    def minor(self, i: int, j: int) -> int:
        return self.minors[i - 1][j - 1]

    def cofactor(self, i: int, j: int) -> int:
        return (-1) ** (i + j) * self.minor(i, j)

    def laplace_residuals(self, D: IntegerMatrix) -> List[int]:
        """Σ_j (-1)^{i+j} d_ij D_ij - det D, ligne par ligne."""
        return [
            sum(self.cofactor(i, j) * D.rows[i - 1][j - 1] for j in range(1, self.dim + 1)) - self.det
            for i in range(1, self.dim + 1)
        ]


def minor_table(D: IntegerMatrix) -> MinorTable:
    M = D.to_sympy()
    if D.n == 1:
        minors = ((1,),)
    else:
        minors = tuple(
            tuple(int(M.minor_submatrix(i, j).det()) for j in range(D.n)) for i in range(D.n)
        )
    return MinorTable(dim=D.n, det=D.det, minors=minors)


# --- noyau des matrices dégénérées ------------------------------------------------------


def degeneracy_kernel(D: IntegerMatrix) -> Optional[Tuple[int, ...]]:
    """
    Vecteur entier primitif k ≠ 0 tel que Σ k_i d_i = 0 (première entrée non
    nulle positive), ou None si det D ≠ 0.
    """
    if D.det != 0:
        return None
    basis = D.to_sympy().T.nullspace()
    vector = [sympy.Rational(entry) for entry in basis[0]]
    scale = sympy.ilcm(*[entry.q for entry in vector]) if len(vector) > 1 else vector[0].q
    integers = [int(entry * scale) for entry in vector]
    divisor = 0
    for value in integers:
        divisor = gcd(divisor, value)
    integers = [value // divisor for value in integers]
    if next(value for value in integers if value != 0) < 0:
        integers = [-value for value in integers]
    logger.debug(f"D = {D} dégénérée, noyau {integers}")
    return tuple(integers)


def _require_nonsingular(D: IntegerMatrix) -> None:
    if D.det == 0:
        raise DegenerateMatrixError(
            f"D = {D} est dégénérée (det D = 0), relation entre lignes {degeneracy_kernel(D)}"
        )


# --- représentants canoniques ------------------------------------------------------------


def canonical_generators(D: IntegerMatrix, order: int = 8) -> GeneratorTuple:
    """F^i(u) = Π_k (u^k)^{-d_ik}."""
    _require_nonsingular(D)
    trunc = Truncation.power_series(D.n, order)
    return GeneratorTuple(generators=[Series.monomial(trunc, [-d for d in D.row(i)]) for i in range(D.n)])


def normalization_factor(D: IntegerMatrix, normalization: Normalization) -> Fraction:
    """Facteur appliqué à la r-matrice brute : 1, (det D)², ou -d² pour n = 1."""
    normalization = Normalization(normalization)
    if normalization == Normalization.RAW:
        return Fraction(1)
    if D.n == 1:
        return Fraction(-D.rows[0][0] ** 2)
    return Fraction(D.det ** 2)


def polynomial_degree(D: IntegerMatrix) -> int:
    """Degré total de φ_D pour D ∈ 𝓓₊ : 2 + max_k |d_k|."""
    return 2 + max(sum(row) for row in D.rows)


def _polynomial_window(raw: BiField, D: IntegerMatrix) -> BiField:
    """
    φ_D est polynomiale pour D ∈ 𝓓₊ : fenêtre sans exposant négatif, et
    représentant exact dès que l'ordre couvre son degré.
    """
    exact = raw.order >= polynomial_degree(D) and raw.certified_degree >= polynomial_degree(D)
    trunc = Truncation.power_series(raw.nvars, raw.order)
    return raw.map(lambda s: Series(trunc, dict(s.items()), precision=None if exact else s.precision))


def canonical_rmatrix(D: IntegerMatrix, normalization: Normalization = Normalization.RAW, order: int = 8) -> BiField:
    """r-matrice des générateurs canoniques, normalisée."""
    normalization = Normalization(normalization)
    _require_nonsingular(D)
    if not D.is_nonnegative:
        raise OutOfModuliError(
            f"D = {D} a des entrées négatives : utiliser laurent_family_sample"
        )
    raw = _polynomial_window(rmatrix_from_generators(canonical_generators(D, order)), D)
    factor = normalization_factor(D, normalization)
    logger.info(f"r-matrice canonique pour D = {D} ({normalization.value}), degré certifié {raw.certified_degree}")
    return raw if factor == 1 else raw.scaled(factor)


def canonical_alpha(D: IntegerMatrix, normalization: Normalization = Normalization.RAW, order: int = 8) -> BiVectorOnSpace:
    """α^{ij}(u) = -φ^{ij}(u,u) pour la r-matrice canonique."""
    return induced_alpha(canonical_rmatrix(D, normalization, order))


class CoefficientReading(BaseModel):
    """
    Coefficients A^{ij}_k lus sur la base u^i v^j u^{d_k} (côté "u") et
    u^i v^j v^{d_k} (côté "v"), indices à partir de 1.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    table: MinorTable
    coefficients: Dict[Tuple[int, int, int, str], Fraction]
    ambiguous_rows: Tuple[Tuple[int, int], ...] = ()
    unexplained_terms: int = 0

    def coefficient(self, i: int, j: int, k: int, side: str) -> Fraction:
        return self.coefficients.get((i, j, k, side), Fraction(0))


def _basis_exponent(n: int, i: int, j: int, row: Sequence[int], side: str) -> Tuple[int, ...]:
    u = [1 if p == i else 0 for p in range(n)]
    v = [1 if p == j else 0 for p in range(n)]
    target = u if side == "u" else v
    for p in range(n):
        target[p] += row[p]
    return tuple(u + v)


def minor_coefficients(D: IntegerMatrix, normalization: Normalization = Normalization.RAW, order: int = 8) -> CoefficientReading:
    """Mineurs de D et lecture de la r-matrice canonique sur sa base monomiale."""
    phi = canonical_rmatrix(D, normalization, order)
    n = D.n
    ambiguous = tuple(
        (k + 1, l + 1) for k in range(n) for l in range(k + 1, n) if D.row(k) == D.row(l)
    )
    if ambiguous:
        logger.warning(f"Lignes confondues {ambiguous} : lecture des coefficients ambiguë")

    coefficients: Dict[Tuple[int, int, int, str], Fraction] = {}
    unexplained = 0
    for i in range(n):
        for j in range(n):
            seen = set()
            for k in range(n):
                for side in ("u", "v"):
                    exponent = _basis_exponent(n, i, j, D.row(k), side)
                    if exponent in seen:
                        continue
                    seen.add(exponent)
                    value = phi[i, j].coefficient(exponent)
                    if value:
                        coefficients[(i + 1, j + 1, k + 1, side)] = Fraction(value)
            unexplained += sum(1 for exponent, _ in phi[i, j].items() if exponent not in seen)
    return CoefficientReading(
        table=minor_table(D),
        coefficients=coefficients,
        ambiguous_rows=ambiguous,
        unexplained_terms=unexplained,
    )


def special_orbit_rmatrix(n: int, order: int = 8) -> BiField:
    """φ^{ij}(u,v) = u^i - v^j."""
    if n < 1:
        raise ShapeError(f"Dimension {n} < 1")
    trunc = Truncation.power_series(2 * n, order)
    return BiField.build(n, lambda i, j: Series.variable(trunc, i) - Series.variable(trunc, n + j))


# --- famille de Laurent ------------------------------------------------------------------


class SampleBudget(BaseModel):
    """Taille d'un tirage : ordre de troncature et nombre de termes de queue."""
    model_config = ConfigDict(frozen=True)

    order: int = Field(8, ge=0)
    tail_terms: int = Field(4, ge=0)


class LaurentSample(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: IntegerMatrix
    seed: int
    generators: GeneratorTuple
    phi: BiField


def _random_coefficient(rng: random.Random) -> Fraction:
    return Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))


def laurent_family_sample(D: IntegerMatrix, seed: int, budget: SampleBudget) -> LaurentSample:
    """
    F^i(u) = Π_k (u^k)^{-d_ik} · (1 + queue aléatoire en puissances positives),
    tronqué au degré total budget.order ; la queue est tirée par `seed`.
    """
    _require_nonsingular(D)
    n = D.n
    rng = random.Random(seed)
    trunc = Truncation.power_series(n, budget.order)
    generators = []
    for i in range(n):
        lead = [-d for d in D.row(i)]
        if sum(lead) > budget.order:
            raise BudgetError(
                f"Monôme dominant de F^{i + 1} de degré {sum(lead)} > ordre {budget.order}"
            )
        terms = {tuple(lead): Fraction(1)}
        shifts = multi_indices_upto(n, budget.order - sum(lead), 1)
        for shift in rng.sample(shifts, min(budget.tail_terms, len(shifts))):
            terms[tuple(e + s for e, s in zip(lead, shift))] = _random_coefficient(rng)
        generators.append(Series(trunc.with_bounds([min(0, e) for e in lead]), terms))
    F = GeneratorTuple(generators=generators)
    phi = rmatrix_from_generators(F)
    logger.info(f"Tirage de 𝓕_D({n}) pour D = {D}, graine {seed} : degré certifié {phi.certified_degree}")
    return LaurentSample(matrix=D, seed=seed, generators=F, phi=phi)


# --- formules affichées ------------------------------------------------------------------


def _monomial(trunc: Truncation, exponent: Sequence[int], coefficient) -> Series:
    return Series.monomial(trunc, exponent, coefficient)


def _shift(row: Sequence[int], *units: int) -> List[int]:
    exponent = list(row)
    for unit in units:
        exponent[unit] += 1
    return exponent


def appendix_rmatrix_display(D: IntegerMatrix, order: int = 8) -> BiField:
    """Formules affichées de φ^{ij} pour n = 2, D = [[a, b], [c, d]]."""
    if D.n != 2:
        raise PreconditionError(f"Formules affichées pour n = 2 uniquement, reçu n = {D.n}")
    (a, b), (c, d) = D.rows
    trunc = Truncation.power_series(4, order)

    def term(coefficient, i: int, j: int, row: Sequence[int], side: str) -> Series:
        return _monomial(trunc, _basis_exponent(2, i, j, row, side), coefficient)

    first, second = D.row(0), D.row(1)
    phi11 = (term((b - d) * d, 0, 0, first, "u") - term((b - d) * d, 0, 0, first, "v")
             - term((b - d) * b, 0, 0, second, "u") + term((b - d) * b, 0, 0, second, "v"))
    phi12 = (term((b - d) * c, 0, 1, first, "v") - term((b - d) * a, 0, 1, second, "v")
             + term((c - a) * d, 0, 1, first, "u") - term((c - a) * b, 0, 1, second, "u"))
    phi21 = (term(-(c - a) * d, 1, 0, first, "v") + term((c - a) * b, 1, 0, second, "v")
             - term((b - d) * c, 1, 0, first, "u") + term((b - d) * a, 1, 0, second, "u"))
    phi22 = (term((a - c) * c, 1, 1, first, "u") - term((a - c) * c, 1, 1, first, "v")
             - term((a - c) * a, 1, 1, second, "u") + term((a - c) * a, 1, 1, second, "v"))
    return BiField(dim=2, components=((phi11, phi12), (phi21, phi22)))


def appendix_alpha_display(D: IntegerMatrix, order: int = 8) -> BiVectorOnSpace:
    """
    Bivecteur affiché {u^i, u^j} : pour n = 2, u^1u^2[(u^1)^d(u^2)^c - (u^1)^b(u^2)^a] ;
    pour n = 3, la forme générale en mineurs D_{ij}.
    """
    trunc = Truncation.power_series(D.n, order)
    if D.n == 2:
        (a, b), (c, d) = D.rows
        top = _monomial(trunc, (d + 1, c + 1), 1) - _monomial(trunc, (b + 1, a + 1), 1)
        zero = Series.zero(trunc)
        return BiVectorOnSpace(dim=2, components=((zero, top), (-top, zero)))
    if D.n != 3:
        raise PreconditionError(f"Formules affichées pour n = 2 ou 3, reçu n = {D.n}")

    m = minor_table(D).minor
    rows = D.rows
    coefficients = {
        (0, 1): (
            m(1, 2) * (m(2, 1) - m(3, 1)) - m(1, 1) * (m(2, 2) - m(3, 2)),
            m(2, 2) * (m(1, 1) + m(3, 1)) - m(2, 1) * (m(1, 2) + m(3, 2)),
            m(3, 2) * (-m(1, 1) + m(2, 1)) + m(3, 1) * (m(1, 2) - m(2, 2)),
        ),
        (0, 2): (
            m(1, 3) * (-m(2, 1) + m(3, 1)) + m(1, 1) * (m(2, 3) - m(3, 3)),
            -m(2, 3) * (m(1, 1) + m(3, 1)) + m(2, 1) * (m(1, 3) + m(3, 3)),
            m(3, 3) * (m(1, 1) - m(2, 1)) + m(3, 1) * (m(2, 3) - m(1, 3)),
        ),
        (1, 2): (
            m(1, 3) * (m(2, 2) - m(3, 2)) + m(1, 2) * (m(3, 3) - m(2, 3)),
            m(2, 3) * (m(1, 2) + m(3, 2)) - m(2, 2) * (m(1, 3) + m(3, 3)),
            m(3, 3) * (m(2, 2) - m(1, 2)) + m(3, 2) * (m(1, 3) - m(2, 3)),
        ),
    }
    entries = {}
    for (i, j), values in coefficients.items():
        upper = Series.zero(trunc)
        for k, value in enumerate(values):
            if value:
                upper = upper + _monomial(trunc, _shift(rows[k], i, j), value)
        entries[(i, j)] = upper
        entries[(j, i)] = -upper
    return BiVectorOnSpace.build(3, lambda i, j: entries.get((i, j), Series.zero(trunc)))


def diagonal_alpha_display(D: IntegerMatrix, order: int = 8) -> BiVectorOnSpace:
    """n = 3, D = diag(a, b, c) : {u^1,u^2} = c u^1u^2[(u^2)^b - (u^1)^a], etc."""
    if D.n != 3 or any(D.rows[i][j] for i in range(3) for j in range(3) if i != j):
        raise PreconditionError(f"D = {D} n'est pas une matrice diagonale 3×3")
    a, b, c = (D.rows[k][k] for k in range(3))
    trunc = Truncation.power_series(3, order)
    weights = {(0, 1): c, (0, 2): b, (1, 2): a}
    degrees = (a, b, c)
    entries = {}
    for (i, j), weight in weights.items():
        high = [0, 0, 0]
        high[i] += 1
        high[j] += 1
        later, earlier = list(high), list(high)
        later[j] += degrees[j]
        earlier[i] += degrees[i]
        upper = _monomial(trunc, later, weight) - _monomial(trunc, earlier, weight)
        entries[(i, j)] = upper
        entries[(j, i)] = -upper
    return BiVectorOnSpace.build(3, lambda i, j: entries.get((i, j), Series.zero(trunc)))


def compare_alpha_with_display(computed: BiVectorOnSpace, display: BiVectorOnSpace) -> Optional[Fraction]:
    """
    Constante λ telle que display = λ·computed, ou None si les deux bivecteurs
    ne sont pas proportionnels.
    """
    if computed.dim != display.dim:
        raise ShapeError(f"Bivecteurs de dimensions {computed.dim} et {display.dim}")
    ratio = None
    for idx, series in computed.flat():
        for exponent, value in series.items():
            ratio = Fraction(display[idx].coefficient(exponent)) / Fraction(value)
            break
        if ratio is not None:
            break
    if ratio is None:
        return Fraction(1) if display.is_zero() else None
    if not (display - computed.scaled(ratio)).is_zero():
        logger.warning("α calculé et α affiché ne sont pas proportionnels")
        return None
    if ratio != 1:
        logger.warning(f"α affiché = {ratio} · α calculé")
    return ratio

"""
Groupe G_{0n} des jets de difféomorphismes formels fixant l'origine.

Composition, inversion, matrice dérivée, partie linéaire et image directe
des bi-champs φ^{ij}(u,v).
"""
import logging
import random
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import sympy
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.coefficients import CoeffPoly, from_sympy_rational
from app.core.fields import BiField
from app.core.series import (
    BlockLayout,
    Series,
    SeriesMatrix,
    Truncation,
    linear_combine,
    mul,
    partial_derivative,
    relabel_blocks,
    substitute,
)
from app.utils.helpers import multi_indices
from app.utils.validators import (
    PreconditionError,
    ShapeError,
    SingularJetError,
    UnsupportedCompositionError,
)

logger = logging.getLogger(__name__)


class FormalMap(BaseModel):
    """Jet d'application R^m -> R^n : n séries en m variables."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    source_dim: int = Field(..., ge=1)
    target_dim: int = Field(..., ge=1)
    components: Tuple[Series, ...]

    @field_validator("components", mode="before")
    @classmethod
    def _to_tuple(cls, value):
        return tuple(value)

    @model_validator(mode="after")
    def _check_components(self) -> "FormalMap":
        if len(self.components) != self.target_dim:
            raise ShapeError(f"{len(self.components)} composantes pour une cible de dimension {self.target_dim}")
        orders = {c.order for c in self.components}
        if any(c.nvars != self.source_dim for c in self.components) or len(orders) > 1:
            raise ShapeError("Composantes incompatibles (nombre de variables ou troncature)")
        return self

    # --- constructeurs -------------------------------------------------------

    @classmethod
    def from_components(cls, components: Sequence[Series]) -> "FormalMap":
        components = tuple(components)
        if not components:
            raise ShapeError("Application sans composante")
        return cls(source_dim=components[0].nvars, target_dim=len(components), components=components)

    @classmethod
    def identity(cls, n: int, order: int) -> "FormalMap":
        trunc = Truncation.power_series(n, order)
        return cls.from_components([Series.variable(trunc, k) for k in range(n)])

    @classmethod
    def linear(cls, matrix: Sequence[Sequence], order: int) -> "FormalMap":
        """X^i(u) = Σ_k A_{ik} u^k."""
        m = len(matrix[0])
        trunc = Truncation.power_series(m, order)
        variables = [Series.variable(trunc, k) for k in range(m)]
        return cls.from_components(
            [linear_combine([(Fraction(a), v) for a, v in zip(row, variables)]) for row in matrix]
        )

    @classmethod
    def univariate(cls, coefficients: Sequence, order: int) -> "FormalMap":
        """X(u) = Σ_k c_k u^{k+1} (n = 1)."""
        trunc = Truncation.power_series(1, order)
        terms = {(k + 1,): c for k, c in enumerate(coefficients)}
        return cls.from_components([Series(trunc, terms)])

    @classmethod
    def random(cls, n: int, order: int, rng: random.Random, degree: int = 3, density: float = 0.5) -> "FormalMap":
        """
        Élément aléatoire de G_{0n} : partie linéaire triangulaire à diagonale
        non nulle, termes de degré 2..degree à petits coefficients rationnels.
        """
        trunc = Truncation.power_series(n, order)
        components = []
        for i in range(n):
            terms = {}
            for k in range(n):
                e = tuple(1 if j == k else 0 for j in range(n))
                if k == i:
                    terms[e] = Fraction(rng.choice([1, 2, -1, 3]), rng.choice([1, 2]))
                elif k > i and rng.random() < density:
                    terms[e] = Fraction(rng.randint(-2, 2))
            for exponent in _exponents(n, 2, min(degree, order)):
                if rng.random() < density:
                    terms[exponent] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
            components.append(Series(trunc, terms))
        return cls.from_components(components)

    @classmethod
    def random_jet(cls, m: int, n: int, order: int, rng: "random.Random", degree: int = 3) -> "FormalMap":
        """Jet aléatoire R^m -> R^n avec F(0) = 0 (termes de degré 1..degree)."""
        trunc = Truncation.power_series(m, order)
        components = []
        for _ in range(n):
            terms = {}
            for exponent in _exponents(m, 1, min(degree, order)):
                if rng.random() < 0.5:
                    terms[exponent] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
            components.append(Series(trunc, terms))
        return cls(source_dim=m, target_dim=n, components=components)

    # --- accès -----------------------------------------------------------------

    def __getitem__(self, i: int) -> Series:
        return self.components[i]

    @property
    def order(self) -> int:
        return self.components[0].order

    @property
    def certified_degree(self) -> int:
        return min(c.certified_degree for c in self.components)

    def has_constant_term(self) -> bool:
        return any(c.constant_term() for c in self.components)

    def has_negative_exponents(self) -> bool:
        return any(c.has_negative_exponents() for c in self.components)

    def with_order(self, order: int) -> "FormalMap":
        return FormalMap.from_components([c.with_order(order) for c in self.components])

    def on_block(self, block: int, blocks: int) -> List[Series]:
        """Composantes plongées dans le bloc `block` d'un espace à `blocks` blocs."""
        layout = BlockLayout.embed(self.source_dim, block, blocks)
        return [relabel_blocks(c, layout) for c in self.components]


def _exponents(n: int, low: int, high: int) -> List[Tuple[int, ...]]:
    return [e for degree in range(low, high + 1) for e in multi_indices(n, degree)]


class LinearPart(BaseModel):
    """Matrice X_0 des termes de degré 1 et son déterminant exact."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: Tuple[Tuple[Fraction, ...], ...]
    det: Optional[Fraction] = None
    invertible: bool = False

    def inverse(self) -> Tuple[Tuple[Fraction, ...], ...]:
        if not self.invertible:
            raise SingularJetError(f"Partie linéaire singulière (det = {self.det})")
        inverse = sympy.Matrix(self.matrix).inv()
        return tuple(
            tuple(from_sympy_rational(inverse[i, j]) for j in range(inverse.cols)) for i in range(inverse.rows)
        )


def linear_part(X: FormalMap) -> LinearPart:
    """Extrait X_0 ; le déterminant n'est calculé que pour une matrice carrée."""
    rows = []
    for component in X.components:
        row = []
        for k in range(X.source_dim):
            e = tuple(1 if j == k else 0 for j in range(X.source_dim))
            c = component.coefficient(e)
            if isinstance(c, CoeffPoly):
                if not c.is_constant():
                    raise PreconditionError("Partie linéaire à coefficients symboliques")
                c = c.constant_value()
            row.append(Fraction(c))
        rows.append(tuple(row))
    if X.source_dim != X.target_dim:
        return LinearPart(matrix=tuple(rows))
    det = from_sympy_rational(sympy.Matrix(rows).det())
    return LinearPart(matrix=tuple(rows), det=det, invertible=det != 0)


def check_invertible(X: FormalMap) -> LinearPart:
    """Verdict d'inversibilité : det X_0 ≠ 0."""
    if X.source_dim != X.target_dim:
        raise ShapeError(f"Application {X.source_dim} -> {X.target_dim} non carrée")
    verdict = linear_part(X)
    logger.debug(f"det X_0 = {verdict.det}")
    return verdict


def _require_composable(Y: FormalMap) -> None:
    if Y.has_constant_term():
        raise UnsupportedCompositionError("L'application intérieure a un terme constant")
    if Y.has_negative_exponents():
        raise UnsupportedCompositionError("L'application intérieure est une série de Laurent")


def compose(X: FormalMap, Y: FormalMap) -> FormalMap:
    """Z = X∘Y, Z^i(u) = X^i(Y(u)) ; Y sans terme constant."""
    if X.source_dim != Y.target_dim:
        raise ShapeError(f"Dimensions incompatibles : X part de R^{X.source_dim}, Y arrive dans R^{Y.target_dim}")
    _require_composable(Y)
    if X.order != Y.order:
        X = X.with_order(Y.order)
    return FormalMap.from_components([substitute(c, Y.components) for c in X.components])


def _apply_matrix(matrix: Sequence[Sequence[Fraction]], components: Sequence[Series]) -> List[Series]:
    return [linear_combine(list(zip(row, components))) for row in matrix]


def invert(X: FormalMap) -> FormalMap:
    """
    X̄ tel que X(X̄(u)) = u : départ X̄ = X_0^{-1} u puis corrections
    X̄ += X_0^{-1}(u - X∘X̄), chaque étape fixant un degré de plus.
    """
    if X.source_dim != X.target_dim:
        raise ShapeError(f"Application {X.source_dim} -> {X.target_dim} non inversible")
    _require_composable(X)
    verdict = check_invertible(X)
    if not verdict.invertible:
        raise SingularJetError(f"X_0 singulière : det = {verdict.det}")
    a_inv = verdict.inverse()

    identity = FormalMap.identity(X.source_dim, X.order)
    xbar = _apply_matrix(a_inv, identity.components)
    for step in range(X.order):
        image = compose(X, FormalMap.from_components(xbar))
        defect = [u - z for u, z in zip(identity.components, image.components)]
        if all(d.is_zero() for d in defect):
            logger.debug(f"Inversion convergée après {step} corrections")
            break
        xbar = [x + c for x, c in zip(xbar, _apply_matrix(a_inv, defect))]
    return FormalMap.from_components(xbar)


def derivative_matrix(X: FormalMap) -> SeriesMatrix:
    """(X_{*u})^i_j = ∂X^i/∂u^j."""
    return SeriesMatrix.from_rows(
        [[partial_derivative(c, j) for j in range(X.source_dim)] for c in X.components]
    )


def _matrix_at(matrix: SeriesMatrix, args: Sequence[Series]) -> List[List[Series]]:
    return [[substitute(matrix[i, j], args) for j in range(matrix.cols)] for i in range(matrix.rows)]


def chain_rule_residual(X: FormalMap, Y: FormalMap) -> SeriesMatrix:
    """(X∘Y)_{*u} - X_{*Y(u)} Y_{*u} : nul jusqu'à la troncature."""
    left = derivative_matrix(compose(X, Y))
    outer = SeriesMatrix.from_rows(_matrix_at(derivative_matrix(X.with_order(Y.order)), Y.components))
    right = outer @ derivative_matrix(Y)
    return SeriesMatrix.from_rows(
        [[left[i, j] - right[i, j] for j in range(left.cols)] for i in range(left.rows)]
    )


def transform_bifield(J_u: Sequence[Sequence[Series]], J_v: Sequence[Sequence[Series]], phi_at: Sequence[Sequence[Series]]) -> List[List[Series]]:
    """out^{ij} = Σ_{k,l} J_u[i][k] J_v[j][l] φ^{kl} (facteurs jacobiens à gauche)."""
    rows, inner = len(J_u), len(J_u[0])
    out = []
    for i in range(rows):
        # Σ_k J_u[i][k] φ^{kl}
        partial = [linear_combine([(1, mul(J_u[i][k], phi_at[k][l])) for k in range(inner)]) for l in range(inner)]
        out.append(
            [linear_combine([(1, mul(J_v[j][l], partial[l])) for l in range(inner)]) for j in range(rows)]
        )
    return out


def pushforward_bifield(X: FormalMap, phi: BiField) -> BiField:
    """
    (X·φ)^{ij}(u,v) = (X_{*X̄(u)})^i_k (X_{*X̄(v)})^j_l φ^{kl}(X̄(u), X̄(v)),
    avec X̄ = X^{-1}.
    """
    if phi.dim != X.target_dim:
        raise ShapeError(f"φ de dimension {phi.dim} pour un jet de dimension {X.target_dim}")
    if phi.has_negative_exponents():
        raise UnsupportedCompositionError("Image directe d'une r-matrice de Laurent non supportée")
    xbar = invert(X)
    n = X.target_dim
    args_u = xbar.on_block(0, 2)
    args_v = xbar.on_block(1, 2)
    jacobian = derivative_matrix(X)
    J_u = _matrix_at(jacobian, args_u)
    J_v = _matrix_at(jacobian, args_v)
    phi = phi.with_order(X.order)
    phi_at = [[substitute(phi[k, l], args_u + args_v) for l in range(n)] for k in range(n)]
    out = transform_bifield(J_u, J_v, phi_at)
    return BiField(dim=n, components=out)


def transform_trifield(
    J_u: Sequence[Sequence[Series]],
    J_v: Sequence[Sequence[Series]],
    J_w: Sequence[Sequence[Series]],
    tensor,
) -> List[List[List[Series]]]:
    """out^{ijk} = Σ_{a,b,c} J_u[i][a] J_v[j][b] J_w[k][c] T^{abc}."""
    rows, inner = len(J_u), len(J_u[0])
    # contraction indice par indice : T^{abc} -> T^{ibc} -> T^{ijc} -> T^{ijk}
    first = [[[linear_combine([(1, mul(J_u[i][a], tensor[a][b][c])) for a in range(inner)])
               for c in range(inner)] for b in range(inner)] for i in range(rows)]
    second = [[[linear_combine([(1, mul(J_v[j][b], first[i][b][c])) for b in range(inner)])
                for c in range(inner)] for j in range(rows)] for i in range(rows)]
    return [[[linear_combine([(1, mul(J_w[k][c], second[i][j][c])) for c in range(inner)])
              for k in range(rows)] for j in range(rows)] for i in range(rows)]

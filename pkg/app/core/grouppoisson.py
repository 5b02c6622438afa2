"""
Tenseur de Poisson-Lie Ω sur le groupe des difféomorphismes formels.

Ω^{ij}(u,v) = (X_{*u})^i_k (X_{*v})^j_l φ^{kl}(u,v) - φ^{ij}(X(u), X(v)).
Pour un jet générique (coefficients x^i_I indéterminés), le coefficient de
u^I v^J dans Ω^{ij} est le crochet {x^i_I, x^j_J} des coordonnées.
"""
import logging
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.core.coefficients import CoeffPoly, Coefficient, GroupCoordinate, Monomial
from app.core.fields import BiField
from app.core.jetgroup import FormalMap, compose, derivative_matrix, transform_bifield
from app.core.series import BlockLayout, Series, Truncation, relabel_blocks, substitute
from app.utils.helpers import multi_indices_upto
from app.utils.validators import OutOfRangeError, ShapeError, UnsupportedCompositionError

logger = logging.getLogger(__name__)


class SymbolicJet(BaseModel):
    """
    Élément générique de G_{0n} (ou de G_n avec termes constants) tronqué au
    degré max_degree : le coefficient de u^I dans X^i est l'indéterminée x^i_I.
    """
    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=1)
    max_degree: int = Field(..., ge=1)
    include_constant: bool = False
    symbol: str = "x"

    @property
    def min_degree(self) -> int:
        return 0 if self.include_constant else 1

    def coordinate(self, component: int, index: Sequence[int]) -> GroupCoordinate:
        return GroupCoordinate(self.symbol, component, tuple(index))

    def coordinates(self) -> List[GroupCoordinate]:
        return [
            self.coordinate(i + 1, index)
            for i in range(self.dim)
            for index in multi_indices_upto(self.dim, self.max_degree, self.min_degree)
        ]

    def as_map(self) -> FormalMap:
        # les termes au-delà de max_degree sont inconnus : précision = max_degree
        trunc = Truncation.power_series(self.dim, self.max_degree)
        components = []
        for i in range(self.dim):
            terms = {
                index: CoeffPoly.variable(self.coordinate(i + 1, index))
                for index in multi_indices_upto(self.dim, self.max_degree, self.min_degree)
            }
            components.append(Series(trunc, terms, precision=self.max_degree))
        return FormalMap.from_components(components)

    def assignment(self, X: FormalMap) -> Dict[GroupCoordinate, Fraction]:
        """Valeurs des coordonnées x^i_I pour un jet numérique X."""
        if X.target_dim != self.dim or X.source_dim != self.dim:
            raise ShapeError(f"Jet de dimension {X.target_dim} pour des coordonnées de dimension {self.dim}")
        values = {}
        for coord in self.coordinates():
            c = X[coord.component - 1].coefficient(coord.index)
            values[coord] = Fraction(c)
        return values


class BracketEntry(BaseModel):
    """Une entrée {x_A, x_B} = ω^{AB}(x) de la table des crochets."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a: GroupCoordinate
    b: GroupCoordinate
    poly: CoeffPoly


def _omega(phi: BiField, X: FormalMap) -> BiField:
    if phi.dim != X.target_dim or X.source_dim != X.target_dim:
        raise ShapeError(f"φ de dimension {phi.dim} pour un jet {X.source_dim} -> {X.target_dim}")
    if phi.has_negative_exponents():
        raise UnsupportedCompositionError("Ω n'est défini que pour une r-matrice polynomiale")
    n = phi.dim
    phi = phi.with_order(X.order)
    jacobian = derivative_matrix(X)
    J_u = [[relabel_blocks(jacobian[i, k], BlockLayout.embed(n, 0, 2)) for k in range(n)] for i in range(n)]
    J_v = [[relabel_blocks(jacobian[i, k], BlockLayout.embed(n, 1, 2)) for k in range(n)] for i in range(n)]
    transformed = transform_bifield(J_u, J_v, [[phi[k, l] for l in range(n)] for k in range(n)])
    args = X.on_block(0, 2) + X.on_block(1, 2)
    return BiField.build(n, lambda i, j: transformed[i][j] - substitute(phi[i, j], args))


def omega_bifield(phi: BiField, jet: SymbolicJet) -> BiField:
    """Ω pour le jet générique : coefficients polynomiaux en x^i_I."""
    omega = _omega(phi, jet.as_map())
    logger.info(
        f"Ω symbolique n={jet.dim} (G_{'' if jet.include_constant else '0'}{jet.dim}) "
        f"certifié jusqu'au degré {omega.certified_degree}"
    )
    return omega


def omega_numeric(phi: BiField, X: FormalMap) -> BiField:
    """Ω pour un jet numérique X."""
    return _omega(phi, X)


def specialize(omega: BiField, values: Dict[GroupCoordinate, Fraction]) -> BiField:
    """Remplace chaque indéterminée par sa valeur."""
    def evaluate(c: Coefficient):
        return c.evaluate(values) if isinstance(c, CoeffPoly) else c

    return omega.map(lambda s: s.map_coefficients(evaluate))


def _as_poly(c: Coefficient) -> CoeffPoly:
    return c if isinstance(c, CoeffPoly) else CoeffPoly.constant(c)


def bracket_coefficient(omega: BiField, i: int, I: Sequence[int], j: int, J: Sequence[int]) -> CoeffPoly:
    """ω^{(i,I)(j,J)}(x) : coefficient de u^I v^J dans Ω^{ij} (i, j à partir de 1)."""
    n = omega.dim
    if not (1 <= i <= n and 1 <= j <= n):
        raise ShapeError(f"Composantes ({i}, {j}) hors de 1..{n}")
    I, J = tuple(I), tuple(J)
    if len(I) != n or len(J) != n:
        raise ShapeError(f"Multi-indices {I}, {J} de longueur différente de {n}")
    component = omega[i - 1, j - 1]
    degree = sum(I) + sum(J)
    if degree > component.certified_degree:
        raise OutOfRangeError(
            f"{{x^{i}_{I}, x^{j}_{J}}} demande le degré {degree} > degré certifié {component.certified_degree}"
        )
    return _as_poly(component.coefficient(I + J))


def bracket_of(omega: BiField, a: GroupCoordinate, b: GroupCoordinate) -> CoeffPoly:
    return bracket_coefficient(omega, a.component, a.index, b.component, b.index)


def bracket_table(omega: BiField, bound: int, include_constant: bool = False, symbol: str = "x") -> List[BracketEntry]:
    """Crochets non nuls {x_A, x_B}, A < B, pour |A|, |B| ≤ bound."""
    n = omega.dim
    low = 0 if include_constant else 1
    coords = [
        GroupCoordinate(symbol, i + 1, index)
        for index in multi_indices_upto(n, bound, low)
        for i in range(n)
    ]
    entries = []
    for p, a in enumerate(coords):
        for b in coords[p + 1:]:
            poly = bracket_of(omega, a, b)
            if poly:
                entries.append(BracketEntry(a=a, b=b, poly=poly))
    logger.debug(f"Table des crochets : {len(entries)} entrées non nulles (borne {bound})")
    return entries


def bracket_weight(monomial: Monomial, n: int) -> Tuple[int, ...]:
    """Multi-poids Σ (K - e_i) d'un monôme en coordonnées x^i_K."""
    weight = [0] * n
    for coord, power in monomial:
        for k in range(n):
            weight[k] += power * (coord.index[k] - (1 if k == coord.component - 1 else 0))
    return tuple(weight)


def bracket_weights(poly: CoeffPoly, n: int) -> Set[Tuple[int, ...]]:
    return {bracket_weight(mono, n) for mono, _ in poly.items()}


def expected_weights(i: int, I: Sequence[int], j: int, J: Sequence[int], rows: Iterable[Sequence[int]]) -> Set[Tuple[int, ...]]:
    """Poids I + J - e_i - e_j - d_k admis pour ω^{(i,I)(j,J)} et φ canonique."""
    n = len(I)
    base = [I[k] + J[k] - (1 if k == i - 1 else 0) - (1 if k == j - 1 else 0) for k in range(n)]
    return {tuple(b - d for b, d in zip(base, row)) for row in rows}


def multiplicativity_residual(phi: BiField, X: FormalMap, Y: FormalMap) -> BiField:
    """Ω(X∘Y) - Ω(X)(Y(u),Y(v)) - X_{*Y(u)} X_{*Y(v)} Ω(Y)."""
    Z = compose(X, Y)
    n = phi.dim
    omega_z = omega_numeric(phi, Z)
    omega_x = omega_numeric(phi, X.with_order(Y.order))
    omega_y = omega_numeric(phi, Y)
    args = Y.on_block(0, 2) + Y.on_block(1, 2)
    jacobian = derivative_matrix(X.with_order(Y.order))
    y_u, y_v = Y.on_block(0, 2), Y.on_block(1, 2)
    J_u = [[substitute(jacobian[i, k], y_u) for k in range(n)] for i in range(n)]
    J_v = [[substitute(jacobian[i, k], y_v) for k in range(n)] for i in range(n)]
    moved = transform_bifield(J_u, J_v, [[omega_y[k, l] for l in range(n)] for k in range(n)])
    return BiField.build(
        n, lambda i, j: omega_z[i, j] - substitute(omega_x[i, j], args) - moved[i][j]
    )


def coordinate_jacobi_residual(omega: BiField, triple: Tuple[GroupCoordinate, GroupCoordinate, GroupCoordinate]) -> CoeffPoly:
    """
    {{x_A,x_B},x_C} + cycle, avec {{x_A,x_B},x_C} = Σ_E ∂ω^{AB}/∂x_E · ω^{EC}.
    """
    a, b, c = triple
    total = CoeffPoly()
    for first, second, third in ((a, b, c), (b, c, a), (c, a, b)):
        inner = bracket_of(omega, first, second)
        for coord in sorted(inner.variables()):
            total = total + inner.derivative(coord) * bracket_of(omega, coord, third)
    return total


def coordinate(component: int, index: Sequence[int], symbol: str = "x") -> GroupCoordinate:
    return GroupCoordinate(symbol, component, tuple(index))

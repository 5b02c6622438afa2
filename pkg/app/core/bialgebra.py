"""
r-matrices triangulaires de W_n et opérateurs de bigèbre de Lie.

Constructions (générateurs F, paires Θ/Ψ, famille W_1), résidu de
Yang-Baxter classique Φ^{ijk}, crochet de champs de vecteurs, action
adjointe sur les bi-champs, cobord et résidus associés.
"""
import logging
import random
from fractions import Fraction
from typing import Callable, Dict, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.core.fields import BiField, TriField, VectorField
from app.core.jetgroup import FormalMap, derivative_matrix, pushforward_bifield, transform_trifield
from app.core.series import (
    BlockLayout,
    Series,
    SeriesMatrix,
    Truncation,
    invert_unit,
    linear_combine,
    matrix_inverse,
    mul,
    partial_derivative,
    relabel_blocks,
    substitute,
)
from app.utils.helpers import multi_indices_upto
from app.utils.validators import (
    OutOfModuliError,
    PreconditionError,
    ShapeError,
    SingularGeneratorError,
    SingularMatrixError,
    UnitError,
    UnsupportedCompositionError,
)

logger = logging.getLogger(__name__)

# Élargissements successifs de l'ordre de travail pour les calculs de Laurent
MAX_WIDENINGS = 3


class GeneratorTuple(BaseModel):
    """Générateurs F^1..F^n (éventuellement de Laurent) en n variables."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    generators: Tuple[Series, ...]

    @field_validator("generators", mode="before")
    @classmethod
    def _to_tuple(cls, value):
        return tuple(value)

    @model_validator(mode="after")
    def _check_generators(self) -> "GeneratorTuple":
        n = len(self.generators)
        if n == 0:
            raise ShapeError("Aucun générateur")
        if any(g.nvars != n for g in self.generators):
            raise ShapeError(f"{n} générateurs doivent dépendre de {n} variables")
        if len({g.order for g in self.generators}) > 1:
            raise ShapeError("Générateurs de troncatures différentes")
        return self

    @property
    def dim(self) -> int:
        return len(self.generators)

    @property
    def order(self) -> int:
        return self.generators[0].order

    @property
    def is_exact(self) -> bool:
        return all(g.is_exact for g in self.generators)

    def __getitem__(self, i: int) -> Series:
        return self.generators[i]

    def with_order(self, order: int) -> "GeneratorTuple":
        return GeneratorTuple(generators=[g.with_order(order) for g in self.generators])

    def jacobian(self) -> SeriesMatrix:
        return derivative_matrix(FormalMap.from_components(self.generators))

    @classmethod
    def perturbed_identity(cls, n: int, order: int, rng: random.Random, degree: int = 3) -> "GeneratorTuple":
        """F^i = u^i + termes aléatoires de degré 2..degree (jacobien unité)."""
        trunc = Truncation.power_series(n, order)
        generators = []
        for i in range(n):
            terms = {tuple(1 if j == i else 0 for j in range(n)): Fraction(1)}
            for exponent in multi_indices_upto(n, min(degree, order), 2):
                if rng.random() < 0.4:
                    terms[exponent] = Fraction(rng.randint(-2, 2), rng.randint(1, 2))
            generators.append(Series(trunc, terms))
        return cls(generators=generators)


class ThetaPsiPair(BaseModel):
    """Paire (Θ, Ψ) et constantes α, β du système linéaire associé."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta: Tuple[Series, ...]
    psi: Tuple[Series, ...]
    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(1)

    @field_validator("theta", "psi", mode="before")
    @classmethod
    def _to_tuple(cls, value):
        return tuple(value)

    @field_validator("alpha", "beta", mode="before")
    @classmethod
    def _to_fraction(cls, value):
        return Fraction(value)

    @model_validator(mode="after")
    def _check_pair(self) -> "ThetaPsiPair":
        n = len(self.theta)
        if n == 0 or len(self.psi) != n:
            raise ShapeError(f"Θ et Ψ de longueurs {n} et {len(self.psi)}")
        if any(s.nvars != n for s in self.theta + self.psi):
            raise ShapeError(f"Θ et Ψ doivent dépendre de {n} variables")
        return self

    @property
    def dim(self) -> int:
        return len(self.theta)

    @property
    def order(self) -> int:
        return self.theta[0].order

    @property
    def certified_degree(self) -> int:
        return min(s.certified_degree for s in self.theta + self.psi)

    def with_order(self, order: int) -> "ThetaPsiPair":
        return ThetaPsiPair(
            theta=[s.with_order(order) for s in self.theta],
            psi=[s.with_order(order) for s in self.psi],
            alpha=self.alpha,
            beta=self.beta,
        )


def _laurent_slack(series: Sequence[Series], n: int) -> int:
    lows = [s.valuation() for s in series if not s.is_zero()]
    low = min([0] + lows)
    return 2 * n * (1 - low) if low < 0 else 0


def _widening(build: Callable[[int], object], order: int, slack: int, exact: bool, n: int):
    """
    Calcule `build(W)` à un ordre de travail W = order + slack puis retronque
    à `order`. Pour des données exactes, W est élargi tant que le résultat
    n'est pas certifié jusqu'à `order`.
    """
    for attempt in range(MAX_WIDENINGS + 1):
        result = build(order + slack).with_order(order)
        if not exact or slack == 0 or result.certified_degree >= order:
            return result
        logger.debug(f"Ordre de travail {order + slack} insuffisant (degré certifié {result.certified_degree})")
        slack = 2 * slack + 2 * n
    logger.warning(f"Degré certifié {result.certified_degree} < {order} après élargissement")
    return result


def _u_block(f: Series, n: int, blocks: int = 2) -> Series:
    return relabel_blocks(f, BlockLayout.embed(n, 0, blocks))


def _v_block(f: Series, n: int, blocks: int = 2) -> Series:
    return relabel_blocks(f, BlockLayout.embed(n, 1, blocks))


# --- constructions -------------------------------------------------------------


def theta_psi_from_generators(F: GeneratorTuple) -> ThetaPsiPair:
    """Θ^i = Σ_k (F_{*u}^{-1})^i_k F^k, Ψ^i = Σ_k (F_{*u}^{-1})^i_k, α = 0, β = 1."""
    n = F.dim

    def build(work_order: int) -> ThetaPsiPair:
        G = F.with_order(work_order)
        try:
            inverse, _ = matrix_inverse(G.jacobian())
        except SingularMatrixError as exc:
            raise SingularGeneratorError(f"Jacobien des générateurs non inversible : {exc}")
        theta = [linear_combine([(1, mul(inverse[i, k], G[k])) for k in range(n)]) for i in range(n)]
        psi = [linear_combine([(1, inverse[i, k]) for k in range(n)]) for i in range(n)]
        return ThetaPsiPair(theta=theta, psi=psi, alpha=0, beta=1)

    slack = _laurent_slack(F.generators, n)
    pair = _widening(build, F.order, slack, F.is_exact, n)
    logger.debug(f"Paire Θ/Ψ construite (n={n}, degré certifié {pair.certified_degree})")
    return pair


def rmatrix_from_theta_psi(pair: ThetaPsiPair) -> BiField:
    """φ^{ij}(u,v) = Θ^i(u)Ψ^j(v) - Θ^j(v)Ψ^i(u)."""
    n = pair.dim
    theta_u = [_u_block(s, n) for s in pair.theta]
    theta_v = [_v_block(s, n) for s in pair.theta]
    psi_u = [_u_block(s, n) for s in pair.psi]
    psi_v = [_v_block(s, n) for s in pair.psi]
    return BiField.build(
        n, lambda i, j: mul(theta_u[i], psi_v[j]) - mul(theta_v[j], psi_u[i])
    )


def rmatrix_from_generators(F: GeneratorTuple) -> BiField:
    """
    φ^{ij}(u,v) = Σ_{k,l} (F_{*u}^{-1})^i_k (F_{*v}^{-1})^j_l [F^k(u) - F^l(v)],
    calculé sous la forme factorisée Θ^i(u)Ψ^j(v) - Θ^j(v)Ψ^i(u).
    """
    return rmatrix_from_theta_psi(theta_psi_from_generators(F))


def theta_psi_residual(pair: ThetaPsiPair) -> VectorField:
    """Ψ^s ∂_s Θ^i - Θ^s ∂_s Ψ^i - αΘ^i - βΨ^i."""
    n = pair.dim
    components = []
    for i in range(n):
        pieces = []
        for s in range(n):
            pieces.append((1, mul(pair.psi[s], partial_derivative(pair.theta[i], s))))
            pieces.append((-1, mul(pair.theta[s], partial_derivative(pair.psi[i], s))))
        pieces.append((-pair.alpha, pair.theta[i]))
        pieces.append((-pair.beta, pair.psi[i]))
        components.append(linear_combine(pieces))
    return VectorField(dim=n, components=components)


def w1_general(F: Series) -> BiField:
    """φ(u,v) = (1/F'(u))(1/F'(v))[F(u) - F(v)] pour un générateur d'une variable."""
    if F.nvars != 1:
        raise ShapeError(f"Générateur à {F.nvars} variables, une seule attendue")

    def build(work_order: int) -> BiField:
        G = F.with_order(work_order)
        try:
            g = invert_unit(partial_derivative(G, 0))
        except UnitError as exc:
            raise SingularGeneratorError(f"F' n'est pas une unité : {exc}")
        weight = mul(_u_block(g, 1), _v_block(g, 1))
        return BiField(dim=1, components=((mul(weight, _u_block(G, 1) - _v_block(G, 1)),),))

    return _widening(build, F.order, _laurent_slack([F], 2), F.is_exact, 2)


def w1_canonical(d: int, order: int = 8, allow_laurent: bool = False) -> BiField:
    """
    Représentant canonique φ(u,v) = (1/d²)(u^{d+1}v - uv^{d+1}) ; d = 0 donne la
    solution triviale. Pour d < -1 le représentant est de Laurent.
    """
    if d < -1 and not allow_laurent:
        raise OutOfModuliError(f"d = {d} hors de Z+ ∪ {{-1}}")
    trunc = Truncation.power_series(2, order)
    if d == 0:
        return BiField(dim=1, components=((Series.zero(trunc),),))
    scale = Fraction(1, d * d)
    left = Series.monomial(trunc, (d + 1, 1), scale)
    right = Series.monomial(trunc, (1, d + 1), -scale)
    return BiField(dim=1, components=((left + right,),))


# --- résidu de Yang-Baxter ------------------------------------------------------------


class _ThreePointCache:
    """φ^{ij} placé sur un couple de blocs (u, v, w) et ses dérivées."""

    def __init__(self, phi: BiField):
        self.phi = phi
        self.n = phi.dim
        self._placed: Dict[Tuple[int, int, int, int], Series] = {}
        self._derived: Dict[Tuple[int, int, int, int, int], Series] = {}

    def at(self, i: int, j: int, first: int, second: int) -> Series:
        key = (i, j, first, second)
        if key not in self._placed:
            layout = BlockLayout.pair(self.n, first, second, 3)
            self._placed[key] = relabel_blocks(self.phi[i, j], layout)
        return self._placed[key]

    def d(self, block: int, s: int, i: int, j: int, first: int, second: int) -> Series:
        key = (i, j, first, second, block * self.n + s)
        if key not in self._derived:
            self._derived[key] = partial_derivative(self.at(i, j, first, second), block * self.n + s)
        return self._derived[key]


U, V, W = 0, 1, 2


def _require_skew(phi: BiField) -> None:
    if not phi.is_skew():
        raise PreconditionError("φ n'est pas antisymétrique : φ^{ij}(u,v) ≠ -φ^{ji}(v,u)")


def cybe_residual(phi: BiField) -> TriField:
    """
    Φ^{ijk}(u,v,w), somme sur s des six termes :
    φ^{ks}(w,u)∂_{u^s}φ^{ij}(u,v) + φ^{sk}(v,w)∂_{v^s}φ^{ji}(v,u)
    + φ^{is}(u,v)∂_{v^s}φ^{jk}(v,w) + φ^{si}(w,u)∂_{w^s}φ^{kj}(w,v)
    + φ^{js}(v,w)∂_{w^s}φ^{ki}(w,u) + φ^{sj}(u,v)∂_{u^s}φ^{ik}(u,w).
    """
    _require_skew(phi)
    n = phi.dim
    c = _ThreePointCache(phi)

    def component(i: int, j: int, k: int) -> Series:
        pieces = []
        for s in range(n):
            pieces.append(mul(c.at(k, s, W, U), c.d(U, s, i, j, U, V)))
            pieces.append(mul(c.at(s, k, V, W), c.d(V, s, j, i, V, U)))
            pieces.append(mul(c.at(i, s, U, V), c.d(V, s, j, k, V, W)))
            pieces.append(mul(c.at(s, i, W, U), c.d(W, s, k, j, W, V)))
            pieces.append(mul(c.at(j, s, V, W), c.d(W, s, k, i, W, U)))
            pieces.append(mul(c.at(s, j, U, V), c.d(U, s, i, k, U, W)))
        return linear_combine([(1, p) for p in pieces])

    residual = TriField.build(n, component)
    logger.debug(f"Résidu CYBE n={n} : degré certifié {residual.certified_degree}")
    return residual


def weak_diagonal_residual(phi: BiField) -> Series:
    """
    Équation diagonale faible (n = 1) :
    ∂_vφ·∂_uφ - φ·∂_u∂_vφ + f'(v)φ - f(v)∂_vφ avec f(v) = (∂_uφ)(v,v).
    """
    if phi.dim != 1:
        raise UnsupportedCompositionError(f"Équation diagonale faible définie pour n=1, reçu n={phi.dim}")
    _require_skew(phi)
    f = phi[0, 0]
    du = partial_derivative(f, 0)
    dv = partial_derivative(f, 1)
    duv = partial_derivative(du, 1)
    v = Series.variable(Truncation.power_series(2, f.order), 1)
    diag = substitute(du, [v, v])
    diag_prime = partial_derivative(diag, 1)
    return linear_combine([
        (1, mul(dv, du)),
        (-1, mul(f, duv)),
        (1, mul(diag_prime, f)),
        (-1, mul(diag, dv)),
    ])


# --- bigèbre de Lie ----------------------------------------------------------------------


def _same_order(X: VectorField, order: int) -> VectorField:
    return X if X.order == order else X.with_order(order)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X,Y]^j = X^i ∂_i Y^j - Y^i ∂_i X^j."""
    if X.dim != Y.dim:
        raise ShapeError(f"Champs de dimensions {X.dim} et {Y.dim}")
    Y = _same_order(Y, X.order)
    n = X.dim
    return VectorField.build(n, lambda j: linear_combine(
        [(1, mul(X[i], partial_derivative(Y[j], i))) for i in range(n)]
        + [(-1, mul(Y[i], partial_derivative(X[j], i))) for i in range(n)]
    ))


def ad_on_bifield(X: VectorField, phi: BiField) -> BiField:
    """
    (ad_X φ)^{ij} = X^k(u)∂_{u^k}φ^{ij} - φ^{kj}∂_kX^i(u)
                  + X^k(v)∂_{v^k}φ^{ij} - φ^{ik}∂_kX^j(v).
    """
    if X.dim != phi.dim:
        raise ShapeError(f"Champ de dimension {X.dim}, φ de dimension {phi.dim}")
    n = X.dim
    X = _same_order(X, phi.order)
    x_u = [_u_block(X[k], n) for k in range(n)]
    x_v = [_v_block(X[k], n) for k in range(n)]
    dx_u = [[partial_derivative(x_u[i], k) for k in range(n)] for i in range(n)]
    dx_v = [[partial_derivative(x_v[i], n + k) for k in range(n)] for i in range(n)]

    def component(i: int, j: int) -> Series:
        pieces = []
        for k in range(n):
            pieces.append((1, mul(x_u[k], partial_derivative(phi[i, j], k))))
            pieces.append((-1, mul(phi[k, j], dx_u[i][k])))
            pieces.append((1, mul(x_v[k], partial_derivative(phi[i, j], n + k))))
            pieces.append((-1, mul(phi[i, k], dx_v[j][k])))
        return linear_combine(pieces)

    return BiField.build(n, component)


def coboundary_delta(X: VectorField, phi: BiField) -> BiField:
    """Cobord δ(X) = ad_X φ."""
    return ad_on_bifield(X, phi)


def cocycle_residual(phi: BiField, X: VectorField, Y: VectorField) -> BiField:
    """δ([X,Y]) - (ad_X δ(Y) - ad_Y δ(X)) : identiquement nul."""
    bracket = lie_bracket(X, Y)
    left = coboundary_delta(bracket, phi)
    right = ad_on_bifield(X, coboundary_delta(Y, phi)) - ad_on_bifield(Y, coboundary_delta(X, phi))
    return left - right


def gcybe_invariance_residual(phi: BiField, X: VectorField) -> TriField:
    """
    Dérivée de Lie de Φ = cybe_residual(φ) le long de X agissant sur les trois
    points : Σ_s X^s(u)∂_{u^s}Φ^{ijk} + ... - Φ^{sjk}∂_sX^i(u) - Φ^{isk}∂_sX^j(v)
    - Φ^{ijs}∂_sX^k(w).
    """
    if X.dim != phi.dim:
        raise ShapeError(f"Champ de dimension {X.dim}, φ de dimension {phi.dim}")
    Phi = cybe_residual(phi)
    n = phi.dim
    X = _same_order(X, phi.order)
    placed = [[relabel_blocks(X[s], BlockLayout.embed(n, b, 3)) for s in range(n)] for b in range(3)]
    jac = [[[partial_derivative(placed[b][i], b * n + s) for s in range(n)] for i in range(n)] for b in range(3)]

    def component(i: int, j: int, k: int) -> Series:
        pieces = []
        for s in range(n):
            for b in range(3):
                pieces.append((1, mul(placed[b][s], partial_derivative(Phi[i, j, k], b * n + s))))
            pieces.append((-1, mul(Phi[s, j, k], jac[0][i][s])))
            pieces.append((-1, mul(Phi[i, s, k], jac[1][j][s])))
            pieces.append((-1, mul(Phi[i, j, s], jac[2][k][s])))
        return linear_combine(pieces)

    return TriField.build(n, component)


def phi_invariance_residual(phi: BiField, X: FormalMap) -> TriField:
    """
    Équivariance du résidu sous l'action de G_{0n} :
    Φ_{X·φ}(X(u),X(v),X(w)) - X_{*u}X_{*v}X_{*w} Φ_φ(u,v,w).
    """
    pushed = pushforward_bifield(X, phi)
    left_raw = cybe_residual(pushed)
    right_raw = cybe_residual(phi.with_order(X.order))
    n = phi.dim
    args = X.on_block(0, 3) + X.on_block(1, 3) + X.on_block(2, 3)
    jacobian = derivative_matrix(X)
    J_u, J_v, J_w = (
        [[relabel_blocks(jacobian[i, a], BlockLayout.embed(n, b, 3)) for a in range(n)] for i in range(n)]
        for b in range(3)
    )
    tensor = [[[right_raw[a, b, c] for c in range(n)] for b in range(n)] for a in range(n)]
    moved = transform_trifield(J_u, J_v, J_w, tensor)
    return TriField.build(n, lambda i, j, k: substitute(left_raw[i, j, k], args) - moved[i][j][k])

"""
Structures induites par une r-matrice : bivecteur α sur R^n et espace
homogène des jets J^N_0(R^m, R^n) muni du tenseur Π.

Les jets F : R^m -> R^n sont des FormalMap sans terme constant ; G_{0m}
agit à droite et G_{0n} à gauche par (X, Y)·F = Y∘F∘X̄.
"""
import logging
from typing import Callable, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from app.core.bialgebra import cybe_residual
from app.core.fields import BiField, BiVectorOnSpace, JacobiTensor, JetBiField, JetTriField
from app.core.grouppoisson import omega_numeric
from app.core.jetgroup import (
    FormalMap,
    compose,
    derivative_matrix,
    invert,
    transform_bifield,
    transform_trifield,
)
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
from app.utils.validators import PreconditionError, ShapeError, UnitError, UnsupportedCompositionError

logger = logging.getLogger(__name__)

PiRule = Callable[[FormalMap], JetBiField]


# --- bivecteur induit ----------------------------------------------------------------


def _diagonal(n: int, order: int) -> List[Series]:
    """Arguments (u, u) : les deux blocs reçoivent les mêmes variables."""
    trunc = Truncation.power_series(n, order)
    u = [Series.variable(trunc, k) for k in range(n)]
    return u + u


def induced_alpha(phi: BiField) -> BiVectorOnSpace:
    """α^{ij}(u) = -φ^{ij}(u,u)."""
    if not phi.is_skew():
        raise PreconditionError("φ n'est pas antisymétrique")
    args = _diagonal(phi.dim, phi.order)
    return BiVectorOnSpace.build(phi.dim, lambda i, j: -substitute(phi[i, j], args))


def alpha_jacobi_residual(alpha: BiVectorOnSpace) -> JacobiTensor:
    """J^{ijk} = α^{ks}∂_sα^{ij} + α^{is}∂_sα^{jk} + α^{js}∂_sα^{ki}."""
    n = alpha.dim
    derived = {
        (i, j, s): partial_derivative(alpha[i, j], s)
        for i in range(n) for j in range(n) for s in range(n)
    }

    def component(i: int, j: int, k: int) -> Series:
        pieces = []
        for s in range(n):
            pieces.append((1, mul(alpha[k, s], derived[i, j, s])))
            pieces.append((1, mul(alpha[i, s], derived[j, k, s])))
            pieces.append((1, mul(alpha[j, s], derived[k, i, s])))
        return linear_combine(pieces)

    return JacobiTensor.build(n, component)


def alpha_action_residual(phi: BiField, X: FormalMap) -> BiVectorOnSpace:
    """
    α(X(u)) - Ω(X)(u,u) - X_{*u}X_{*u}α(u) : nul pour tout X de G_{0n},
    l'application u ↦ X(u) est alors un morphisme de Poisson vers R^n.
    """
    if X.target_dim != phi.dim:
        raise ShapeError(f"Jet de dimension {X.target_dim} pour φ de dimension {phi.dim}")
    n = phi.dim
    alpha = induced_alpha(phi.with_order(X.order))
    omega = omega_numeric(phi, X)
    diagonal = _diagonal(n, X.order)
    jacobian = derivative_matrix(X)
    J = [[jacobian[i, k] for k in range(n)] for i in range(n)]
    moved = transform_bifield(J, J, [[alpha[k, l] for l in range(n)] for k in range(n)])
    return BiVectorOnSpace.build(
        n,
        lambda i, j: substitute(alpha[i, j], X.components)
        - substitute(omega[i, j], diagonal)
        - moved[i][j],
    )


# --- espace homogène des jets -----------------------------------------------------------


def _check_jet(F: FormalMap, phi_m: BiField, phi_n: BiField) -> None:
    if F.source_dim != phi_m.dim or F.target_dim != phi_n.dim:
        raise ShapeError(
            f"Jet {F.source_dim} -> {F.target_dim} pour φ_m de dimension {phi_m.dim} "
            f"et φ_n de dimension {phi_n.dim}"
        )
    if F.has_constant_term():
        raise PreconditionError("Le jet F doit vérifier F(0) = 0")


def _jacobian_on_block(F: FormalMap, block: int, blocks: int) -> List[List[Series]]:
    """F_* (matrice n×m) exprimée dans le bloc `block`."""
    jacobian = derivative_matrix(F)
    layout = BlockLayout.embed(F.source_dim, block, blocks)
    return [[relabel_blocks(jacobian[i, a], layout) for a in range(jacobian.cols)] for i in range(jacobian.rows)]


def _matrix_at(matrix: SeriesMatrix, args: Sequence[Series]) -> List[List[Series]]:
    return [[substitute(matrix[i, j], args) for j in range(matrix.cols)] for i in range(matrix.rows)]


def _substitute_laurent(f: Series, args: Sequence[Series]) -> Series:
    try:
        return substitute(f, args)
    except UnitError as exc:
        raise UnsupportedCompositionError(f"Composition de Laurent non supportée : {exc}")


def jet_pi(F: FormalMap, phi_m: BiField, phi_n: BiField) -> JetBiField:
    """Π^{ij}(u,v) = (F_{*u})^i_a (F_{*v})^j_b φ_m^{ab}(u,v) - φ_n^{ij}(F(u), F(v))."""
    _check_jet(F, phi_m, phi_n)
    m, n = F.source_dim, F.target_dim
    phi_m = phi_m.with_order(F.order)
    phi_n = phi_n.with_order(F.order)
    J_u = _jacobian_on_block(F, 0, 2)
    J_v = _jacobian_on_block(F, 1, 2)
    moved = transform_bifield(J_u, J_v, [[phi_m[a, b] for b in range(m)] for a in range(m)])
    args = F.on_block(0, 2) + F.on_block(1, 2)
    return JetBiField.build(
        n,
        lambda i, j: moved[i][j] - _substitute_laurent(phi_n[i, j], args),
        source_dim=m,
    )


def jet_action_residual(
    phi_m: BiField,
    phi_n: BiField,
    X: FormalMap,
    Y: FormalMap,
    F: FormalMap,
    pi_rule: Optional[PiRule] = None,
) -> JetBiField:
    """
    Π(Y∘F∘X̄) - [Y_{*}Y_{*}Π(F)(X̄u, X̄v) + (Y_*F_*)(Y_*F_*)Ω_m(X̄) + Ω_n(Y)(FX̄u, FX̄v)].

    `pi_rule` remplace la règle Π (par défaut `jet_pi`) ; une règle fausse
    laisse un résidu non nul.
    """
    _check_jet(F, phi_m, phi_n)
    if X.source_dim != F.source_dim or Y.source_dim != F.target_dim:
        raise ShapeError(
            f"X ∈ G_0{X.source_dim}, Y ∈ G_0{Y.source_dim} incompatibles avec un jet "
            f"{F.source_dim} -> {F.target_dim}"
        )
    if pi_rule is None:
        def pi_rule(G: FormalMap) -> JetBiField:
            return jet_pi(G, phi_m, phi_n)

    order = min(X.order, Y.order, F.order)
    X, Y, F = X.with_order(order), Y.with_order(order), F.with_order(order)
    m, n = F.source_dim, F.target_dim

    xbar = invert(X)
    inner = compose(F, xbar)
    moved_jet = compose(Y, inner)
    xbar_uv = xbar.on_block(0, 2) + xbar.on_block(1, 2)
    inner_u, inner_v = inner.on_block(0, 2), inner.on_block(1, 2)

    # Y_*(F X̄ u) Y_*(F X̄ v) Π(F)(X̄u, X̄v)
    pi_f = pi_rule(F)
    pi_at = [[substitute(pi_f[a, b], xbar_uv) for b in range(n)] for a in range(n)]
    y_jacobian = derivative_matrix(Y)
    first = transform_bifield(_matrix_at(y_jacobian, inner_u), _matrix_at(y_jacobian, inner_v), pi_at)

    # (Y∘F)_*(X̄u) (Y∘F)_*(X̄v) Ω_m(X̄)(u,v)
    yf_jacobian = derivative_matrix(compose(Y, F))
    omega_m = omega_numeric(phi_m, xbar)
    second = transform_bifield(
        _matrix_at(yf_jacobian, xbar.on_block(0, 2)),
        _matrix_at(yf_jacobian, xbar.on_block(1, 2)),
        [[omega_m[a, b] for b in range(m)] for a in range(m)],
    )

    # Ω_n(Y)(F X̄ u, F X̄ v)
    omega_n = omega_numeric(phi_n, Y)
    inner_uv = inner_u + inner_v

    pi_moved = pi_rule(moved_jet)
    residual = JetBiField.build(
        n,
        lambda i, j: linear_combine([
            (1, pi_moved[i, j]),
            (-1, first[i][j]),
            (-1, second[i][j]),
            (-1, substitute(omega_n[i, j], inner_uv)),
        ]),
        source_dim=m,
    )
    logger.debug(f"Résidu d'action sur les jets : degré certifié {residual.certified_degree}")
    return residual


class PiJacobiCertificate(BaseModel):
    """
    Certificat de Jacobi pour Π : Φ_n(F(u),F(v),F(w)) = F_*F_*F_* Φ_m(u,v,w),
    ou bien φ_m et φ_n résolvent toutes deux l'équation de Yang-Baxter.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    certified: bool
    source_cybe_zero: bool
    target_cybe_zero: bool
    left: JetTriField
    right: JetTriField
    certified_degree: int

    @property
    def defect(self) -> JetTriField:
        return self.left - self.right


def pi_jacobi_certificate(phi_m: BiField, phi_n: BiField, F: FormalMap) -> PiJacobiCertificate:
    """Calcule les deux membres du certificat et le verdict."""
    _check_jet(F, phi_m, phi_n)
    m, n = F.source_dim, F.target_dim
    residual_m = cybe_residual(phi_m.with_order(F.order))
    residual_n = cybe_residual(phi_n.with_order(F.order))

    args = F.on_block(0, 3) + F.on_block(1, 3) + F.on_block(2, 3)
    left = JetTriField.build(
        n, lambda i, j, k: _substitute_laurent(residual_n[i, j, k], args), source_dim=m
    )
    tensor = [[[residual_m[a, b, c] for c in range(m)] for b in range(m)] for a in range(m)]
    moved = transform_trifield(
        _jacobian_on_block(F, 0, 3), _jacobian_on_block(F, 1, 3), _jacobian_on_block(F, 2, 3), tensor
    )
    right = JetTriField.build(n, lambda i, j, k: moved[i][j][k], source_dim=m)

    source_zero = residual_m.vanishes()
    target_zero = residual_n.vanishes()
    certificate = PiJacobiCertificate(
        certified=(source_zero and target_zero) or (left - right).vanishes(),
        source_cybe_zero=source_zero,
        target_cybe_zero=target_zero,
        left=left,
        right=right,
        certified_degree=min(left.certified_degree, right.certified_degree),
    )
    logger.info(
        f"Certificat de Jacobi pour Π ({m} -> {n}) : "
        f"{'valide' if certificate.certified else 'non valide'} jusqu'au degré {certificate.certified_degree}"
    )
    return certificate

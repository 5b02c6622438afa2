"""
Suite de vérification : registre de contrôles déterministes regroupés par
module. Chaque contrôle reçoit un générateur aléatoire dérivé de la graine et
renvoie un verdict avec le degré certifié atteint.
"""
import logging
import random
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from app.api.models import CheckResult, Normalization, SuiteReport
from app.config import settings
from app.core.bialgebra import (
    GeneratorTuple,
    cocycle_residual,
    cybe_residual,
    gcybe_invariance_residual,
    phi_invariance_residual,
    rmatrix_from_theta_psi,
    theta_psi_from_generators,
    theta_psi_residual,
    w1_canonical,
    w1_general,
    weak_diagonal_residual,
)
from app.core.classify import (
    IntegerMatrix,
    SampleBudget,
    appendix_alpha_display,
    appendix_rmatrix_display,
    canonical_alpha,
    canonical_generators,
    canonical_rmatrix,
    compare_alpha_with_display,
    degeneracy_kernel,
    diagonal_alpha_display,
    laurent_family_sample,
    polynomial_degree,
    special_orbit_rmatrix,
)
from app.core.coefficients import CoeffPoly
from app.core.fields import BiField, VectorField, evaluate_components, scalar_field
from app.core.grouppoisson import (
    SymbolicJet,
    bracket_coefficient,
    bracket_table,
    bracket_weights,
    coordinate,
    coordinate_jacobi_residual,
    expected_weights,
    multiplicativity_residual,
    omega_bifield,
)
from app.core.homspace import (
    alpha_action_residual,
    alpha_jacobi_residual,
    induced_alpha,
    jet_action_residual,
    pi_jacobi_certificate,
)
from app.core.jetgroup import FormalMap, chain_rule_residual, compose, invert, pushforward_bifield
from app.core.series import Series, Truncation, invert_unit, mul
from app.utils.helpers import ProgressTracker, multi_indices_upto
from app.utils.validators import AlgebraError, ParseError, ShapeError

logger = logging.getLogger(__name__)

MODULES = ("series", "jetgroup", "bialgebra", "grouppoisson", "homspace", "classify")
MIN_CERTIFIED_DEGREE = 1


class CheckOutcome(BaseModel):
    passed: bool
    certified_degree: Optional[int] = None
    detail: Optional[str] = None


CheckFn = Callable[[random.Random], CheckOutcome]

_REGISTRY: Dict[str, List[Tuple[str, CheckFn]]] = {module: [] for module in MODULES}


def check(module: str, name: str) -> Callable[[CheckFn], CheckFn]:
    """Enregistre un contrôle dans la suite du module."""
    def register(fn: CheckFn) -> CheckFn:
        _REGISTRY[module].append((name, fn))
        return fn
    return register


# --- outils ---------------------------------------------------------------------------


def all_vanish(items: Iterable, label: str) -> CheckOutcome:
    """
    Verdict commun pour des séries ou tableaux de séries. Un résidu certifié
    sous MIN_CERTIFIED_DEGREE ne prouve rien et fait échouer le contrôle.
    """
    degree = None
    for k, item in enumerate(items):
        degree = item.certified_degree if degree is None else min(degree, item.certified_degree)
        if item.certified_degree < MIN_CERTIFIED_DEGREE:
            return CheckOutcome(
                passed=False,
                certified_degree=item.certified_degree,
                detail=f"{label} n°{k} certifié seulement jusqu'au degré {item.certified_degree}",
            )
        if not item.vanishes():
            return CheckOutcome(passed=False, certified_degree=item.certified_degree, detail=f"{label} n°{k} non nul")
    return CheckOutcome(passed=True, certified_degree=degree)


def _equal(left, right, label: str) -> CheckOutcome:
    if left == right:
        return CheckOutcome(passed=True)
    return CheckOutcome(passed=False, detail=f"{label} : {left!r} ≠ {right!r}")


def _combine(outcomes: Sequence[CheckOutcome]) -> CheckOutcome:
    degrees = [o.certified_degree for o in outcomes if o.certified_degree is not None]
    for outcome in outcomes:
        if not outcome.passed:
            return CheckOutcome(passed=False, certified_degree=outcome.certified_degree, detail=outcome.detail)
    return CheckOutcome(passed=True, certified_degree=min(degrees) if degrees else None)


def _random_series(rng: random.Random, trunc: Truncation, low: int, high: int, density: float = 0.5) -> Series:
    terms = {}
    for exponent in multi_indices_upto(trunc.nvars, min(high, trunc.max_total_degree), low):
        if rng.random() < density:
            terms[exponent] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    return Series(trunc, terms)


def _random_skew_bifield(rng: random.Random, n: int, order: int) -> BiField:
    trunc = Truncation.power_series(2 * n, order)
    base = BiField.build(n, lambda i, j: _random_series(rng, trunc, 0, 3, density=0.3))
    return base - base.swapped()


def _random_vector_field(rng: random.Random, n: int, order: int) -> VectorField:
    trunc = Truncation.power_series(n, order)
    return VectorField.build(n, lambda i: _random_series(rng, trunc, 0, 3, density=0.4))


def _nonnegative_matrices(n: int, high: int) -> List[IntegerMatrix]:
    """Matrices de 𝓓₊ à entrées dans 0..high (ordre lexicographique)."""
    matrices = []
    for entries in product(range(high + 1), repeat=n * n):
        D = IntegerMatrix(rows=[entries[i * n:(i + 1) * n] for i in range(n)])
        if D.det != 0:
            matrices.append(D)
    return matrices


def n3_family(rng: random.Random) -> List[IntegerMatrix]:
    """Toutes les matrices 3×3 de 𝓓₊ à entrées ≤ 1, puis suite_n3_sample tirées à entrées ≤ 2."""
    family = _nonnegative_matrices(3, 1)
    drawn = 0
    while drawn < settings.suite_n3_sample:
        D = IntegerMatrix(rows=[[rng.randint(0, 2) for _ in range(3)] for _ in range(3)])
        if D.det != 0 and D not in family:
            family.append(D)
            drawn += 1
    return family


def _one_dim(d: int) -> IntegerMatrix:
    return IntegerMatrix(rows=[[d]])


# --- series ------------------------------------------------------------------------------


@check("series", "unit_inverse")
def _unit_inverse(rng: random.Random) -> CheckOutcome:
    trunc = Truncation.power_series(2, 8)
    outcomes = []
    for _ in range(5):
        lead = Series.monomial(trunc, (rng.randint(-2, 0), rng.randint(-1, 1)), rng.choice([1, 2, -3]))
        f = mul(lead, Series.constant(trunc, 1) + _random_series(rng, trunc, 1, 3))
        g = invert_unit(f)
        outcomes.append(all_vanish([mul(f, g) - Series.constant(f.trunc, 1)], "f·f⁻¹ - 1"))
    return _combine(outcomes)


@check("series", "ring_laws")
def _ring_laws(rng: random.Random) -> CheckOutcome:
    trunc = Truncation.power_series(2, 6)
    a, b, c = (_random_series(rng, trunc, 0, 4) for _ in range(3))
    return _combine([
        _equal(mul(a, b + c), mul(a, b) + mul(a, c), "distributivité"),
        _equal(mul(mul(a, b), c), mul(a, mul(b, c)), "associativité"),
        _equal(mul(a, b), mul(b, a), "commutativité"),
    ])


# --- jetgroup ------------------------------------------------------------------------------


@check("jetgroup", "inverse_example")
def _inverse_example(rng: random.Random) -> CheckOutcome:
    xbar = invert(FormalMap.univariate([2, 3, 5], 8))
    expected = [Fraction(1, 2), Fraction(-3, 8), Fraction(1, 4)]
    found = [xbar[0].coefficient((k + 1,)) for k in range(3)]
    return _equal(found, expected, "coefficients de X̄")


@check("jetgroup", "group_laws")
def _group_laws(rng: random.Random) -> CheckOutcome:
    outcomes = []
    for n in (1, 2):
        X, Y, Z = (FormalMap.random(n, 6, rng) for _ in range(3))
        left = compose(compose(X, Y), Z)
        right = compose(X, compose(Y, Z))
        outcomes.append(all_vanish([l - r for l, r in zip(left.components, right.components)], "associativité"))
        identity = FormalMap.identity(n, 6)
        back = compose(X, invert(X))
        outcomes.append(all_vanish([b - e for b, e in zip(back.components, identity.components)], "X∘X̄ - id"))
        residual = chain_rule_residual(X, Y)
        outcomes.append(all_vanish([residual[i, j] for i in range(n) for j in range(n)], "règle de dérivation"))
    return _combine(outcomes)


# --- bialgebra -------------------------------------------------------------------------------


@check("bialgebra", "w1_family")
def _w1_family(rng: random.Random) -> CheckOutcome:
    return all_vanish([cybe_residual(w1_canonical(d)) for d in (-1, 1, 2, 3, 4)], "Φ(w1)")


@check("bialgebra", "negative_control")
def _negative_control(rng: random.Random) -> CheckOutcome:
    t2 = Truncation.power_series(2, 8)
    u, v = Series.variable(t2, 0), Series.variable(t2, 1)
    phi = scalar_field(u * u - v * v)

    t3 = Truncation.power_series(3, 8)
    x, y, z = (Series.variable(t3, k) for k in range(3))
    expected = ((x - y) * (y - z) * (z - x)).scaled(-2)
    weak = ((u - v) * (u - v)).scaled(2)

    t1 = Truncation.power_series(1, 8)
    cube = VectorField(dim=1, components=(Series.monomial(t1, (3,)),))
    value = evaluate_components(gcybe_invariance_residual(phi, cube), (1, 0, 2))[(0, 0, 0)]
    return _combine([
        _equal(cybe_residual(phi)[0, 0, 0], expected, "Φ(u²-v²)"),
        _equal(weak_diagonal_residual(phi), weak, "équation diagonale faible"),
        _equal(value, Fraction(-12), "GCYBE en (1,0,2)"),
    ])


@check("bialgebra", "theta_psi_pairs")
def _theta_psi_pairs(rng: random.Random) -> CheckOutcome:
    outcomes = []
    for k in range(20):
        n, order = (1, 8) if k % 2 == 0 else (2, 5)
        pair = theta_psi_from_generators(GeneratorTuple.perturbed_identity(n, order, rng))
        outcomes.append(all_vanish([theta_psi_residual(pair)], f"Θ/Ψ n°{k}"))
        outcomes.append(all_vanish([cybe_residual(rmatrix_from_theta_psi(pair))], f"Φ(Θ/Ψ) n°{k}"))
    return _combine(outcomes)


@check("bialgebra", "cocycle")
def _cocycle(rng: random.Random) -> CheckOutcome:
    outcomes = []
    for k in range(50):
        n, order = (1, 5) if k % 2 == 0 else (2, 4)
        phi = _random_skew_bifield(rng, n, order)
        X, Y = _random_vector_field(rng, n, order), _random_vector_field(rng, n, order)
        outcomes.append(all_vanish([cocycle_residual(phi, X, Y)], f"cocycle n°{k}"))
    return _combine(outcomes)


@check("bialgebra", "phi_invariance")
def _phi_invariance(rng: random.Random) -> CheckOutcome:
    t2 = Truncation.power_series(2, 6)
    u, v = Series.variable(t2, 0), Series.variable(t2, 1)
    phi = scalar_field(u * u - v * v)
    return all_vanish(
        [phi_invariance_residual(phi, FormalMap.random(1, 6, rng)) for _ in range(3)], "invariance de Φ"
    )


# --- grouppoisson -------------------------------------------------------------------------------


def _x(k: int) -> CoeffPoly:
    # convention G_{01} : x_0 = 0 et x_k = 0 pour k < 0
    if k <= 0:
        return CoeffPoly()
    return CoeffPoly.variable(coordinate(1, (k,)))


def appendix_n1_bracket(d: int, i: int, j: int, power: Series) -> CoeffPoly:
    """
    {x_i, x_j}_d = (i-d)j x_j x_{i-d} - i(j-d) x_i x_{j-d} + x_i[X^{d+1}]_j - x_j[X^{d+1}]_i,
    [X^{d+1}]_k étant la somme sur les partitions s_1 + ... + s_{d+1} = k.
    """
    def part(k: int) -> CoeffPoly:
        c = power.coefficient((k,))
        return c if isinstance(c, CoeffPoly) else CoeffPoly.constant(c)

    return (
        _x(j) * _x(i - d) * ((i - d) * j)
        - _x(i) * _x(j - d) * (i * (j - d))
        + _x(i) * part(j)
        - _x(j) * part(i)
    )


@check("grouppoisson", "appendix_n1")
def _appendix_n1(rng: random.Random) -> CheckOutcome:
    order, bound = 13, 6
    jet = SymbolicJet(dim=1, max_degree=order)
    outcomes = []
    for d in (1, 2, 3):
        omega = omega_bifield(canonical_rmatrix(_one_dim(d), Normalization.APPENDIX, order), jet)
        power = jet.as_map()[0] ** (d + 1)
        for i in range(1, bound + 1):
            for j in range(1, bound + 1):
                found = bracket_coefficient(omega, 1, (i,), 1, (j,))
                outcomes.append(_equal(found, appendix_n1_bracket(d, i, j, power), f"{{x_{i}, x_{j}}}_{d}"))
        outcomes.append(CheckOutcome(passed=True, certified_degree=omega.certified_degree))
    return _combine(outcomes)


def partition_products(D: IntegerMatrix, jet: SymbolicJet) -> Dict[Tuple[int, int], Series]:
    """Séries X^i·X^{d_p} du jet générique, indexées par (i, p) (i à partir de 1)."""
    X = jet.as_map()
    products = {}
    for p in range(D.n):
        power = Series.constant(X[0].trunc, 1)
        for k, e in enumerate(D.row(p)):
            if e:
                power = mul(power, X[k] ** e)
        for i in range(D.n):
            products[(i + 1, p)] = mul(X[i], power)
    return products


def canonical_bracket(
    D: IntegerMatrix,
    jet: SymbolicJet,
    products: Dict[Tuple[int, int], Series],
    i: int,
    I: Sequence[int],
    j: int,
    J: Sequence[int],
) -> CoeffPoly:
    """
    Crochet {x^i_I, x^j_J} de la r-matrice canonique (normalisation appendix),
    en forme close :
    Δ²[(r·I) x^i_I Σ_p w_p(J) x^j_{J-d_p} - (r·J) x^j_J Σ_p w_p(I) x^i_{I-d_p}
       - r_i x^i_I Σ_p D^{-1}_{jp}[X^j X^{d_p}]_J + r_j x^j_J Σ_p D^{-1}_{ip}[X^i X^{d_p}]_I],
    avec r = D^{-1}·1 et w_p(K) = Σ_k D^{-1}_{kp}(K - d_p)_k.
    """
    n = D.n
    inverse = D.inverse()
    r = [sum(row) for row in inverse]

    def x(component: int, index: Sequence[int]) -> CoeffPoly:
        if any(e < 0 for e in index) or sum(index) < jet.min_degree:
            return CoeffPoly()
        return CoeffPoly.variable(jet.coordinate(component, index))

    def shifted_sum(component: int, K: Sequence[int]) -> CoeffPoly:
        total = CoeffPoly()
        for p in range(n):
            shifted = [k - d for k, d in zip(K, D.row(p))]
            weight = sum(inverse[k][p] * shifted[k] for k in range(n))
            total = total + x(component, shifted) * weight
        return total

    def partition_sum(component: int, K: Sequence[int]) -> CoeffPoly:
        total = CoeffPoly()
        for p in range(n):
            c = products[(component, p)].coefficient(tuple(K))
            total = total + (c if isinstance(c, CoeffPoly) else CoeffPoly.constant(c)) * inverse[component - 1][p]
        return total

    r_dot_I = sum(rk * e for rk, e in zip(r, I))
    r_dot_J = sum(rk * e for rk, e in zip(r, J))
    result = (
        x(i, I) * shifted_sum(j, J) * r_dot_I
        - x(j, J) * shifted_sum(i, I) * r_dot_J
        - x(i, I) * partition_sum(j, J) * r[i - 1]
        + x(j, J) * partition_sum(i, I) * r[j - 1]
    )
    return result * (D.det ** 2)


def appendix_n2_bracket(
    D: IntegerMatrix,
    jet: SymbolicJet,
    products: Dict[Tuple[int, int], Series],
    i: int,
    M: Sequence[int],
    j: int,
    N: Sequence[int],
) -> CoeffPoly:
    """
    Familles {x^1,x^1}, {x^1,x^2}, {x^2,x^2} pour D = [[a, b], [c, d]] écrites
    coefficient par coefficient en a, b, c, d ; {x^2,x^1} par antisymétrie.
    Les termes [X^k X^{d_p}]_K portent le signe qui annule le crochet en l'identité.
    """
    if (i, j) == (2, 1):
        return -appendix_n2_bracket(D, jet, products, j, N, i, M)
    if D.n != 2 or (i, j) not in ((1, 1), (1, 2), (2, 2)):
        raise ShapeError(f"Crochet affiché défini pour n = 2 uniquement, pas pour ({i}, {j}) avec n = {D.n}")
    (a, b), (c, d) = D.rows
    det = D.det
    m1, m2 = M
    n1, n2 = N

    def x(component: int, index: Sequence[int]) -> CoeffPoly:
        if any(e < 0 for e in index) or sum(index) < jet.min_degree:
            return CoeffPoly()
        return CoeffPoly.variable(jet.coordinate(component, index))

    def part(component: int, p: int, K: Sequence[int]) -> CoeffPoly:
        value = products[(component, p)].coefficient(tuple(K))
        return value if isinstance(value, CoeffPoly) else CoeffPoly.constant(value)

    linear = (
        x(j, N) * ((b - d) * n1 + (c - a) * n2) * (
            x(i, (m1 - a, m2 - b)) * (d * m1 - c * m2 - det)
            + x(i, (m1 - c, m2 - d)) * (-b * m1 + a * m2 - det)
        )
        + x(i, M) * ((b - d) * m1 + (c - a) * m2) * (
            x(j, (n1 - a, n2 - b)) * (-d * n1 + c * n2 + det)
            + x(j, (n1 - c, n2 - d)) * (b * n1 - a * n2 + det)
        )
    )
    if (i, j) == (1, 1):
        partitions = (
            (x(1, M) * part(1, 0, N) - x(1, N) * part(1, 0, M)) * (d * (b - d))
            - (x(1, M) * part(1, 1, N) - x(1, N) * part(1, 1, M)) * (b * (b - d))
        )
    elif (i, j) == (1, 2):
        partitions = (
            x(1, M) * (part(2, 1, N) * a - part(2, 0, N) * c) * (b - d)
            + x(2, N) * (part(1, 1, M) * b - part(1, 0, M) * d) * (c - a)
        )
    else:
        partitions = (
            (x(2, M) * part(2, 0, N) - x(2, N) * part(2, 0, M)) * (c * (a - c))
            + (x(2, M) * part(2, 1, N) - x(2, N) * part(2, 1, M)) * (a * (c - a))
        )
    return linear + partitions


APPENDIX_N2_MATRICES = ([[1, 0], [0, 1]], [[2, 1], [1, 1]], [[1, 2], [0, 1]])


@check("grouppoisson", "appendix_n2")
def _appendix_n2(rng: random.Random) -> CheckOutcome:
    order, bound = 7, 3
    jet = SymbolicJet(dim=2, max_degree=order)
    indices = multi_indices_upto(2, bound, 1)
    outcomes = []
    for rows in APPENDIX_N2_MATRICES:
        D = IntegerMatrix(rows=rows)
        omega = omega_bifield(canonical_rmatrix(D, Normalization.APPENDIX, order), jet)
        products = partition_products(D, jet)
        for i, j in ((1, 1), (1, 2), (2, 2)):
            for I in indices:
                for J in indices:
                    found = bracket_coefficient(omega, i, I, j, J)
                    expected = appendix_n2_bracket(D, jet, products, i, I, j, J)
                    outcomes.append(_equal(found, expected, f"{{x^{i}_{I}, x^{j}_{J}}} pour D = {D}"))
        outcomes.append(CheckOutcome(passed=True, certified_degree=omega.certified_degree))
    return _combine(outcomes)


@check("grouppoisson", "grading")
def _grading(rng: random.Random) -> CheckOutcome:
    D = IntegerMatrix(rows=APPENDIX_N2_MATRICES[1])
    omega = omega_bifield(canonical_rmatrix(D, Normalization.RAW, 6), SymbolicJet(dim=2, max_degree=6))
    for entry in bracket_table(omega, 2):
        allowed = expected_weights(entry.a.component, entry.a.index, entry.b.component, entry.b.index, D.rows)
        if not bracket_weights(entry.poly, 2) <= allowed:
            return CheckOutcome(passed=False, detail=f"poids de {{{entry.a}, {entry.b}}} hors de {sorted(allowed)}")
    return CheckOutcome(passed=True, certified_degree=omega.certified_degree)


@check("grouppoisson", "multiplicativity")
def _multiplicativity(rng: random.Random) -> CheckOutcome:
    phi = canonical_rmatrix(IntegerMatrix.identity(2), Normalization.RAW, 5)
    return all_vanish(
        [multiplicativity_residual(phi, FormalMap.random(2, 5, rng), FormalMap.random(2, 5, rng)) for _ in range(25)],
        "multiplicativité",
    )


@check("grouppoisson", "coordinate_jacobi")
def _coordinate_jacobi(rng: random.Random) -> CheckOutcome:
    omega = omega_bifield(canonical_rmatrix(_one_dim(1), Normalization.APPENDIX, 8), SymbolicJet(dim=1, max_degree=8))
    coords = [coordinate(1, (k,)) for k in (1, 2, 3)]
    for a, b, c in ((coords[0], coords[1], coords[2]), (coords[0], coords[0], coords[1]), (coords[1], coords[2], coords[0])):
        residual = coordinate_jacobi_residual(omega, (a, b, c))
        if residual:
            return CheckOutcome(passed=False, detail=f"Jacobi({a}, {b}, {c}) = {residual!r}")
    return CheckOutcome(passed=True, certified_degree=omega.certified_degree)


# --- homspace -------------------------------------------------------------------------------------


@check("homspace", "alpha_jacobi")
def _alpha_jacobi(rng: random.Random) -> CheckOutcome:
    fields = [canonical_rmatrix(D) for D in _nonnegative_matrices(2, 1)]
    fields.extend(canonical_rmatrix(IntegerMatrix(rows=rows)) for rows in APPENDIX_N2_MATRICES[1:])
    fields.extend(canonical_rmatrix(D, order=polynomial_degree(D)) for D in n3_family(rng))
    fields.extend(special_orbit_rmatrix(n) for n in (2, 3))
    return all_vanish([alpha_jacobi_residual(induced_alpha(phi)) for phi in fields], "Jacobi(α)")


@check("homspace", "alpha_displays")
def _alpha_displays(rng: random.Random) -> CheckOutcome:
    diagonal = IntegerMatrix.diagonal([1, 2, 1])
    ratio3 = compare_alpha_with_display(canonical_alpha(diagonal), diagonal_alpha_display(diagonal))
    identity = IntegerMatrix.identity(2)
    ratio2 = compare_alpha_with_display(canonical_alpha(identity), appendix_alpha_display(identity))
    return _combine([
        _equal(ratio3, Fraction(-2), "constante diagonale n=3 (-abc)"),
        _equal(ratio2, Fraction(1), "constante n=2 pour D = I"),
    ])


@check("homspace", "alpha_action")
def _alpha_action(rng: random.Random) -> CheckOutcome:
    phi = canonical_rmatrix(IntegerMatrix.identity(2), Normalization.RAW, 6)
    return all_vanish([alpha_action_residual(phi, FormalMap.random(2, 6, rng)) for _ in range(3)], "action sur α")


@check("homspace", "jet_action")
def _jet_action(rng: random.Random) -> CheckOutcome:
    order = 5
    pairs = {
        (1, 1): (w1_canonical(1, order), w1_canonical(1, order)),
        (1, 2): (w1_canonical(2, order), canonical_rmatrix(IntegerMatrix.identity(2), Normalization.RAW, order)),
    }
    outcomes = []
    for k in range(10):
        m, n = (1, 1) if k % 2 == 0 else (1, 2)
        phi_m, phi_n = pairs[(m, n)]
        X, Y = FormalMap.random(m, order, rng), FormalMap.random(n, order, rng)
        F = FormalMap.random_jet(m, n, order, rng)
        outcomes.append(all_vanish([jet_action_residual(phi_m, phi_n, X, Y, F)], f"action sur Π n°{k}"))
    return _combine(outcomes)


@check("homspace", "pi_jacobi")
def _pi_jacobi(rng: random.Random) -> CheckOutcome:
    order = 6
    pairs = [
        (w1_canonical(1, order), canonical_rmatrix(IntegerMatrix.identity(2), Normalization.RAW, order)),
        (w1_canonical(2, order), special_orbit_rmatrix(2, order)),
        (w1_canonical(1, order), w1_canonical(3, order)),
        (w1_canonical(1, order), canonical_rmatrix(IntegerMatrix(rows=APPENDIX_N2_MATRICES[1]), Normalization.RAW, order)),
        (w1_canonical(1, order), canonical_rmatrix(IntegerMatrix(rows=APPENDIX_N2_MATRICES[2]), Normalization.RAW, order)),
        (canonical_rmatrix(IntegerMatrix.identity(2), Normalization.RAW, order), special_orbit_rmatrix(2, order)),
        (w1_canonical(2, order), canonical_rmatrix(IntegerMatrix.identity(3), Normalization.RAW, order)),
    ]
    outcomes = []
    for phi_m, phi_n in pairs:
        F = FormalMap.random_jet(phi_m.dim, phi_n.dim, order, rng)
        certificate = pi_jacobi_certificate(phi_m, phi_n, F)
        passed = certificate.certified and certificate.certified_degree >= MIN_CERTIFIED_DEGREE
        outcomes.append(CheckOutcome(passed=passed, certified_degree=certificate.certified_degree))
    return _combine(outcomes)


# --- classify --------------------------------------------------------------------------------------


@check("classify", "canonical_n2")
def _canonical_n2(rng: random.Random) -> CheckOutcome:
    return all_vanish([cybe_residual(canonical_rmatrix(D)) for D in _nonnegative_matrices(2, 2)], "Φ(D) n=2")


@check("classify", "canonical_n3")
def _canonical_n3(rng: random.Random) -> CheckOutcome:
    # φ_D polynomial et exact à l'ordre polynomial_degree(D)
    residuals = [cybe_residual(canonical_rmatrix(D, order=polynomial_degree(D))) for D in n3_family(rng)]
    return all_vanish(residuals, "Φ(D) n=3")


@check("classify", "special_orbit")
def _special_orbit(rng: random.Random) -> CheckOutcome:
    return all_vanish([cybe_residual(special_orbit_rmatrix(n)) for n in (1, 2, 3)], "Φ(u^i - v^j)")


@check("classify", "normalizations")
def _normalizations(rng: random.Random) -> CheckOutcome:
    t2 = Truncation.power_series(2, 8)
    u, v = Series.variable(t2, 0), Series.variable(t2, 1)
    outcomes = [_equal(
        canonical_rmatrix(_one_dim(1), Normalization.APPENDIX)[0, 0], u * u * v - u * v * v, "n=1, d=1"
    )]
    for rows in APPENDIX_N2_MATRICES:
        D = IntegerMatrix(rows=rows)
        raw = canonical_rmatrix(D)
        appendix = canonical_rmatrix(D, Normalization.APPENDIX)
        outcomes.append(all_vanish([appendix - raw.scaled(D.det ** 2)], f"(det D)² pour D = {D}"))
        outcomes.append(all_vanish([appendix - appendix_rmatrix_display(D)], f"φ affiché pour D = {D}"))
    return _combine(outcomes)


@check("classify", "degeneracy")
def _degeneracy(rng: random.Random) -> CheckOutcome:
    for entries in product(range(3), repeat=4):
        D = IntegerMatrix(rows=[entries[:2], entries[2:]])
        kernel = degeneracy_kernel(D)
        if (kernel is None) != (D.det != 0):
            return CheckOutcome(passed=False, detail=f"noyau {kernel} pour det {D} = {D.det}")
        if kernel is not None and any(sum(k * D.rows[i][c] for i, k in enumerate(kernel)) for c in range(2)):
            return CheckOutcome(passed=False, detail=f"noyau {kernel} faux pour D = {D}")
    return CheckOutcome(passed=True)


@check("classify", "orbit_closure")
def _orbit_closure(rng: random.Random) -> CheckOutcome:
    outcomes = []
    for k in range(10):
        if k < 8:
            phi, X = w1_canonical(1 + k % 2, 8), FormalMap.random(1, 8, rng)
        else:
            phi, X = canonical_rmatrix(IntegerMatrix.identity(2), order=6), FormalMap.random(2, 6, rng)
        outcomes.append(all_vanish([cybe_residual(pushforward_bifield(X, phi))], f"Φ(X·φ) n°{k}"))
    phi = w1_canonical(1, 8)
    X, Y = FormalMap.random(1, 8, rng), FormalMap.random(1, 8, rng)
    twice = pushforward_bifield(X, pushforward_bifield(Y, phi))
    once = pushforward_bifield(compose(X, Y), phi)
    outcomes.append(all_vanish([twice - once], "X·(Y·φ) - (X∘Y)·φ"))
    return _combine(outcomes)


@check("classify", "laurent_sample")
def _laurent_sample(rng: random.Random) -> CheckOutcome:
    D = IntegerMatrix.identity(2)
    seed = rng.randint(0, 10 ** 6)
    budget = SampleBudget(order=4, tail_terms=2)
    first = laurent_family_sample(D, seed, budget)
    second = laurent_family_sample(D, seed, budget)
    bare = laurent_family_sample(D, seed, SampleBudget(order=4, tail_terms=0))
    return _combine([
        all_vanish([cybe_residual(first.phi)], "Φ(𝓕_D)"),
        _equal(first.generators.generators, second.generators.generators, "déterminisme"),
        _equal(bare.generators.generators, canonical_generators(D, 4).generators, "queue nulle"),
    ])


@check("classify", "moduli")
def _moduli(rng: random.Random) -> CheckOutcome:
    trunc = Truncation.power_series(1, 8)
    outcomes = []
    for d in (-1, 1, 2, 3, 4):
        general = w1_general(Series.monomial(trunc, (-d,), -1))
        outcomes.append(_equal(general[0, 0], w1_canonical(d)[0, 0], f"w1_general(-u^{-d})"))
    return _combine(outcomes)


# --- exécution -------------------------------------------------------------------------------------------


def _resolve_scope(scope: Sequence[str]) -> List[str]:
    if not scope or "all" in scope:
        return list(MODULES)
    unknown = [name for name in scope if name not in MODULES]
    if unknown:
        raise ParseError(f"Suite inconnue : {', '.join(unknown)} (disponibles : all, {', '.join(MODULES)})")
    return [module for module in MODULES if module in scope]


def _run_check(fn: CheckFn, rng: random.Random) -> CheckOutcome:
    try:
        return fn(rng)
    except AlgebraError as exc:
        return CheckOutcome(passed=False, detail=f"{type(exc).__name__} : {exc}")


def verify_suite(scope: Sequence[str] = ("all",), seed: int = 42, phi: Optional[BiField] = None) -> SuiteReport:
    """
    Exécute les contrôles des modules demandés. Un φ fourni ajoute le
    contrôle de son résidu de Yang-Baxter (contrôle négatif).
    """
    modules = _resolve_scope(scope)
    plan = [(module, name, fn) for module in modules for name, fn in _REGISTRY[module]]
    tracker = ProgressTracker(len(plan) + (phi is not None), "Suite de vérification")
    results = []
    for module, name, fn in plan:
        outcome = _run_check(fn, random.Random(f"{seed}/{module}/{name}"))
        duration = tracker.update(f"{module}/{name}")
        results.append(CheckResult(
            name=name,
            module=module,
            passed=outcome.passed,
            certified_degree=outcome.certified_degree,
            duration=round(duration.total_seconds(), 3),
            detail=outcome.detail,
        ))
        log = logger.info if outcome.passed else logger.error
        log(
            f"{module}/{name} : {'OK' if outcome.passed else 'ÉCHEC'} en {duration.total_seconds():.2f}s "
            f"({tracker.progress:.0f}%)"
        )

    if phi is not None:
        outcome = _run_check(lambda rng: all_vanish([cybe_residual(phi)], "Φ(φ fourni)"), random.Random(seed))
        duration = tracker.update("cybe_residual(φ fourni)")
        results.append(CheckResult(
            name="cybe_residual",
            module="input",
            passed=outcome.passed,
            certified_degree=outcome.certified_degree,
            duration=round(duration.total_seconds(), 3),
            detail=outcome.detail,
        ))

    passed = all(result.passed for result in results)
    logger.info(f"Suite terminée en {tracker.elapsed_time.total_seconds():.1f}s : {'succès' if passed else 'échec'}")
    return SuiteReport(seed=seed, scope=modules, passed=passed, checks=results)

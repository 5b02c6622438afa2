import random
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from app.core.bialgebra import (
    GeneratorTuple,
    ad_on_bifield,
    cocycle_residual,
    cybe_residual,
    coboundary_delta,
    gcybe_invariance_residual,
    lie_bracket,
    phi_invariance_residual,
    rmatrix_from_generators,
    rmatrix_from_theta_psi,
    theta_psi_from_generators,
    theta_psi_residual,
    w1_canonical,
    w1_general,
    weak_diagonal_residual,
)
from app.core.fields import BiField, VectorField, evaluate_components, scalar_field
from app.core.jetgroup import FormalMap
from app.core.series import Series, Truncation
from app.utils.helpers import multi_indices_upto
from app.utils.validators import (
    OutOfModuliError,
    PreconditionError,
    ShapeError,
    SingularGeneratorError,
    UnsupportedCompositionError,
)


@pytest.fixture
def uv():
    """Fixture pour les variables u, v à l'ordre 8."""
    trunc = Truncation.power_series(2, 8)
    return Series.variable(trunc, 0), Series.variable(trunc, 1)


@pytest.fixture
def control(uv):
    """Fixture pour φ = u² - v², qui ne vérifie pas Yang-Baxter."""
    u, v = uv
    return scalar_field(u * u - v * v)


def random_series(rng, trunc, density):
    terms = {}
    for exponent in multi_indices_upto(trunc.nvars, min(3, trunc.max_total_degree), 0):
        if rng.random() < density:
            terms[exponent] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    return Series(trunc, terms)


# --- constructions ---------------------------------------------------------------------


@pytest.mark.parametrize("d", [-1, 0, 1, 2, 3, 4])
def test_w1_canonical_solves_cybe(d):
    """Test Φ = 0 pour la famille canonique en dimension 1."""
    phi = w1_canonical(d)
    assert phi.is_skew()
    assert cybe_residual(phi).vanishes()
    assert weak_diagonal_residual(phi).vanishes()


def test_w1_canonical_values(uv):
    """Test les représentants d = 1 et d = -1."""
    u, v = uv
    assert w1_canonical(1)[0, 0] == u * u * v - u * v * v
    assert w1_canonical(-1)[0, 0] == v - u
    assert w1_canonical(2)[0, 0] == (u * u * u * v - u * v * v * v).scaled(Fraction(1, 4))
    assert w1_canonical(0).is_zero()


def test_w1_canonical_rejects_out_of_moduli():
    """Test le refus de d < -1 sans l'option Laurent."""
    with pytest.raises(OutOfModuliError):
        w1_canonical(-2)
    assert w1_canonical(-2, allow_laurent=True)[0, 0].has_negative_exponents()


def test_w1_general_matches_generator_route():
    """Test (1/F'(u))(1/F'(v))[F(u)-F(v)] contre la construction par Θ/Ψ."""
    trunc = Truncation.power_series(1, 6)
    F = Series(trunc, {(1,): 1, (2,): 1, (3,): Fraction(-1, 2)})
    phi = w1_general(F)
    assert phi[0, 0] == rmatrix_from_generators(GeneratorTuple(generators=[F]))[0, 0]
    assert cybe_residual(phi).vanishes()


def test_rmatrix_from_identity_generators(uv):
    """Test φ = u - v pour F = u."""
    u, v = uv
    F = GeneratorTuple(generators=[Series.variable(Truncation.power_series(1, 8), 0)])
    assert rmatrix_from_generators(F)[0, 0] == u - v


def test_rmatrix_from_identity_generators_n2():
    """Test φ^{ij} = u^i - v^j pour F = id en dimension 2."""
    trunc = Truncation.power_series(2, 5)
    phi = rmatrix_from_generators(GeneratorTuple(generators=[Series.variable(trunc, k) for k in range(2)]))
    t4 = Truncation.power_series(4, 5)
    for i in range(2):
        for j in range(2):
            assert phi[i, j] == Series.variable(t4, i) - Series.variable(t4, 2 + j)
    assert cybe_residual(phi).vanishes()


def test_generator_tuple_validation():
    """Test les erreurs de forme des générateurs."""
    with pytest.raises(ShapeError):
        GeneratorTuple(generators=[])
    with pytest.raises(ShapeError):
        GeneratorTuple(generators=[Series.variable(Truncation.power_series(2, 4), 0)])


def test_singular_generators():
    """Test F = (u+v, u+v) : jacobien de déterminant nul."""
    trunc = Truncation.power_series(2, 4)
    s = Series.variable(trunc, 0) + Series.variable(trunc, 1)
    with pytest.raises(SingularGeneratorError):
        theta_psi_from_generators(GeneratorTuple(generators=[s, s]))


@pytest.mark.parametrize("seed,n,order", [(0, 1, 8), (1, 1, 8), (2, 2, 5), (3, 2, 5)])
def test_theta_psi_pairs(seed, n, order):
    """Test le système linéaire Θ/Ψ et Φ = 0 pour des générateurs aléatoires."""
    pair = theta_psi_from_generators(GeneratorTuple.perturbed_identity(n, order, random.Random(seed)))
    assert (pair.alpha, pair.beta) == (0, 1)
    assert theta_psi_residual(pair).vanishes()
    assert cybe_residual(rmatrix_from_theta_psi(pair)).vanishes()


# --- contrôle négatif -------------------------------------------------------------------


def test_negative_control_cybe(control):
    """Test Φ = -2(u-v)(v-w)(w-u) pour φ = u² - v²."""
    t3 = Truncation.power_series(3, 8)
    x, y, z = (Series.variable(t3, k) for k in range(3))
    assert cybe_residual(control)[0, 0, 0] == ((x - y) * (y - z) * (z - x)).scaled(-2)


def test_negative_control_weak_equation(control, uv):
    """Test le résidu 2(u-v)² de l'équation diagonale faible."""
    u, v = uv
    assert weak_diagonal_residual(control) == ((u - v) * (u - v)).scaled(2)


def test_negative_control_gcybe(control):
    """Test la valeur -12 du résidu d'invariance en (1, 0, 2) pour X = u³."""
    cube = VectorField(dim=1, components=(Series.monomial(Truncation.power_series(1, 8), (3,)),))
    values = evaluate_components(gcybe_invariance_residual(control, cube), (1, 0, 2))
    assert values[(0, 0, 0)] == -12


def test_cybe_rejects_non_skew(uv):
    """Test le refus d'un φ non antisymétrique."""
    u, _ = uv
    with pytest.raises(PreconditionError):
        cybe_residual(scalar_field(u))


def test_weak_equation_requires_dimension_one():
    """Test le refus de l'équation diagonale faible pour n = 2."""
    phi = rmatrix_from_generators(GeneratorTuple.perturbed_identity(2, 4, random.Random(0)))
    with pytest.raises(UnsupportedCompositionError):
        weak_diagonal_residual(phi)


# --- bigèbre -----------------------------------------------------------------------------


def test_lie_bracket_example():
    """Test [u²∂, u∂] = -u²∂."""
    trunc = Truncation.power_series(1, 6)
    X = VectorField(dim=1, components=(Series.monomial(trunc, (2,)),))
    Y = VectorField(dim=1, components=(Series.variable(trunc, 0),))
    assert lie_bracket(X, Y)[0] == Series.monomial(trunc, (2,), -1)
    assert lie_bracket(X, X).is_zero()


def test_lie_bracket_rejects_dimension_mismatch():
    """Test l'erreur de dimension du crochet."""
    X = VectorField.zeros(1, 4)
    Y = VectorField.zeros(2, 4)
    with pytest.raises(ShapeError):
        lie_bracket(X, Y)


def test_coboundary_examples(uv):
    """Test δ(u∂) = φ et δ(∂) = u² - v² pour φ = u²v - uv²."""
    u, v = uv
    phi = w1_canonical(1)
    trunc = Truncation.power_series(1, 8)
    euler = VectorField(dim=1, components=(Series.variable(trunc, 0),))
    translation = VectorField(dim=1, components=(Series.monomial(trunc, (0,)),))
    assert coboundary_delta(euler, phi)[0, 0] == phi[0, 0]
    assert ad_on_bifield(translation, phi)[0, 0] == u * u - v * v
    with pytest.raises(ShapeError):
        ad_on_bifield(VectorField.zeros(2, 8), phi)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 2))
def test_cocycle_identity(seed, n):
    """Test δ([X,Y]) = ad_X δ(Y) - ad_Y δ(X) pour φ antisymétrique aléatoire."""
    rng = random.Random(seed)
    order = 5 if n == 1 else 4
    base = BiField.build(n, lambda i, j: random_series(rng, Truncation.power_series(2 * n, order), 0.3))
    phi = base - base.swapped()
    X, Y = (
        VectorField.build(n, lambda i: random_series(rng, Truncation.power_series(n, order), 0.4))
        for _ in range(2)
    )
    assert cocycle_residual(phi, X, Y).vanishes()


@pytest.mark.parametrize("seed", [0, 1])
def test_phi_invariance(control, seed):
    """Test l'équivariance de Φ sous G_{01}."""
    phi = control.with_order(6)
    assert phi_invariance_residual(phi, FormalMap.random(1, 6, random.Random(seed))).vanishes()


@pytest.mark.parametrize("seed", [0, 1])
def test_cybe_residual_is_cyclic(control, seed):
    """Test Φ^{ijk}(u,v,w) = Φ^{jki}(v,w,u)."""
    residual = cybe_residual(control)
    assert (residual.cycled() - residual).is_zero()
    rng = random.Random(seed)
    base = BiField.build(2, lambda i, j: random_series(rng, Truncation.power_series(4, 4), 0.3))
    residual = cybe_residual(base - base.swapped())
    assert (residual.cycled() - residual).vanishes()

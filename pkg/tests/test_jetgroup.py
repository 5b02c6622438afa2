import random
import typing
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from app.core.coefficients import CoeffPoly, GroupCoordinate
from app.core.fields import scalar_field
from app.core.grouppoisson import SymbolicJet
from app.core.jetgroup import (
    FormalMap,
    chain_rule_residual,
    check_invertible,
    compose,
    derivative_matrix,
    invert,
    linear_part,
    pushforward_bifield,
)
from app.core.series import Series, Truncation
from app.utils.helpers import compositions
from app.utils.validators import PreconditionError, ShapeError, SingularJetError, UnsupportedCompositionError


def series(nvars, order, terms):
    return Series(Truncation.power_series(nvars, order), {e: Fraction(c) for e, c in terms.items()})


@pytest.fixture
def uv_cubic():
    """Fixture pour φ = uv(u-v)."""
    return scalar_field(series(2, 8, {(2, 1): 1, (1, 2): -1}))


def test_compose_example():
    """Test la composition X∘Y pour n = 1, N = 4."""
    X = FormalMap.univariate([1, 1], 4)
    Y = FormalMap.univariate([1, 0, 1], 4)
    Z = compose(X, Y)
    assert Z[0] == series(1, 4, {(1,): 1, (2,): 1, (3,): 1, (4,): 2})
    assert compose(X, FormalMap.identity(1, 4))[0] == X[0]


def test_compose_symbolic_partition_formula():
    """Test z_i = Σ_k x_k Σ_{s_1+...+s_k=i} y_{s_1}...y_{s_k} pour i ≤ 4."""
    X = SymbolicJet(dim=1, max_degree=4, symbol="x").as_map()
    Y = SymbolicJet(dim=1, max_degree=4, symbol="y").as_map()
    Z = compose(X, Y)

    def coord(symbol, k):
        return CoeffPoly.variable(GroupCoordinate(symbol, 1, (k,)))

    for i in range(1, 5):
        expected = CoeffPoly()
        for k in range(1, i + 1):
            inner = CoeffPoly()
            for parts in compositions(i, k):
                term = CoeffPoly.constant(1)
                for s in parts:
                    term = term * coord("y", s)
                inner = inner + term
            expected = expected + coord("x", k) * inner
        assert Z[0].coefficient((i,)) == expected


def test_invert_examples():
    """Test l'inverse formel X̄ de X."""
    xbar = invert(FormalMap.univariate([1, 1], 4))
    assert xbar[0] == series(1, 4, {(1,): 1, (2,): -1, (3,): 2, (4,): -5})
    identity = FormalMap.identity(2, 5)
    assert invert(identity).components == identity.components


def test_invert_numeric_instance():
    """Test x̄_1 = 1/x_1, x̄_2 = -x_2/x_1³, x̄_3 = -x_3/x_1⁴ + 2x_2²/x_1⁵ en (2, 3, 5)."""
    xbar = invert(FormalMap.univariate([2, 3, 5], 8))
    assert [xbar[0].coefficient((k,)) for k in (1, 2, 3)] == [Fraction(1, 2), Fraction(-3, 8), Fraction(1, 4)]


def test_invert_rejects_singular_and_constant_terms():
    """Test les erreurs d'inversion."""
    singular = FormalMap.from_components([series(2, 4, {(2, 0): 1}), series(2, 4, {(1, 1): 1})])
    with pytest.raises(SingularJetError):
        invert(singular)
    shifted = FormalMap.from_components([series(1, 4, {(0,): 1, (1,): 1})])
    with pytest.raises(UnsupportedCompositionError):
        invert(shifted)
    with pytest.raises(UnsupportedCompositionError):
        compose(FormalMap.identity(1, 4), shifted)


def test_derivative_matrix_examples():
    """Test la matrice jacobienne."""
    jac = derivative_matrix(FormalMap.univariate([1, 1], 6))
    assert jac[0, 0] == series(1, 6, {(0,): 1, (1,): 2})
    X = FormalMap.from_components([series(2, 6, {(1, 0): 1, (1, 1): 1}), series(2, 6, {(0, 1): 1})])
    jac = derivative_matrix(X)
    assert jac[0, 0] == series(2, 6, {(0, 0): 1, (0, 1): 1})
    assert jac[0, 1] == series(2, 6, {(1, 0): 1})
    assert jac[1, 0].is_zero()
    assert derivative_matrix(FormalMap.identity(2, 6)).equals_identity()


@pytest.mark.parametrize("rows,det,invertible", [
    ([[1, 0], [0, 1]], 1, True),
    ([[2, 3], [3, 5]], 1, True),
    ([[0, 0], [0, 0]], 0, False),
])
def test_check_invertible(rows, det, invertible):
    """Test le verdict det X_0."""
    verdict = check_invertible(FormalMap.linear(rows, 4))
    assert verdict.det == det
    assert verdict.invertible is invertible


def test_linear_part_rejects_symbolic_jets():
    """Test le refus d'une partie linéaire symbolique."""
    with pytest.raises(PreconditionError):
        linear_part(SymbolicJet(dim=1, max_degree=3).as_map())


def test_pushforward_examples(uv_cubic):
    """Test l'action X·φ : identité puis homothétie u -> 2u."""
    assert pushforward_bifield(FormalMap.identity(1, 8), uv_cubic)[0, 0] == uv_cubic[0, 0]
    scaled = pushforward_bifield(FormalMap.univariate([2], 8), uv_cubic)
    assert scaled[0, 0] == uv_cubic[0, 0].scaled(Fraction(1, 2))


def test_pushforward_rejects_dimension_mismatch(uv_cubic):
    """Test l'erreur de dimension."""
    with pytest.raises(ShapeError):
        pushforward_bifield(FormalMap.identity(2, 8), uv_cubic)


def test_random_jet_has_no_constant_term():
    """Test le tirage d'un jet rectangulaire R^1 -> R^2."""
    F = FormalMap.random_jet(1, 2, 5, random.Random(3))
    assert (F.source_dim, F.target_dim) == (1, 2)
    assert not F.has_constant_term()


@pytest.mark.parametrize("method", ["random", "random_jet"])
def test_sampling_annotations_resolve(method):
    """Test que les annotations des tirages désignent random.Random et non la méthode de classe."""
    hints = typing.get_type_hints(getattr(FormalMap, method))
    assert hints["rng"] is random.Random


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 2))
def test_group_laws(seed, n):
    """Test X∘X̄ = id, l'associativité et la règle de dérivation des composées."""
    rng = random.Random(seed)
    X, Y, Z = (FormalMap.random(n, 5, rng) for _ in range(3))
    identity = FormalMap.identity(n, 5)
    assert compose(X, invert(X)).components == identity.components
    assert compose(invert(X), X).components == identity.components
    assert compose(compose(X, Y), Z).components == compose(X, compose(Y, Z)).components
    residual = chain_rule_residual(X, Y)
    assert all(residual[i, j].vanishes() for i in range(n) for j in range(n))

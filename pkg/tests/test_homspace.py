import random
import pytest
from fractions import Fraction

from app.api.models import Normalization
from app.core.bialgebra import GeneratorTuple, rmatrix_from_generators, w1_canonical
from app.core.classify import (
    IntegerMatrix,
    appendix_alpha_display,
    canonical_alpha,
    canonical_rmatrix,
    compare_alpha_with_display,
    diagonal_alpha_display,
    special_orbit_rmatrix,
)
from app.core.fields import scalar_field
from app.core.homspace import (
    alpha_action_residual,
    alpha_jacobi_residual,
    induced_alpha,
    jet_action_residual,
    jet_pi,
    pi_jacobi_certificate,
)
from app.core.jetgroup import FormalMap
from app.core.series import Series, Truncation
from app.utils.validators import PreconditionError, ShapeError


@pytest.fixture
def control():
    """Fixture pour φ = u² - v² (résidu de Yang-Baxter non nul)."""
    trunc = Truncation.power_series(2, 6)
    u, v = Series.variable(trunc, 0), Series.variable(trunc, 1)
    return scalar_field(u * u - v * v)


# --- bivecteur α ----------------------------------------------------------------------------


def test_alpha_of_special_orbit():
    """Test α^{ij}(u) = u^j - u^i pour φ^{ij} = u^i - v^j."""
    alpha = induced_alpha(special_orbit_rmatrix(2, 6))
    trunc = Truncation.power_series(2, 6)
    u = [Series.variable(trunc, k) for k in range(2)]
    assert alpha[0, 1] == u[1] - u[0]
    assert alpha[1, 0] == u[0] - u[1]
    assert alpha[0, 0].is_zero()
    assert alpha.is_skew()


def test_alpha_vanishes_in_dimension_one():
    """Test α = 0 pour n = 1."""
    assert induced_alpha(w1_canonical(2)).is_zero()


def test_alpha_rejects_non_skew():
    """Test le refus d'un φ non antisymétrique."""
    trunc = Truncation.power_series(2, 4)
    with pytest.raises(PreconditionError):
        induced_alpha(scalar_field(Series.variable(trunc, 0)))


@pytest.mark.parametrize("rows", [
    [[1, 0], [0, 1]],
    [[2, 1], [1, 1]],
    [[1, 1], [0, 1]],
    [[1, 0, 0], [0, 2, 0], [0, 0, 1]],
])
def test_alpha_jacobi(rows):
    """Test l'identité de Jacobi pour α induit par la r-matrice canonique."""
    alpha = canonical_alpha(IntegerMatrix(rows=rows), order=6)
    assert alpha.is_skew()
    assert alpha_jacobi_residual(alpha).vanishes()


def test_alpha_jacobi_special_orbit_n3():
    """Test l'identité de Jacobi pour l'orbite spéciale en dimension 3."""
    assert alpha_jacobi_residual(induced_alpha(special_orbit_rmatrix(3, 5))).vanishes()


def test_alpha_display_constants():
    """Test les constantes entre α calculé et formules affichées."""
    diagonal = IntegerMatrix.diagonal([1, 2, 1])
    assert compare_alpha_with_display(canonical_alpha(diagonal), diagonal_alpha_display(diagonal)) == Fraction(-2)
    identity = IntegerMatrix.identity(2)
    assert compare_alpha_with_display(canonical_alpha(identity), appendix_alpha_display(identity)) == 1


@pytest.mark.parametrize("seed", [0, 1])
def test_alpha_action(seed):
    """Test u ↦ X(u) morphisme de Poisson pour X ∈ G_{02}."""
    phi = canonical_rmatrix(IntegerMatrix.identity(2), Normalization.RAW, 6)
    assert alpha_action_residual(phi, FormalMap.random(2, 6, random.Random(seed))).vanishes()


# --- jets et tenseur Π ---------------------------------------------------------------------


def test_jet_pi_identity_vanishes():
    """Test Π(id) = 0 lorsque φ_m = φ_n."""
    phi = w1_canonical(1, 6)
    pi = jet_pi(FormalMap.identity(1, 6), phi, phi)
    assert pi.source_dim == 1
    assert pi.is_zero()


def test_jet_pi_rejects_bad_jets():
    """Test les préconditions de Π : dimensions et F(0) = 0."""
    phi = w1_canonical(1, 6)
    shifted = FormalMap.from_components([Series(Truncation.power_series(1, 6), {(0,): 1, (1,): 1})])
    with pytest.raises(PreconditionError):
        jet_pi(shifted, phi, phi)
    with pytest.raises(ShapeError):
        jet_pi(FormalMap.identity(2, 6), phi, phi)


@pytest.mark.parametrize("seed,m,n", [(0, 1, 1), (1, 1, 1), (2, 1, 2)])
def test_jet_action(seed, m, n):
    """Test Π((X,Y)·F) = règle de transformation, pour des tirages aléatoires."""
    rng = random.Random(seed)
    order = 5
    phi_m = w1_canonical(1 if n == 1 else 2, order)
    phi_n = w1_canonical(1, order) if n == 1 else canonical_rmatrix(IntegerMatrix.identity(2), Normalization.RAW, order)
    X, Y = FormalMap.random(m, order, rng), FormalMap.random(n, order, rng)
    F = FormalMap.random_jet(m, n, order, rng)
    assert jet_action_residual(phi_m, phi_n, X, Y, F).vanishes()


def test_jet_action_detects_wrong_rule():
    """Test qu'une règle Π erronée laisse un résidu non nul."""
    rng = random.Random(7)
    phi = w1_canonical(1, 5)
    X, Y = FormalMap.random(1, 5, rng), FormalMap.random(1, 5, rng)
    F = FormalMap.random_jet(1, 1, 5, rng)

    def doubled(G):
        return jet_pi(G, phi, phi).scaled(2)

    assert not jet_action_residual(phi, phi, X, Y, F, pi_rule=doubled).vanishes()


def test_pi_jacobi_certificate_for_solutions():
    """Test le certificat pour φ_m, φ_n solutions de Yang-Baxter."""
    phi_m = w1_canonical(1, 6)
    phi_n = rmatrix_from_generators(GeneratorTuple.perturbed_identity(2, 6, random.Random(3)))
    certificate = pi_jacobi_certificate(phi_m, phi_n, FormalMap.random_jet(1, 2, 6, random.Random(4)))
    assert certificate.certified
    assert certificate.source_cybe_zero and certificate.target_cybe_zero


def test_pi_jacobi_certificate_equivariant_control(control):
    """Test le certificat par équivariance de Φ pour F = 2u et φ non solution."""
    certificate = pi_jacobi_certificate(control, control, FormalMap.univariate([2], 6))
    assert not certificate.source_cybe_zero
    assert certificate.certified
    assert certificate.defect.vanishes()


def test_pi_jacobi_certificate_rejects(control):
    """Test l'échec du certificat lorsque seule φ_m est solution."""
    certificate = pi_jacobi_certificate(w1_canonical(1, 6), control, FormalMap.univariate([1, 1], 6))
    assert certificate.source_cybe_zero
    assert not certificate.target_cybe_zero
    assert not certificate.certified


@pytest.mark.parametrize("seed", [0, 5])
def test_jet_action_detects_wrong_rule_for_plane_target(seed):
    """Test le rejet d'une règle Π erronée pour φ_n = φ_I sur R², avec un résidu réellement certifié."""
    rng = random.Random(seed)
    order = 5
    phi_m = w1_canonical(2, order)
    phi_n = canonical_rmatrix(IntegerMatrix.identity(2), Normalization.RAW, order)
    X, Y = FormalMap.random(1, order, rng), FormalMap.random(2, order, rng)
    F = FormalMap.random_jet(1, 2, order, rng)

    correct = jet_action_residual(phi_m, phi_n, X, Y, F)
    assert correct.certified_degree >= 3
    assert correct.vanishes()

    def scaled(G):
        return jet_pi(G, phi_m, phi_n).scaled(7)

    wrong = jet_action_residual(phi_m, phi_n, X, Y, F, pi_rule=scaled)
    assert wrong.certified_degree >= 3
    assert not wrong.vanishes()

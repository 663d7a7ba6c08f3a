import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relcurrent import lorentz as lz
from relcurrent.operators import (
    TWO_PI_CUBED,
    NoClosedForm,
    apply_kernel,
    boost_generator_apply,
    candidate_j0_kernel,
    candidate_j_spatial_kernel,
    commutator_by_boost,
    commutator_expectation,
    deficit_bracket,
    deficit_kernel,
    dirac_current_kernel,
    dirac_total_charge,
    expectation,
    numeric_gradient,
    scaled,
    zero_kernel,
)
from relcurrent.quadrature import QuadratureRule
from relcurrent.wavepacket import FunctionAmplitude, GaussianPacket, boost, inner_product, position_amplitude

STD = QuadratureRule.gauss_hermite(0.0, 0.5, 24)
SMALL = QuadratureRule.gauss_hermite(0.0, 0.5, 10)


def packet(rng, s, sigma=0.5):
    d = int(2 * s) + 1
    return GaussianPacket(
        s,
        center=rng.uniform(-0.3, 0.3, 3),
        sigma=sigma * rng.uniform(0.9, 1.1, 3),
        weights=rng.normal(size=d) + 1j * rng.normal(size=d),
        offset=rng.uniform(-0.5, 0.5, 3),
    )


def test_spinless_generator_is_imaginary_on_real_symmetric_packet():
    K = boost_generator_apply(GaussianPacket(0, sigma=0.5), 2)
    p = np.random.default_rng(0).normal(size=(10, 3))
    assert np.abs(K(p).real).max() == 0.0


@pytest.mark.parametrize("s", [0, 0.5, 1, 1.5])
def test_generator_matches_finite_boost(s):
    rng = np.random.default_rng(1)
    psi = packet(rng, s)
    P = psi.center + 0.5 * rng.normal(size=(20, 3))
    for i in range(3):

        def central(z):
            e = np.zeros(3)
            e[i] = z
            return (boost(psi, lz.boost_from_rapidity(e))(P) - boost(psi, lz.boost_from_rapidity(-e))(P)) / (2 * z)

        d = (4 * central(5e-3) - central(1e-2)) / 3
        K = boost_generator_apply(psi, i)(P)
        # d/dzeta U(zeta) psi = -i K psi
        assert np.abs(d + 1j * K).max() / np.abs(K).max() < 1e-6


@given(st.integers(0, 2**32 - 1), st.sampled_from([0, 0.5, 1]))
def test_generator_hermitian(seed, s):
    rng = np.random.default_rng(seed)
    a, b = packet(rng, s), packet(rng, s)
    for i in range(3):
        lhs = inner_product(boost_generator_apply(a, i), b, STD)
        rhs = inner_product(a, boost_generator_apply(b, i), STD)
        assert abs(lhs - rhs) < 1e-7


def test_numeric_gradient_fallback(rng):
    psi = packet(rng, 0.5)
    p = rng.normal(size=(5, 3)) * 0.4
    assert np.allclose(numeric_gradient(psi, p), psi.gradient(p), atol=1e-9)
    bare = FunctionAmplitude(psi.s, psi)
    assert np.allclose(boost_generator_apply(bare, 1)(p), boost_generator_apply(psi, 1)(p), atol=1e-8)
    with pytest.raises(ValueError):
        boost_generator_apply(bare, 1, fallback=False)


def test_j0_expectation_is_density_at_origin():
    rng = np.random.default_rng(2)
    psi = packet(rng, 1)
    q = QuadratureRule.for_packet(psi, 20)
    dens = position_amplitude(psi, 0.0, q).density(np.zeros(3))
    assert expectation(candidate_j0_kernel(1), psi, q).real == pytest.approx(dens, rel=1e-12)


def test_j0_expectation_separable_oracle():
    # centred isotropic Gaussian: <J0> = |int d3p f(p)|^2 / (2 pi)^3 = (8 pi sigma^2)^(3/2) / (2 pi)^3
    psi = GaussianPacket(0, sigma=0.5)
    expect = (8 * np.pi * 0.25) ** 1.5 / TWO_PI_CUBED
    assert expectation(candidate_j0_kernel(0), psi, STD).real == pytest.approx(expect, rel=1e-12)
    assert 3 * expect == pytest.approx(0.19048090780, rel=1e-10)


def test_spatial_kernel_diagonal_and_spinless_form(rng):
    p = rng.normal(size=(6, 3))
    for s in (0.5, 1):
        K = candidate_j_spatial_kernel(s, 1)(p, p)
        beta = p[:, 1] / lz.energy(p)
        assert np.allclose(K, beta[:, None, None] * np.eye(int(2 * s) + 1) / TWO_PI_CUBED)
    pb = rng.normal(size=(6, 3))
    K0 = candidate_j_spatial_kernel(0, 0)(p, pb)[:, 0, 0]
    assert np.allclose(K0, 0.5 * (p[:, 0] / lz.energy(p) + pb[:, 0] / lz.energy(pb)) / TWO_PI_CUBED)


@pytest.mark.parametrize("s", [0, 0.5, 1])
def test_first_commutator_set(s):
    rng = np.random.default_rng(3)
    psi = packet(rng, s)
    for i in range(3):
        c = commutator_expectation(i, candidate_j0_kernel(s), psi, STD)
        e = expectation(candidate_j_spatial_kernel(s, i), psi, STD).real
        assert c == pytest.approx(e, abs=1e-6 * abs(e) + 1e-12)


def test_zero_kernel_commutator():
    assert commutator_expectation(0, zero_kernel(0.5), GaussianPacket(0.5), SMALL, method="direct") == 0.0


def test_direct_and_factored_agree():
    rng = np.random.default_rng(4)
    psi = packet(rng, 0.5)
    q = QuadratureRule.for_packet(psi, 10)
    for O in (candidate_j_spatial_kernel(0.5, 2), dirac_current_kernel([0.3, 0.1, 0, -0.2], 1), deficit_kernel(0.5)):
        f = apply_kernel(O, psi, q, method="factored")(q.nodes[:50])
        d = apply_kernel(O, psi, q, method="direct")(q.nodes[:50])
        d2 = apply_kernel(O, psi, q, method="direct", threads=3)(q.nodes[:50])
        assert np.allclose(f, d, atol=1e-13)
        assert np.array_equal(d, d2)


def test_apply_kernel_linear():
    rng = np.random.default_rng(5)
    a, b = packet(rng, 1), packet(rng, 1)
    O = candidate_j_spatial_kernel(1, 0)
    combo = FunctionAmplitude(1, lambda p: 2 * a(p) - 1j * b(p))
    p = rng.normal(size=(7, 3)) * 0.3
    lhs = apply_kernel(O, combo, SMALL)(p)
    rhs = 2 * apply_kernel(O, a, SMALL)(p) - 1j * apply_kernel(O, b, SMALL)(p)
    assert np.allclose(lhs, rhs, atol=1e-14)


def test_commutator_by_boost_cross_validates():
    rng = np.random.default_rng(6)
    psi = packet(rng, 0.5)
    q = QuadratureRule.for_packet(psi, 16)
    O = candidate_j_spatial_kernel(0.5, 0)
    for i in range(3):
        a = commutator_expectation(i, O, psi, q)
        b = commutator_by_boost(i, O, psi, q, zeta=1e-2)
        assert a == pytest.approx(b, abs=1e-5 * abs(a) + 1e-9)


def test_rotational_invariance_of_trace():
    from relcurrent.wavepacket import rotate

    psi = GaussianPacket(0.5, center=[0.2, 0, 0], sigma=[0.5, 0.45, 0.55], weights=[1, 0.3j])
    q = QuadratureRule.for_packet(psi, 16)
    U = lz.spinor_rotation([1, -1, 0.5], 0.8)
    qr = q.transformed(lz.covering_to_lorentz(U))
    tr = lambda phi, rule: sum(commutator_expectation(i, candidate_j_spatial_kernel(0.5, i), phi, rule) for i in range(3))
    assert tr(rotate(psi, U), qr) == pytest.approx(tr(psi, q), rel=1e-9)


def test_deficit_bracket_diagonal_and_kernel(rng):
    p = rng.normal(size=(5, 3))
    assert np.allclose(deficit_bracket(0, p, p), 3.0)
    assert np.allclose(deficit_bracket(0.5, p, p), 3.0)
    pb = rng.normal(size=(5, 3))
    K = deficit_kernel(0.5)(p, pb)
    assert np.allclose(K, deficit_bracket(0.5, p, pb)[:, None, None] * np.eye(2) / TWO_PI_CUBED)
    assert np.all(deficit_bracket(0.5, p, pb) < deficit_bracket(0, p, pb))
    with pytest.raises(NoClosedForm):
        deficit_kernel(1)


def test_kernels_hermitian(rng):
    pa, pb = rng.normal(size=(2, 20, 3))
    for O in [candidate_j_spatial_kernel(1.5, 1), dirac_current_kernel([0.2, 0.5, -1, 0], 3), deficit_kernel(0)]:
        assert np.allclose(O(pa, pb), np.swapaxes(O(pb, pa), -1, -2).conj(), atol=1e-15)


def test_dirac_kernel_diagonal_matches_j0(rng):
    p = rng.normal(size=(6, 3))
    K = dirac_current_kernel(np.zeros(4), 0)(p, p)
    assert np.allclose(K, np.eye(2) / TWO_PI_CUBED)


def test_dirac_total_charge():
    psi = GaussianPacket(0.5, sigma=0.5, weights=[1, 1j])
    assert dirac_total_charge(psi, STD) == pytest.approx(1.0, abs=1e-12)


def test_scaled():
    O = scaled(candidate_j0_kernel(0), 2.0)
    psi = GaussianPacket(0)
    assert expectation(O, psi, SMALL) == pytest.approx(2 * expectation(candidate_j0_kernel(0), psi, SMALL))


def test_spin_mismatch():
    with pytest.raises(ValueError):
        apply_kernel(candidate_j0_kernel(1), GaussianPacket(0), SMALL)

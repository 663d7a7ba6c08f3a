import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relcurrent import lorentz as lz
from relcurrent.lorentz import DomainError
from relcurrent.quadrature import QuadratureRule
from relcurrent.spin import wigner_D
from relcurrent.wavepacket import (
    FunctionAmplitude,
    GaussianPacket,
    boost,
    density_at_events,
    expectation_four_momentum,
    expectation_sz,
    gaussian_overlap,
    inner_product,
    norm,
    parity,
    position_amplitude,
    rotate,
    time_reversal,
    translate,
)

STD = QuadratureRule.gauss_hermite(0.0, 0.5, 24)


def packet(rng, s):
    d = int(2 * s) + 1
    return GaussianPacket(
        s,
        center=rng.uniform(-0.3, 0.3, 3),
        sigma=rng.uniform(0.4, 0.6, 3),
        weights=rng.normal(size=d) + 1j * rng.normal(size=d),
        offset=rng.uniform(-1, 1, 3),
    )


def test_normalized():
    psi = GaussianPacket(1, center=[0.1, 0, 0.2], sigma=[0.5, 0.4, 0.6], weights=[1, 2j, 0])
    assert norm(psi, QuadratureRule.for_packet(psi, 20)) == pytest.approx(1.0, abs=1e-13)
    assert np.linalg.norm(psi.weights) == pytest.approx(1.0)


def test_rejects_bad_width():
    with pytest.raises(DomainError):
        GaussianPacket(0, sigma=0.0)


def test_overlap_example():
    a = GaussianPacket(0, sigma=0.5)
    b = GaussianPacket(0, center=[1.0, 0, 0], sigma=0.5)
    assert gaussian_overlap(a, b) == pytest.approx(np.exp(-0.5))
    assert inner_product(a, b, STD) == pytest.approx(np.exp(-0.5), abs=1e-9)


def test_orthogonal_spin_weights():
    a = GaussianPacket(0.5, sigma=0.5, weights=[1, 0])
    b = GaussianPacket(0.5, sigma=0.5, weights=[0, 1])
    assert abs(inner_product(a, b, STD)) < 1e-15


@given(st.integers(0, 2**32 - 1), st.sampled_from([0, 0.5, 1]))
def test_overlap_closed_form_vs_quadrature(seed, s):
    rng = np.random.default_rng(seed)
    a, b = packet(rng, s), packet(rng, s)
    assert inner_product(a, b, STD) == pytest.approx(gaussian_overlap(a, b), abs=1e-8)


def test_inner_product_spin_mismatch():
    with pytest.raises(DomainError):
        inner_product(GaussianPacket(0), GaussianPacket(0.5), STD)


def test_gradient_matches_finite_difference(rng):
    psi = packet(rng, 1)
    p = rng.normal(size=(5, 3)) * 0.4
    h = 1e-6
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fd = (psi(p + e) - psi(p - e)) / (2 * h)
        assert np.allclose(psi.gradient(p)[..., j, :], fd, atol=1e-8)


def test_translate():
    rng = np.random.default_rng(1)
    psi = packet(rng, 0.5)
    p = rng.normal(size=(6, 3))
    assert np.allclose(translate(psi, np.zeros(4))(p), psi(p))
    back = translate(translate(psi, [0.7, 0, 0, 0]), [-0.7, 0, 0, 0])
    assert np.allclose(back(p), psi(p))
    assert np.allclose(np.abs(translate(psi, [0.3, 1, -2, 0.5])(p)), np.abs(psi(p)))


def test_translated_gradient(rng):
    phi = translate(packet(rng, 0.5), [0.3, 1.0, -0.5, 0.2])
    p = rng.normal(size=(4, 3)) * 0.4
    h = 1e-6
    fd = (phi(p + [0, h, 0]) - phi(p - [0, h, 0])) / (2 * h)
    assert np.allclose(phi.gradient(p)[..., 1, :], fd, atol=1e-8)


def test_rotation_of_centred_packet():
    psi = GaussianPacket(1, center=[1.0, 0, 0], sigma=0.5, weights=[1, 0.5, 0.2j])
    U = lz.spinor_rotation([0, 0, 1], np.pi / 2)
    expect = GaussianPacket(1, center=[0, 1.0, 0], sigma=0.5, weights=wigner_D(1, U) @ psi.weights)
    p = np.random.default_rng(2).normal(size=(8, 3))
    assert np.allclose(rotate(psi, U)(p), expect(p), atol=1e-13)


@pytest.mark.parametrize("s", [0, 0.5, 1, 1.5])
def test_full_turn_sign(s):
    psi = packet(np.random.default_rng(3), s)
    p = np.random.default_rng(4).normal(size=(5, 3))
    turned = rotate(psi, lz.spinor_rotation([1, 2, 3], 2 * np.pi))
    assert np.allclose(turned(p), (-1) ** int(2 * s) * psi(p), atol=1e-12)


def test_identity_boost_and_rotation(rng):
    psi = packet(rng, 0.5)
    p = rng.normal(size=(5, 3))
    assert np.allclose(boost(psi, np.eye(4))(p), psi(p))
    assert np.allclose(rotate(psi, np.eye(2))(p), psi(p))


def test_boost_preserves_norm_and_covariance():
    psi = GaussianPacket(0.5, sigma=0.5)
    L = lz.boost_from_velocity([0, 0, 0.5])
    q = STD.transformed(L)
    assert norm(boost(psi, L), q) == pytest.approx(1.0, abs=1e-12)
    P = expectation_four_momentum(boost(psi, L), q)
    assert np.allclose(P, lz.apply(L, expectation_four_momentum(psi, STD)), atol=1e-6)


@given(st.integers(0, 2**32 - 1))
def test_boosts_compose(seed):
    rng = np.random.default_rng(seed)
    psi = packet(rng, 1)
    A1, A2 = lz.random_spinor_map(rng, 0.4), lz.random_spinor_map(rng, 0.4)
    p = rng.normal(size=(4, 3)) * 0.5
    assert np.allclose(boost(boost(psi, A1), A2)(p), boost(psi, A2 @ A1)(p), atol=1e-10)


def test_parity():
    psi = GaussianPacket(0.5, center=[0.2, -0.1, 0.3], sigma=0.5, weights=[0.8, 0.6])
    q = QuadratureRule.gauss_hermite(0, 0.5, 24)
    q0 = QuadratureRule.for_packet(psi, 24)
    P = expectation_four_momentum(psi, q0)
    Pp = expectation_four_momentum(parity(psi), QuadratureRule.gauss_hermite(-psi.center, 0.5, 24))
    assert np.allclose(Pp[1:], -P[1:], atol=1e-10)
    assert expectation_sz(parity(psi), q) == pytest.approx(expectation_sz(psi, q), abs=1e-8)
    p = np.random.default_rng(5).normal(size=(4, 3))
    assert np.allclose(parity(parity(psi))(p), psi(p))


@pytest.mark.parametrize("s", [0, 0.5, 1, 1.5])
def test_time_reversal(s):
    rng = np.random.default_rng(6)
    a, b = packet(rng, s), packet(rng, s)
    p = rng.normal(size=(5, 3))
    assert np.allclose(time_reversal(time_reversal(a))(p), (-1) ** int(2 * s) * a(p))
    lhs = inner_product(time_reversal(a), time_reversal(b), STD)
    assert lhs == pytest.approx(np.conj(inner_product(a, b, STD)), abs=1e-9)


def test_sz_expectation():
    assert expectation_sz(GaussianPacket(0.5, sigma=0.5), STD) == pytest.approx(0.5)
    assert expectation_sz(GaussianPacket(0.5, sigma=0.5, weights=[1, 1]), STD) == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(expectation_four_momentum(GaussianPacket(0.5, sigma=0.5), STD)[1:], 0, atol=1e-14)


def test_position_amplitude_real_for_real_symmetric_packet():
    psi = GaussianPacket(0, sigma=0.5)
    q = QuadratureRule.for_packet(psi, 14)
    x = np.random.default_rng(7).normal(size=(10, 3))
    vals = position_amplitude(psi, 0.0, q)(x)
    assert np.abs(vals.imag).max() < 1e-10


def test_position_amplitude_fourier_oracle():
    # for sigma_p = 1/2 the position packet is a Gaussian with sigma_x = 1
    psi = GaussianPacket(0, sigma=0.5)
    q = QuadratureRule.for_packet(psi, 14)
    x = np.random.default_rng(8).normal(size=(10, 3))
    dens = position_amplitude(psi, 0.0, q).density(x)
    expect = (2 * np.pi) ** -1.5 * np.exp(-np.sum(x * x, -1) / 2)
    assert np.allclose(dens, expect, atol=1e-10)


def test_density_at_events_matches_position_amplitude():
    psi = GaussianPacket(0.5, sigma=0.5, weights=[1, 1j])
    q = QuadratureRule.for_packet(psi, 12)
    x = np.random.default_rng(9).normal(size=(6, 3))
    ev = np.concatenate([np.full((6, 1), 0.4), x], -1)
    assert np.allclose(density_at_events(psi, ev, q), position_amplitude(psi, 0.4, q).density(x), atol=1e-14)


def test_function_amplitude():
    f = FunctionAmplitude(0, lambda p: np.exp(-np.sum(p * p, -1))[..., None])
    assert not f.has_gradient
    assert f.gradient(np.zeros(3)) is None
    assert GaussianPacket(0).has_gradient

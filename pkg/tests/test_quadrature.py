import numpy as np
import pytest
from scipy import integrate

from relcurrent import lorentz as lz
from relcurrent.quadrature import QuadratureGateError, QuadratureRule, ReducedRule, convergence_gate
from relcurrent.wavepacket import GaussianPacket, boost


def normal_pdf(p, c, s):
    return np.prod(np.exp(-((p - c) ** 2) / (2 * s**2)) / np.sqrt(2 * np.pi * s**2), axis=-1)


def test_gauss_hermite_moments():
    c, s = np.array([0.3, -0.1, 0.2]), np.array([0.5, 0.4, 0.7])
    q = QuadratureRule.gauss_hermite(c, s, 12)
    pdf = normal_pdf(q.nodes, c, s)
    assert q.integrate(pdf) == pytest.approx(1.0, abs=1e-13)
    assert np.allclose(q.integrate(pdf[:, None] * q.nodes), c, atol=1e-13)
    var = q.integrate(pdf[:, None] * (q.nodes - c) ** 2)
    assert np.allclose(var, s**2, atol=1e-13)


def test_rule_shapes_and_describe():
    q = QuadratureRule.gauss_hermite(0.0, 0.5, 10)
    assert len(q) == 1000 and q.nodes.shape == (1000, 3)
    assert "n=10" in q.describe()
    assert q.refine().nodes_per_axis == 20


def test_mean_energy_matches_radial_oracle():
    psi = GaussianPacket(0, sigma=0.5)
    q = QuadratureRule.for_packet(psi, 48)
    dens = np.abs(psi(q.nodes)[:, 0]) ** 2
    full = q.integrate(dens * lz.energy(q.nodes))
    f = lambda r: np.sqrt(r * r + 1) * (2 * np.pi * 0.25) ** -1.5 * np.exp(-r * r / (2 * 0.25)) * 4 * np.pi * r * r
    radial, _ = integrate.quad(f, 0, np.inf, epsabs=1e-14, epsrel=1e-13)
    assert full == pytest.approx(radial, abs=1e-11)


def test_gate_passes_and_fails():
    psi = GaussianPacket(0.5, sigma=0.5)
    assert convergence_gate(psi, QuadratureRule.for_packet(psi, 24)) < 1e-8
    with pytest.raises(QuadratureGateError, match="quadrature-gate"):
        convergence_gate(psi, QuadratureRule.for_packet(psi, 8))


def test_boundary_mass_small():
    psi = GaussianPacket(0, sigma=0.5)
    assert QuadratureRule.for_packet(psi, 24).boundary_mass(psi) < 1e-10


def test_pushforward_rule_keeps_norm():
    psi = GaussianPacket(1, center=[0.2, 0, 0.1], sigma=[0.5, 0.4, 0.6])
    q = QuadratureRule.for_packet(psi, 20)
    L = lz.boost_from_velocity([0.3, -0.2, 0.5])
    qb = q.transformed(L)
    vals = np.sum(np.abs(boost(psi, L)(qb.nodes)) ** 2, axis=-1)
    assert qb.integrate(vals) == pytest.approx(1.0, abs=1e-12)


def test_pushforward_composes():
    q = QuadratureRule.gauss_hermite(0.0, 0.5, 8)
    L1 = lz.boost_from_velocity([0.3, 0, 0])
    L2 = lz.boost_from_velocity([0, 0.4, 0])
    a = q.transformed(L1).transformed(L2)
    b = q.transformed(L2 @ L1)
    assert np.allclose(a.nodes, b.nodes) and np.allclose(a.weights, b.weights)
    # refinement keeps the transformation
    assert np.allclose(a.refine().transform, L2 @ L1)


def test_pushforward_matches_plain_rule():
    # norm of a boosted packet: pushed rule against a fine rule laid on the boosted profile
    psi = GaussianPacket(0.5, sigma=0.5, weights=[1, 1j])
    L = lz.boost_from_velocity([0.0, 0.0, 0.5])
    phi = boost(psi, L)
    pushed = QuadratureRule.for_packet(psi, 16).transformed(L)
    plain = QuadratureRule.gauss_hermite([0, 0, 0.45], [0.5, 0.5, 0.7], 64)
    dens = lambda q: np.sum(np.abs(phi(q.nodes)) ** 2, axis=-1)
    assert pushed.integrate(dens(pushed)) == pytest.approx(plain.integrate(dens(plain)), abs=1e-8)


def test_reduced_rule_normalization():
    sigma = 0.5
    rule = ReducedRule.build(2 * sigma, 60, 20)
    f = (2 * np.pi * sigma**2) ** -1.5 * np.exp(-rule.r_a**2 / (2 * sigma**2))
    g = (2 * np.pi * sigma**2) ** -1.5 * np.exp(-rule.r_b**2 / (2 * sigma**2))
    assert rule.integrate(f * g) == pytest.approx(1.0, abs=1e-12)
    pa, pb = rule.momenta()
    assert np.allclose(np.linalg.norm(pb, axis=-1), rule.r_b)
    assert np.allclose(np.sum(pa * pb, -1), rule.r_a * rule.r_b * rule.cos)

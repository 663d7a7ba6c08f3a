"""Invariant suites run by ``relcurrent check``.

Each suite returns the largest measured defect and the tolerance it is held
to; a suite passes when defect <= tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import lorentz as lz
from .audit import run_dirac_control, thomas_coefficient
from .lorentz import METRIC, energy, on_shell
from .operators import (
    boost_generator_apply,
    candidate_j0_kernel,
    candidate_j_spatial_kernel,
    commutator_expectation,
    dirac_current_kernel,
    dirac_total_charge,
    expectation,
)
from .quadrature import QuadratureGateError, QuadratureRule, convergence_gate
from .spin import (
    GAMMA,
    bar,
    bilinear,
    dirac_u_matrix,
    gordon_residual,
    slash,
    spin_matrices,
    wigner_D,
)
from .wavepacket import (
    GaussianPacket,
    boost,
    expectation_four_momentum,
    inner_product,
    position_amplitude,
    rotate,
    time_reversal,
    translate,
)


@dataclass
class CheckResult:
    name: str
    defect: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.defect) and self.defect <= self.tol)

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<28s} defect={self.defect:.3e}  tol={self.tol:.1e}"


SUITES: dict[str, Callable] = {}


def suite(name):
    def register(fn):
        SUITES[name] = fn
        return fn

    return register


def _rng(cfg, name):
    # per-suite stream so that suites are independent of each other's sampling
    return np.random.default_rng([cfg.seed, sum(map(ord, name))])


def random_momenta(rng, n, pmax=2.0):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return v * (pmax * rng.uniform(size=(n, 1)) ** (1 / 3))


def random_rotation(rng):
    return lz.spinor_rotation(rng.normal(size=3), rng.uniform(0, 2 * np.pi))


def random_packet(rng, s, sigma=0.5):
    d = int(2 * s) + 1
    return GaussianPacket(
        s,
        center=rng.uniform(-0.3, 0.3, 3),
        sigma=sigma * rng.uniform(0.8, 1.2, 3),
        weights=rng.normal(size=d) + 1j * rng.normal(size=d),
        offset=rng.uniform(-0.5, 0.5, 3),
    )


def _packet(cfg):
    sig = cfg.sigma_axes if cfg.sigma_axes else cfg.sigma[0]
    return GaussianPacket(cfg.spin, cfg.p0, sig, cfg.weights, cfg.x0)


# --- lorentz ---------------------------------------------------------------


@suite("lorentz-metric")
def _metric(cfg):
    rng = _rng(cfg, "lorentz-metric")
    worst = 0.0
    for _ in range(cfg.samples):
        b = rng.normal(size=3)
        b *= rng.uniform(0, 0.95) / np.linalg.norm(b)
        for L in (lz.boost_from_velocity(b), lz.rotation_matrix(rng.normal(size=3), rng.uniform(0, 7))):
            worst = max(worst, np.abs(L.T @ METRIC @ L - METRIC).max() / max(1, L[0, 0] ** 2))
            worst = max(worst, 0.0 if L[0, 0] >= 1 and np.linalg.det(L) > 0 else 1.0)
    return worst, cfg.linalg_tol


@suite("boost-velocity")
def _velocity(cfg):
    rng = _rng(cfg, "boost-velocity")
    worst = 0.0
    for _ in range(cfg.samples):
        p = on_shell(rng.normal(size=3))
        L = lz.standard_boost(p)
        worst = max(worst, np.abs(lz.apply(L, np.array([1.0, 0, 0, 0])) - p).max() / p[0])
    return worst, cfg.linalg_tol


@suite("covering-homomorphism")
def _homo(cfg):
    rng = _rng(cfg, "covering-homomorphism")
    worst = 0.0
    for _ in range(cfg.samples):
        A, B = lz.random_spinor_map(rng, 0.5), lz.random_spinor_map(rng, 0.5)
        LA, LB = lz.covering_to_lorentz(A), lz.covering_to_lorentz(B)
        scale = max(1.0, np.abs(LA).max() * np.abs(LB).max())
        worst = max(worst, np.abs(lz.covering_to_lorentz(A @ B) - LA @ LB).max() / scale)
        worst = max(worst, np.abs(lz.covering_to_lorentz(-A) - LA).max() / scale)
    return worst, cfg.group_tol


@suite("wigner-su2")
def _su2(cfg):
    rng = _rng(cfg, "wigner-su2")
    worst = 0.0
    for _ in range(cfg.samples):
        A = lz.random_spinor_map(rng, 0.7)
        p = on_shell(random_momenta(rng, 1)[0])
        W = lz.wigner_rotation(A, p)
        worst = max(worst, np.abs(W @ W.conj().T - np.eye(2)).max(), abs(np.linalg.det(W) - 1))
        Lw = lz.covering_to_lorentz(W)
        worst = max(worst, np.abs(Lw[:, 0] - [1, 0, 0, 0]).max())
    return worst, cfg.group_tol


@suite("wigner-group-law")
def _group_law(cfg):
    rng = _rng(cfg, "wigner-group-law")
    worst = 0.0
    for _ in range(cfg.samples):
        A1, A2 = lz.random_spinor_map(rng, 0.7), lz.random_spinor_map(rng, 0.7)
        p = on_shell(random_momenta(rng, 1)[0])
        p1 = lz.apply(lz.covering_to_lorentz(A1), p)
        lhs = lz.wigner_rotation(A2, p1) @ lz.wigner_rotation(A1, p)
        worst = max(worst, np.abs(lhs - lz.wigner_rotation(A2 @ A1, p)).max())
    return worst, cfg.group_tol


@suite("wigner-pure-rotation")
def _pure_rot(cfg):
    rng = _rng(cfg, "wigner-pure-rotation")
    worst = 0.0
    for _ in range(cfg.samples):
        R = random_rotation(rng)
        p = on_shell(random_momenta(rng, 1)[0])
        worst = max(worst, np.abs(lz.wigner_rotation(R, p) - R).max())
    return worst, cfg.group_tol


@suite("wigner-collinear")
def _collinear(cfg):
    rng = _rng(cfg, "wigner-collinear")
    worst = 0.0
    for _ in range(cfg.samples):
        p3 = random_momenta(rng, 1)[0]
        zeta = rng.normal() * p3 / np.linalg.norm(p3)
        W = lz.wigner_rotation(lz.spinor_boost(zeta), on_shell(p3))
        worst = max(worst, np.abs(W - np.eye(2)).max())
    return worst, cfg.group_tol


@suite("thomas-angle")
def _thomas(cfg):
    return abs(thomas_coefficient(0.1) - 0.5) / 0.5, 1e-3


# --- spin ------------------------------------------------------------------


@suite("spin-algebra")
def _spin_alg(cfg):
    worst = 0.0
    for twice in range(0, 7):
        s = twice / 2
        J = spin_matrices(s)
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            worst = max(worst, np.abs(J[i] @ J[j] - J[j] @ J[i] - 1j * J[k]).max())
        worst = max(worst, np.abs(np.einsum("iab,ibc->ac", J, J) - s * (s + 1) * np.eye(twice + 1)).max())
    return worst, cfg.linalg_tol


@suite("wigner-D-homomorphism")
def _D_homo(cfg):
    rng = _rng(cfg, "wigner-D-homomorphism")
    worst = 0.0
    for s in (0.5, 1, 1.5, 2):
        for _ in range(max(1, cfg.samples // 10)):
            R1, R2 = random_rotation(rng), random_rotation(rng)
            D1, D2 = wigner_D(s, R1), wigner_D(s, R2)
            worst = max(worst, np.abs(wigner_D(s, R1 @ R2) - D1 @ D2).max())
            worst = max(worst, np.abs(D1 @ D1.conj().T - np.eye(len(D1))).max())
    return worst, cfg.group_tol


@suite("wigner-D-generator")
def _D_gen(cfg):
    rng = _rng(cfg, "wigner-D-generator")
    worst = 0.0
    h = 1e-4
    for s in (0.5, 1, 1.5):
        J = spin_matrices(s)
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        d1 = (wigner_D(s, lz.spinor_rotation(n, h)) - wigner_D(s, lz.spinor_rotation(n, -h))) / (2 * h)
        worst = max(worst, np.abs(d1 + 1j * np.einsum("i,iab->ab", n, J)).max())
    return worst, 1e-8


@suite("gamma-algebra")
def _gamma(cfg):
    worst = 0.0
    for m in range(4):
        for n in range(4):
            ac = GAMMA[m] @ GAMMA[n] + GAMMA[n] @ GAMMA[m]
            worst = max(worst, np.abs(ac - 2 * METRIC[m, n] * np.eye(4)).max())
        worst = max(worst, np.abs(GAMMA[0] @ GAMMA[m].conj().T @ GAMMA[0] - GAMMA[m]).max())
    return worst, cfg.linalg_tol


@suite("dirac-equation")
def _dirac_eq(cfg):
    from .spin import dirac_v_matrix

    P = random_momenta(_rng(cfg, "dirac-equation"), cfg.samples)
    p = on_shell(P)
    ps = slash(p)
    ru = np.einsum("nab,nbm->nam", ps - np.eye(4), dirac_u_matrix(P))
    rv = np.einsum("nab,nbm->nam", ps + np.eye(4), dirac_v_matrix(P))
    return float(max(np.abs(ru).max(), np.abs(rv).max())), cfg.linalg_tol


@suite("spinor-normalization")
def _spinor_norm(cfg):
    P = random_momenta(_rng(cfg, "spinor-normalization"), cfg.samples)
    U = dirac_u_matrix(P)
    ubar_u = np.einsum("nam,ab,nbk->nmk", U.conj(), GAMMA[0], U)
    udag_u = np.einsum("nam,nak->nmk", U.conj(), U)
    w = energy(P)
    d1 = np.abs(ubar_u - np.eye(2)).max()
    d2 = np.abs(udag_u - w[:, None, None] * np.eye(2)).max(axis=(1, 2)) / w
    return float(max(d1, d2.max())), cfg.linalg_tol


@suite("spinor-completeness")
def _complete(cfg):
    P = random_momenta(_rng(cfg, "spinor-completeness"), cfg.samples)
    U = dirac_u_matrix(P)
    S = np.einsum("nam,nmb->nab", U, bar(np.swapaxes(U, -1, -2)))
    target = (slash(on_shell(P)) + np.eye(4)) / 2
    return float(np.abs(S - target).max()), cfg.linalg_tol


@suite("gordon")
def _gordon(cfg):
    rng = _rng(cfg, "gordon")
    worst = 0.0
    for _ in range(max(1, cfg.samples // 10)):
        pa, pb = on_shell(random_momenta(rng, 2))
        for ma in (0.5, -0.5):
            for mb in (0.5, -0.5):
                for mu in range(4):
                    worst = max(worst, abs(gordon_residual(pa, ma, pb, mb, mu)))
    return worst, 1e-10


@suite("current-conservation")
def _conserve(cfg):
    rng = _rng(cfg, "current-conservation")
    Pa, Pb = random_momenta(rng, cfg.samples), random_momenta(rng, cfg.samples)
    q = on_shell(Pa) - on_shell(Pb)
    K = np.stack([dirac_current_kernel(np.zeros(4), mu)(Pa, Pb) for mu in range(4)], axis=1)
    div = np.einsum("nm,nmab->nab", q @ METRIC, K)
    scale = np.abs(K).max()
    return float(np.abs(div).max() / scale), 1e-12


@suite("v-spinor-identity")
def _v_identity(cfg):
    rng = _rng(cfg, "v-spinor-identity")
    Pa, Pb = random_momenta(rng, cfg.samples), random_momenta(rng, cfg.samples)
    worst = 0.0
    for mu in range(4):
        V = bilinear(Pa, Pb, GAMMA[mu], "v")
        U = bilinear(Pb, Pa, GAMMA[mu], "u")
        worst = max(worst, np.abs(V - np.swapaxes(U, -1, -2)).max())
    return worst, 1e-10


# --- wavepackets -----------------------------------------------------------


@suite("quadrature-gate")
def _gate(cfg):
    psi = _packet(cfg)
    rule = QuadratureRule.for_packet(psi, cfg.nodes)
    try:
        return convergence_gate(psi, rule, cfg.gate_tol), cfg.gate_tol
    except QuadratureGateError as exc:
        fine = rule.refine()
        vals = [q.integrate(np.sum(np.abs(psi(q.nodes)) ** 2, -1) * energy(q.nodes)) for q in (rule, fine)]
        return float(max(abs(vals[1] - vals[0]), cfg.gate_tol * 10)), cfg.gate_tol


@suite("boundary-mass")
def _boundary(cfg):
    psi = _packet(cfg)
    return QuadratureRule.for_packet(psi, cfg.nodes).boundary_mass(psi), 1e-10


@suite("parseval")
def _parseval(cfg):
    psi = GaussianPacket(0.5, sigma=0.5, weights=[1, 1j])
    rule = QuadratureRule.for_packet(psi, 12)
    g = np.linspace(-6, 6, 25)
    X = np.stack(np.meshgrid(g, g, g, indexing="ij"), -1)
    dens = position_amplitude(psi, 0.0, rule).density(X)
    return abs(dens.sum() * (g[1] - g[0]) ** 3 - 1), 1e-6


def _pair(cfg, name, s=0.5):
    rng = _rng(cfg, name)
    a, b = random_packet(rng, s), random_packet(rng, s)
    base = GaussianPacket(s, sigma=0.5)
    return rng, a, b, QuadratureRule.for_packet(base, 24)


@suite("unitarity-translate")
def _u_trans(cfg):
    rng, a, b, q = _pair(cfg, "unitarity-translate")
    x = rng.normal(size=4)
    return abs(inner_product(translate(a, x), translate(b, x), q) - inner_product(a, b, q)), cfg.unitarity_tol


@suite("unitarity-rotate")
def _u_rot(cfg):
    rng, a, b, q = _pair(cfg, "unitarity-rotate")
    R = random_rotation(rng)
    qr = q.transformed(lz.covering_to_lorentz(R))
    return abs(inner_product(rotate(a, R), rotate(b, R), qr) - inner_product(a, b, q)), cfg.unitarity_tol


@suite("unitarity-boost")
def _u_boost(cfg):
    rng, a, b, q = _pair(cfg, "unitarity-boost")
    L = lz.boost_from_velocity(0.5 * rng.normal(size=3) / np.sqrt(3) * 0.9)
    qb = q.transformed(L)
    return abs(inner_product(boost(a, L), boost(b, L), qb) - inner_product(a, b, q)), cfg.unitarity_tol


@suite("time-reversal")
def _tr(cfg):
    rng, a, b, q = _pair(cfg, "time-reversal", s=1.5)
    d1 = abs(inner_product(time_reversal(a), time_reversal(b), q) - np.conj(inner_product(a, b, q)))
    P = rng.normal(size=(20, 3)) * 0.5
    # T^2 = (-1)^(2s)
    d2 = np.abs(time_reversal(time_reversal(a))(P) + a(P)).max()
    return float(max(d1, d2)), cfg.unitarity_tol


@suite("rotation-composition")
def _rot_comp(cfg):
    rng = _rng(cfg, "rotation-composition")
    a = random_packet(rng, 1)
    R1, R2 = random_rotation(rng), random_rotation(rng)
    P = rng.normal(size=(50, 3)) * 0.5
    return float(np.abs(rotate(rotate(a, R1), R2)(P) - rotate(a, R2 @ R1)(P)).max()), 1e-8


@suite("four-momentum-covariance")
def _pcov(cfg):
    psi = GaussianPacket(0.5, sigma=0.5)
    q = QuadratureRule.for_packet(psi, 24)
    L = lz.boost_from_velocity([0.0, 0.0, 0.5])
    lhs = expectation_four_momentum(boost(psi, L), q.transformed(L))
    rhs = lz.apply(L, expectation_four_momentum(psi, q))
    return float(np.abs(lhs - rhs).max()), 1e-6


# --- operators -------------------------------------------------------------


@suite("generator-finite-boost")
def _gen_fb(cfg):
    rng = _rng(cfg, "generator-finite-boost")
    worst = 0.0
    for s in (0, 0.5, 1):
        psi = random_packet(rng, s)
        P = psi.center + 0.5 * rng.normal(size=(20, 3))
        for i in range(3):

            def central(z):
                e = np.zeros(3)
                e[i] = z
                return (boost(psi, lz.boost_from_rapidity(e))(P) - boost(psi, lz.boost_from_rapidity(-e))(P)) / (2 * z)

            d = (4 * central(5e-3) - central(1e-2)) / 3
            K = boost_generator_apply(psi, i)(P)
            worst = max(worst, np.abs(d + 1j * K).max() / np.abs(K).max())
    return worst, 1e-6


@suite("generator-hermiticity")
def _gen_herm(cfg):
    rng, a, b, q = _pair(cfg, "generator-hermiticity", s=1)
    worst = 0.0
    for i in range(3):
        Ka, Kb = boost_generator_apply(a, i), boost_generator_apply(b, i)
        worst = max(worst, abs(inner_product(Ka, b, q) - inner_product(a, Kb, q)))
    return worst, 1e-7


@suite("kernel-hermiticity")
def _k_herm(cfg):
    rng = _rng(cfg, "kernel-hermiticity")
    Pa, Pb = random_momenta(rng, cfg.samples), random_momenta(rng, cfg.samples)
    kernels = [candidate_j0_kernel(1)] + [candidate_j_spatial_kernel(s, i) for s in (0, 0.5, 1.5) for i in range(3)]
    kernels += [dirac_current_kernel(np.zeros(4), mu) for mu in range(4)]
    worst = 0.0
    for O in kernels:
        K1 = O(Pa, Pb)
        K2 = np.swapaxes(O(Pb, Pa), -1, -2).conj()
        worst = max(worst, np.abs(K1 - K2).max())
    return worst, 1e-12


@suite("first-commutator-set")
def _first(cfg):
    rng = _rng(cfg, "first-commutator-set")
    psi = random_packet(rng, 0.5)
    q = QuadratureRule.for_packet(GaussianPacket(0.5, sigma=0.5), 24)
    J0 = candidate_j0_kernel(0.5)
    worst = 0.0
    for i in range(3):
        c = commutator_expectation(i, J0, psi, q)
        e = expectation(candidate_j_spatial_kernel(0.5, i), psi, q).real
        worst = max(worst, abs(c - e))
    return worst, 1e-6


@suite("dirac-charge")
def _charge(cfg):
    psi = GaussianPacket(0.5, sigma=0.5)
    return abs(dirac_total_charge(psi, QuadratureRule.for_packet(psi, 24)) - 1), 1e-6


@suite("dirac-control")
def _dirac_ctrl(cfg):
    rep = run_dirac_control(GaussianPacket(0.5, sigma=0.5), nodes=24, levels=1)
    return max(rep.second_deviation, rep.first_deviation), cfg.dirac_tol


def run_all(cfg, names=None):
    names = list(SUITES) if names is None else names
    return [_run(n, cfg) for n in names]


def _run(name, cfg):
    defect, tol = SUITES[name](cfg)
    return CheckResult(name, float(defect), float(tol))

"""Executable versions of the no-go argument and its positive control.

``run_nogo`` measures sum_i <i[K_i, J_i]> - 3 <J^0> for the candidate current
built on the Newton-Wigner density; ``run_dirac_control`` measures the full
commutator matrix of the Dirac current through the same generator and
commutator code. Results at consecutive quadrature refinements give the
error bar, and a claimed inequality needs 100x separation from it.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import lorentz as lz
from .lorentz import MASS, PAULI, energy
from .operators import (
    TWO_PI_CUBED,
    KernelOperator,
    boost_generator_apply,
    candidate_j0_kernel,
    candidate_j_spatial_kernel,
    commutator_expectation,
    deficit_bracket,
    deficit_kernel,
    dirac_current_kernel,
    dirac_total_charge,
    expectation,
)
from .quadrature import QuadratureGateError, QuadratureRule, ReducedRule, convergence_gate
from .spin import as_spin, spin_dim
from .wavepacket import GaussianPacket, boost, density_at_events, position_amplitude

SEPARATION = 100.0
HALF = as_spin("1/2")


@dataclass
class AuditReport:
    spin: str
    packet: str
    quadrature: str
    lhs: float = float("nan")
    rhs: float = float("nan")
    deficit: float = float("nan")
    analytic_deficit: float | None = None
    spin_orbit: float | None = None
    relative_agreement: float | None = None
    errbar: float = float("nan")
    convergence: list = field(default_factory=list)
    gate_defect: float | None = None
    wall_time: float = 0.0
    commutator_matrix: np.ndarray | None = None
    agreement_tol: float = 1e-6
    notes: list = field(default_factory=list)

    @property
    def relative_deficit(self):
        return self.deficit / self.rhs

    @property
    def separation(self):
        if self.errbar == 0:
            return float("inf")
        return abs(self.deficit) / self.errbar

    @property
    def conclusive(self):
        return bool(np.isfinite(self.deficit) and self.separation >= SEPARATION)

    @property
    def agrees(self):
        return self.relative_agreement is None or self.relative_agreement <= self.agreement_tol

    @property
    def passed(self):
        return self.conclusive and self.agrees

    def records(self):
        """Flat key/value pairs for the text report."""
        out = {
            "spin": self.spin,
            "packet": self.packet,
            "quadrature": self.quadrature,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "deficit": self.deficit,
            "relative_deficit": self.relative_deficit,
            "analytic_deficit": self.analytic_deficit,
            "spin_orbit_term": self.spin_orbit,
            "relative_agreement": self.relative_agreement,
            "errbar": self.errbar,
            "separation": self.separation,
            "conclusive": self.conclusive,
            "passed": self.passed,
            "gate_defect": self.gate_defect,
            "convergence": ";".join(f"{n}:{v:.16e}" for n, v in self.convergence),
        }
        if self.commutator_matrix is not None:
            # diagnostic beyond the trace condition: full i[K_i, J_j] minus delta_ij J^0
            out["extra_full_commutator_matrix"] = ";".join(f"{v:.10e}" for v in self.commutator_matrix.ravel())
        for k, note in enumerate(self.notes):
            out[f"note{k}"] = note
        return out


def _levels(rule, levels):
    return [rule if k == 0 else rule.refine(2**k) for k in range(max(1, levels))]


def _default_rule(packet, rule, nodes):
    if rule is not None:
        return rule
    if not isinstance(packet, GaussianPacket):
        raise ValueError("a quadrature rule is required for non-Gaussian amplitudes")
    return QuadratureRule.for_packet(packet, nodes)


def _candidate_terms(psi, rule, full_matrix=False, threads=1):
    s = psi.s
    K_psi = [boost_generator_apply(psi, i) for i in range(3)]
    J = [candidate_j_spatial_kernel(s, j) for j in range(3)]
    rhs = 3 * expectation(candidate_j0_kernel(s), psi, rule, threads=threads).real
    if full_matrix:
        M = np.array([[commutator_expectation(i, J[j], psi, rule, threads=threads, K_psi=K_psi[i]) for j in range(3)] for i in range(3)])
        lhs = float(np.trace(M))
        M = M - np.eye(3) * rhs / 3
    else:
        lhs = sum(commutator_expectation(i, J[i], psi, rule, threads=threads, K_psi=K_psi[i]) for i in range(3))
        M = None
    return lhs, rhs, M


def spin_orbit_kernel():
    """Hermitian s = 1/2 term of sum_i i[K_i, J_i] that the delta-diagonal bracket omits.

    (i/2) sigma.(p_a x p_b) g / (2 pi)^3 with
    g = 1/((w_a+1) w_b) + 1/((w_b+1) w_a) + 1/((w_a+1)(w_b+1)).
    It vanishes in any packet whose amplitudes are real up to a global phase.
    """

    def pieces(p):
        w = energy(p)
        return w, p

    def left(pa):
        w, p = pieces(pa)
        # g = a1(a) b1(b) + a2(a) b2(b) + a1(a) b2(b) with a1 = 1/(w+1), b1 = 1/w, a2 = 1/w, b2 = 1/(w+1)
        f = np.stack([1 / (w + MASS), 1 / w, 1 / (w + MASS)], -1)
        # sigma.(p_a x p_b) = sum_{ijk} eps_ijk sigma_i p_a,j p_b,k
        eps = np.zeros((3, 3, 3))
        eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
        eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
        S = np.einsum("ijk,iab,...j->...kab", eps, PAULI[1:], p)  # (..., k, 2, 2)
        L = 0.5j * np.einsum("...t,...kab->...atkb", f, S) / TWO_PI_CUBED
        return L.reshape(p.shape[:-1] + (2, 3 * 3 * 2))

    def right(pb):
        w, p = pieces(pb)
        f = np.stack([1 / w, 1 / (w + MASS), 1 / (w + MASS)], -1)
        R = np.einsum("...t,...k,bc->...tkbc", f, p, np.eye(2))
        return R.reshape(p.shape[:-1] + (3 * 3 * 2, 2))

    def kernel(pa, pb):
        return left(pa) @ right(pb)

    return KernelOperator(HALF, kernel, True, left, right, "spin-orbit")


def run_nogo(s, packet, rule=None, nodes=24, levels=2, agreement_tol=1e-6, gate_tol=1e-8, full_matrix=False, threads=1):
    """Trace test sum_i <i[K_i, J_i]> = 3 <J^0> for the candidate current of spin ``s``."""
    t0 = time.perf_counter()
    s = as_spin(s)
    if packet.s != s:
        if not isinstance(packet, GaussianPacket):
            raise ValueError(f"packet has spin {packet.s}, asked for {s}")
        packet = packet.with_spin(s)
    rule = _default_rule(packet, rule, nodes)
    describe = getattr(packet, "describe", lambda: packet.tag)
    report = AuditReport(str(s), describe(), rule.describe(), agreement_tol=agreement_tol)
    try:
        report.gate_defect = convergence_gate(packet, rule, gate_tol)
    except QuadratureGateError as exc:
        report.notes.append(str(exc))
        report.wall_time = time.perf_counter() - t0
        return report

    series = []
    for q in _levels(rule, levels):
        lhs, rhs, M = _candidate_terms(packet, q, full_matrix, threads)
        series.append((q.nodes_per_axis, lhs, rhs, M))
        report.convergence.append((q.nodes_per_axis, lhs - rhs))
    _, report.lhs, report.rhs, report.commutator_matrix = series[-1]
    report.deficit = report.lhs - report.rhs
    report.errbar = abs(report.convergence[-1][1] - report.convergence[-2][1]) if len(series) > 1 else float("inf")

    if s in (0, HALF):
        q = _levels(rule, levels)[-1]
        report.analytic_deficit = expectation(deficit_kernel(s), packet, q, threads=threads).real - report.rhs
        report.spin_orbit = 0.0
        if s == HALF:
            report.spin_orbit = expectation(spin_orbit_kernel(), packet, q, threads=threads).real
        target = report.analytic_deficit + report.spin_orbit
        report.relative_agreement = abs(report.deficit - target) / abs(target)
    report.wall_time = time.perf_counter() - t0
    return report


@dataclass
class DiracControlReport:
    packet: str
    quadrature: str
    j0: float = float("nan")
    matrix: np.ndarray = field(default_factory=lambda: np.full((3, 3), np.nan))
    first_set: np.ndarray = field(default_factory=lambda: np.full(3, np.nan))
    spatial: np.ndarray = field(default_factory=lambda: np.full(3, np.nan))
    second_deviation: float = float("nan")
    first_deviation: float = float("nan")
    errbar: float = float("nan")
    charge: float = float("nan")
    gate_defect: float | None = None
    tol: float = 1e-5
    wall_time: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def conclusive(self):
        return bool(np.isfinite(self.j0))

    @property
    def passed(self):
        return self.conclusive and self.second_deviation <= self.tol and self.first_deviation <= self.tol

    def records(self):
        out = {
            "packet": self.packet,
            "quadrature": self.quadrature,
            "J0_D": self.j0,
            "charge": self.charge,
            "second_set_max_rel_deviation": self.second_deviation,
            "first_set_max_rel_deviation": self.first_deviation,
            "errbar": self.errbar,
            "gate_defect": self.gate_defect,
            "passed": self.passed,
        }
        for i in range(3):
            out[f"iK{i + 1}_J0"] = self.first_set[i]
            out[f"J{i + 1}"] = self.spatial[i]
            for j in range(3):
                out[f"iK{i + 1}_J{j + 1}"] = self.matrix[i, j]
        for k, note in enumerate(self.notes):
            out[f"note{k}"] = note
        return out


def _dirac_terms(psi, rule, threads=1):
    origin = np.zeros(4)
    J = [dirac_current_kernel(origin, mu) for mu in range(4)]
    K_psi = [boost_generator_apply(psi, i) for i in range(3)]
    j0 = expectation(J[0], psi, rule, threads=threads).real
    M = np.array([[commutator_expectation(i, J[j + 1], psi, rule, threads=threads, K_psi=K_psi[i]) for j in range(3)] for i in range(3)])
    first = np.array([commutator_expectation(i, J[0], psi, rule, threads=threads, K_psi=K_psi[i]) for i in range(3)])
    spatial = np.array([expectation(J[i + 1], psi, rule, threads=threads).real for i in range(3)])
    return j0, M, first, spatial


def run_dirac_control(packet, rule=None, nodes=24, levels=2, tol=1e-5, gate_tol=1e-8, threads=1):
    """Both commutator sets for the Dirac current: i[K_i, J^0] = J^i and i[K_i, J^j] = delta_ij J^0."""
    t0 = time.perf_counter()
    if packet.s != HALF:
        raise ValueError("the Dirac control needs a spin-1/2 packet")
    rule = _default_rule(packet, rule, nodes)
    describe = getattr(packet, "describe", lambda: packet.tag)
    rep = DiracControlReport(describe(), rule.describe(), tol=tol)
    try:
        rep.gate_defect = convergence_gate(packet, rule, gate_tol)
    except QuadratureGateError as exc:
        rep.notes.append(str(exc))
        rep.wall_time = time.perf_counter() - t0
        return rep
    results = [_dirac_terms(packet, q, threads) for q in _levels(rule, levels)]
    rep.j0, rep.matrix, rep.first_set, rep.spatial = results[-1]
    rep.second_deviation = float(np.max(np.abs(rep.matrix - rep.j0 * np.eye(3))) / abs(rep.j0))
    rep.first_deviation = float(np.max(np.abs(rep.first_set - rep.spatial)) / abs(rep.j0))
    if len(results) > 1:
        rep.errbar = float(np.max(np.abs(results[-1][1] - results[-2][1])))
    rep.charge = dirac_total_charge(packet, _levels(rule, levels)[-1])
    rep.wall_time = time.perf_counter() - t0
    return rep


def run_general_spin_sweep(s_list, packet, nodes=24, levels=2, threads=1):
    """run_nogo for each spin on the same momentum profile (highest-weight spin state)."""
    return [run_nogo(s, packet.with_spin(s), nodes=nodes, levels=levels, threads=threads) for s in s_list]


def is_monotone(reports):
    """Whether deficits are non-increasing along the sweep order (reported, never asserted)."""
    d = [r.deficit for r in reports]
    return all(b <= a for a, b in zip(d, d[1:]))


def manifest_covariance_bracket(pa, pb):
    """(sqrt(w_b/w_a) p_a + sqrt(w_a/w_b) p_b) / 2 for on-shell four-momenta."""
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    ra = np.sqrt(pb[..., :1] / pa[..., :1])
    return 0.5 * (ra * pa + pb / ra)


def manifest_covariance_witness(packet, velocity=(0.0, 0.0, 0.5), n_pairs=200, seed=0):
    """Largest relative failure of the spinless bracket to transform as a four-vector.

    Pairs are drawn from the packet's momentum density. Illustration only.
    """
    rng = np.random.default_rng(seed)
    L = lz.boost_from_velocity(velocity)
    pa3 = packet.center + packet.sigma * rng.standard_normal((n_pairs, 3))
    pb3 = packet.center + packet.sigma * rng.standard_normal((n_pairs, 3))
    pa, pb = lz.on_shell(pa3), lz.on_shell(pb3)
    lhs = manifest_covariance_bracket(lz.apply(L, pa), lz.apply(L, pb))
    rhs = lz.apply(L, manifest_covariance_bracket(pa, pb))
    viol = np.linalg.norm(lhs - rhs, axis=-1) / np.linalg.norm(rhs, axis=-1)
    diag = np.linalg.norm(manifest_covariance_bracket(lz.apply(L, pa), lz.apply(L, pa)) - lz.apply(L, pa), axis=-1)
    sep = np.linalg.norm(pa3 - pb3, axis=-1)
    return {
        "velocity": tuple(float(v) for v in velocity),
        "pairs": n_pairs,
        "max_violation": float(viol.max()),
        "median_violation": float(np.median(viol)),
        "diagonal_max_violation": float(diag.max()),
        "separations": sep,
        "violations": viol,
    }


def reduced_deficit_oracle(s, sigma, n_radial=80, n_angle=40):
    """Closed-form deficit kernel of an isotropic, centred packet via the (r_a, r_b, cos) rule.

    For Psi_m(p) = c_m f(|p|) with unit spin weights the spin trace gives 1,
    leaving a three-dimensional integral of f(r_a) f(r_b) (bracket - 3).
    """
    rule = ReducedRule.build(2.0 * sigma, n_radial, n_angle)
    pa, pb = rule.momenta()
    f = lambda r: (2 * np.pi * sigma**2) ** -0.75 * np.exp(-r * r / (4 * sigma**2))
    vals = f(rule.r_a) * f(rule.r_b) * (deficit_bracket(s, pa, pb) - 3.0)
    return float(rule.integrate(vals) / TWO_PI_CUBED)


def sigma_scaling(sigmas=(0.05, 0.1, 0.2), s=0, nodes=24, levels=1):
    """Log-log slopes of the deficit against the packet width.

    Returns the slope of the deficit relative to 3<J^0> (the quantity that
    vanishes like sigma^2) together with the slope of the absolute deficit,
    which also carries the sigma^3 fall of <J^0> itself.
    """
    reports = [run_nogo(s, GaussianPacket(s, sigma=sg), nodes=nodes, levels=levels) for sg in sigmas]
    logs = np.log(np.asarray(sigmas, dtype=float))
    rel = np.array([-r.relative_deficit for r in reports])
    ab = np.array([-r.deficit for r in reports])
    return {
        "sigmas": list(sigmas),
        "relative_deficits": (-rel).tolist(),
        "deficits": (-ab).tolist(),
        "relative_slope": float(np.polyfit(logs, np.log(rel), 1)[0]),
        "absolute_slope": float(np.polyfit(logs, np.log(ab), 1)[0]),
        "reports": reports,
    }


def boosted_setup(packet, velocity, nodes=24):
    """Boosted packet with the quadrature rule pushed forward by the same boost."""
    L = lz.boost_from_velocity(velocity)
    return boost(packet, L), QuadratureRule.for_packet(packet, nodes).transformed(L)


def density_nonlocality(packet, velocity=(0.0, 0.0, 0.5), extent=6.0, points=41, nodes=20):
    """Relative L2 distance between the boosted packet's density at t' = 0 and the
    original density carried pointwise to the same events, on the x-z plane.

    Both densities are normalised on the grid first, so only their shapes are compared.
    """
    L = lz.boost_from_velocity(velocity)
    rule = QuadratureRule.for_packet(packet, nodes)
    g = np.linspace(-extent, extent, points)
    X, Z = np.meshgrid(g, g, indexing="ij")
    x = np.stack([X, np.zeros_like(X), Z], axis=-1)
    boosted = position_amplitude(boost(packet, L), 0.0, rule.transformed(L)).density(x)
    events = np.concatenate([np.zeros(x.shape[:-1] + (1,)), x], axis=-1)
    mapped = density_at_events(packet, lz.apply(np.linalg.inv(L), events), rule)
    boosted = boosted / boosted.sum()
    mapped = mapped / mapped.sum()
    return {
        "grid": g,
        "boosted": boosted,
        "mapped": mapped,
        "relative_l2": float(np.sqrt(np.sum((boosted - mapped) ** 2) / np.sum(boosted**2))),
    }


def thomas_angle(zeta):
    """Wigner rotation angle on the rest momentum after boosts zeta x-hat then zeta y-hat."""
    A = lz.spinor_boost([0.0, zeta, 0.0]) @ lz.spinor_boost([zeta, 0.0, 0.0])
    W = lz.wigner_rotation(A, np.array([1.0, 0.0, 0.0, 0.0]))
    _, angle = lz.su2_axis_angle(W)
    return float(angle)


def thomas_coefficient(zeta=0.1):
    """angle / zeta^2 extrapolated to zeta -> 0 (two Richardson steps in zeta^2)."""
    f = lambda z: thomas_angle(z) / z**2
    a, b, c = f(zeta), f(zeta / 2), f(zeta / 4)
    ab = (4 * b - a) / 3
    bc = (4 * c - b) / 3
    return (16 * bc - ab) / 15

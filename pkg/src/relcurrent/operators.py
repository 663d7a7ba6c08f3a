"""Boost generator, kernel operators and commutator expectations.

A kernel operator O is stored through its two-point function K so that

    <phi|O|psi> = int d3p_a d3p_b sum phi*_{m_a}(p_a) K(p_a, m_a; p_b, m_b) psi_{m_b}(p_b).

The 1/sqrt(omega) measure factors of the state expansion and the 1/(2 pi)^3
of the currents are folded into K at construction. Every kernel here is a
short sum of products, K(a, b) = L(a) @ R(b), which apply_kernel uses for an
O(N) contraction; the generic O(N^2) contraction over quadrature nodes is
kept as an independent path and selected with ``method="direct"``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import lorentz as lz
from .lorentz import MASS, METRIC, energy, on_shell
from .quadrature import convergence_gate
from .spin import GAMMA, as_spin, boost_spin_term, dirac_u_matrix, spin_dim
from .wavepacket import FunctionAmplitude, MomentumAmplitude, boost

TWO_PI_CUBED = (2 * np.pi) ** 3


class NoClosedForm(NotImplementedError):
    """No closed-form kernel exists for this spin; use the numeric path."""


@dataclass(frozen=True)
class KernelOperator:
    s: object
    kernel: Callable
    hermitian: bool = True
    left: Callable | None = None
    right: Callable | None = None
    name: str = "kernel"

    @property
    def dim(self):
        return spin_dim(self.s)

    @property
    def factored(self):
        return self.left is not None and self.right is not None

    def __call__(self, pa, pb):
        return self.kernel(np.asarray(pa, dtype=float), np.asarray(pb, dtype=float))


def _eye(d):
    return np.eye(d, dtype=complex)


def _factored(s, left, right, name, hermitian=True):
    def kernel(pa, pb):
        return left(pa) @ right(pb)

    return KernelOperator(as_spin(s), kernel, hermitian, left, right, name)


# --- generator -----------------------------------------------------------


def numeric_gradient(psi, p3, h_min=1e-5, h_rel=1e-5):
    """Central differences in each momentum axis with one Richardson step."""
    p3 = np.asarray(p3, dtype=float)
    h = np.maximum(h_min, h_rel * np.linalg.norm(p3, axis=-1))[..., None]
    grads = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0

        def central(step):
            return (psi(p3 + step * e) - psi(p3 - step * e)) / (2 * step)

        grads.append((4 * central(h / 2) - central(h)) / 3)
    return np.stack(grads, axis=-2)


def boost_generator_apply(psi, axis, fallback=True):
    """K_i psi with K = -(i/2){omega, d/dp} + (J x p)/(omega + m).

    The anticommutator acts as omega d_i Psi + d_i(omega Psi) = 2 omega d_i Psi
    + beta_i Psi. When ``psi`` has no analytic gradient the numeric one is used
    if ``fallback`` is set.
    """
    if not psi.has_gradient and not fallback:
        raise ValueError(f"{psi.tag} amplitude has no gradient and fallback is disabled")
    s = psi.s

    def apply(p3):
        p3 = np.asarray(p3, dtype=float)
        w = energy(p3)
        vals = psi(p3)
        g = psi.gradient(p3) if psi.has_gradient else None
        if g is None:
            g = numeric_gradient(psi, p3)
        deriv = -1j * (w[..., None] * g[..., axis, :] + (p3[..., axis] / (2 * w))[..., None] * vals)
        if spin_dim(s) == 1:
            return deriv
        S = boost_spin_term(s, p3)[..., axis, :, :]
        return deriv + np.einsum("...ab,...b->...a", S, vals)

    return FunctionAmplitude(s, apply, tag=f"K{axis}")


# --- kernels ------------------------------------------------------------


def candidate_j0_kernel(s):
    """Newton-Wigner density at the origin: delta_{m_a m_b} / (2 pi)^3."""
    d = spin_dim(s)

    def left(pa):
        return np.broadcast_to(_eye(d) / TWO_PI_CUBED, pa.shape[:-1] + (d, d))

    def right(pb):
        return np.broadcast_to(_eye(d), pb.shape[:-1] + (d, d))

    return _factored(s, left, right, "candidate-J0")


def candidate_j_spatial_kernel(s, axis):
    """Spatial candidate current, generated from J^0 by i[K_i, J^0].

    K = [ (beta_a + beta_b)_i / 2 + i (S_a - S_b)_i ] / (2 pi)^3, where S is
    the spin part of the boost generator; for s = 0 only the convection term
    remains.
    """
    d = spin_dim(s)
    I = _eye(d)

    def parts(p):
        beta = p[..., axis] / energy(p)
        S = boost_spin_term(s, p)[..., axis, :, :]
        return beta, S

    def left(pa):
        beta, S = parts(pa)
        a = 0.5 * beta[..., None, None] * I + 1j * S
        b = np.broadcast_to(I, a.shape)
        return np.concatenate([a, b], axis=-1) / TWO_PI_CUBED

    def right(pb):
        beta, S = parts(pb)
        a = np.broadcast_to(I, S.shape)
        b = 0.5 * beta[..., None, None] * I - 1j * S
        return np.concatenate([a, b], axis=-2)

    return _factored(s, left, right, f"candidate-J{axis + 1}")


def dirac_current_kernel(x, mu):
    """Dirac current J_D^mu(x) with the charge set to 1.

    K = m/(2 pi)^3 (omega_a omega_b)^(-1/2) e^{i(p_a - p_b).x} ubar(p_a) gamma^mu u(p_b).
    """
    x = np.asarray(x, dtype=float)

    def left(pa):
        U = dirac_u_matrix(pa)
        ph = np.exp(1j * lz.minkowski_dot(on_shell(pa), x)) / np.sqrt(energy(pa))
        ubar = np.einsum("...am,ab->...mb", np.conj(U), GAMMA[0] @ GAMMA[mu])
        return MASS / TWO_PI_CUBED * ph[..., None, None] * ubar

    def right(pb):
        U = dirac_u_matrix(pb)
        ph = np.exp(-1j * lz.minkowski_dot(on_shell(pb), x)) / np.sqrt(energy(pb))
        return ph[..., None, None] * U

    return _factored("1/2", left, right, f"dirac-J{mu}")


def deficit_kernel(s):
    """Closed-form kernel of sum_i i[K_i, J_i] (s = 0 and s = 1/2 only).

    Bracket: 3 - |beta_a - beta_b|^2 / 4 for s = 0, with the additional
    - |p_a/(omega_a + m) - p_b/(omega_b + m)|^2 / 2 for s = 1/2, times
    delta_{m_a m_b} / (2 pi)^3.
    """
    s = as_spin(s)
    if s not in (0, as_spin("1/2")):
        raise NoClosedForm(f"no closed-form deficit kernel for s = {s}; use the numeric path")
    d = spin_dim(s)
    spinor = s != 0

    def vectors(p):
        w = energy(p)
        vecs = [p / w[..., None]]
        if spinor:
            vecs.append(p / (w + MASS)[..., None])
        return vecs

    def left(p):
        # bracket = 3 - sum_k c_k (|v_a|^2 - 2 v_a.v_b + |v_b|^2), rank 1 + 5 per vector
        cols = [np.full(p.shape[:-1], 3.0)]
        for c, v in zip((0.25, 0.5), vectors(p)):
            v2 = np.sum(v * v, axis=-1)
            cols += [-c * v2, -c * np.ones_like(v2)] + [2 * c * v[..., k] for k in range(3)]
        F = np.stack(cols, axis=-1)
        return np.einsum("...r,ab->...arb", F, _eye(d)).reshape(p.shape[:-1] + (d, d * F.shape[-1])) / TWO_PI_CUBED

    def right(p):
        cols = [np.ones(p.shape[:-1])]
        for v in vectors(p):
            v2 = np.sum(v * v, axis=-1)
            cols += [np.ones_like(v2), v2] + [v[..., k] for k in range(3)]
        G = np.stack(cols, axis=-1)
        return np.einsum("...r,ab->...rab", G, _eye(d)).reshape(p.shape[:-1] + (d * G.shape[-1], d))

    return _factored(s, left, right, f"deficit-s{s}")


def deficit_bracket(s, pa, pb):
    """Scalar bracket of the closed-form deficit kernel (without delta / (2 pi)^3)."""
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    wa, wb = energy(pa), energy(pb)
    out = 3 - 0.25 * np.sum((pa / wa[..., None] - pb / wb[..., None]) ** 2, axis=-1)
    if as_spin(s) == as_spin("1/2"):
        out = out - 0.5 * np.sum((pa / (wa + MASS)[..., None] - pb / (wb + MASS)[..., None]) ** 2, axis=-1)
    elif as_spin(s) != 0:
        raise NoClosedForm(f"no closed-form deficit kernel for s = {s}")
    return out


def scaled(O, factor, name=None):
    left = None if O.left is None else (lambda p: factor * O.left(p))
    return KernelOperator(O.s, lambda a, b: factor * O.kernel(a, b), O.hermitian, left, O.right, name or O.name)


def zero_kernel(s):
    d = spin_dim(s)
    return KernelOperator(as_spin(s), lambda a, b: np.zeros(np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (d, d), complex), True, name="zero")


# --- contraction ----------------------------------------------------------


class KernelImage(MomentumAmplitude):
    """(O psi)(p_a) = int d3p_b K(p_a; p_b) psi(p_b), evaluated at any p_a.

    Holds the node expansion of psi (weights times values on the rule) and
    evaluates the kernel on demand.
    """

    tag = "kernel-image"

    def __init__(self, O, psi, rule, method="auto", threads=1, chunk=256):
        if O.s != psi.s:
            raise ValueError(f"kernel spin {O.s} does not match amplitude spin {psi.s}")
        self.O, self.s = O, psi.s
        self.method = "factored" if (method == "auto" and O.factored) else ("direct" if method == "auto" else method)
        if self.method == "factored" and not O.factored:
            raise ValueError(f"{O.name} has no factorisation")
        self.nodes = rule.nodes
        self.coef = rule.weights[:, None] * psi(rule.nodes)
        self.threads = max(1, int(threads))
        self.chunk = chunk
        if self.method == "factored":
            R = O.right(self.nodes)
            self._reduced = np.einsum("nrb,nb->r", R, self.coef)

    def __call__(self, pa):
        pa = np.asarray(pa, dtype=float)
        if self.method == "factored":
            return self.O.left(pa) @ self._reduced
        flat = pa.reshape(-1, 3)
        starts = range(0, len(flat), self.chunk)

        def block(i):
            K = self.O.kernel(flat[i : i + self.chunk, None, :], self.nodes[None, :, :])
            return np.einsum("anij,nj->ai", K, self.coef)

        if self.threads > 1:
            with ThreadPoolExecutor(self.threads) as ex:
                blocks = list(ex.map(block, starts))
        else:
            blocks = [block(i) for i in starts]
        out = np.concatenate(blocks, axis=0) if blocks else np.empty((0, self.dim), complex)
        return out.reshape(pa.shape[:-1] + (self.dim,))


def apply_kernel(O, psi, rule, method="auto", threads=1, gate_tol=None):
    """Kernel image of ``psi``; checks the quadrature gate first if ``gate_tol`` is set."""
    if gate_tol is not None:
        convergence_gate(psi, rule, gate_tol)
    return KernelImage(O, psi, rule, method=method, threads=threads)


def expectation(O, psi, rule, method="auto", threads=1):
    img = apply_kernel(O, psi, rule, method, threads)
    vals = np.sum(np.conj(psi(rule.nodes)) * img(rule.nodes), axis=-1)
    return complex(rule.integrate(vals))


def commutator_expectation(axis, O, psi, rule, method="auto", threads=1, K_psi=None):
    """<psi| i[K_axis, O] |psi> = -2 Im <K psi | O psi> for Hermitian O."""
    if not O.hermitian:
        raise ValueError(f"{O.name} is not declared Hermitian")
    if K_psi is None:
        K_psi = boost_generator_apply(psi, axis)
    img = apply_kernel(O, psi, rule, method, threads)
    z = rule.integrate(np.sum(np.conj(K_psi(rule.nodes)) * img(rule.nodes), axis=-1))
    return float(-2.0 * np.imag(z))


def commutator_by_boost(axis, O, psi, rule, zeta=1e-3, method="auto"):
    """d/dzeta <U(zeta) psi| O |U(zeta) psi> at zeta = 0, central differences with one Richardson step.

    Each boosted expectation uses the rule pushed forward by the same boost,
    which keeps the integrand as smooth as the unboosted one.
    """

    def value(z):
        e = np.zeros(3)
        e[axis] = z
        L = lz.boost_from_rapidity(e)
        return expectation(O, boost(psi, L), rule.transformed(L), method).real

    def central(z):
        return (value(z) - value(-z)) / (2 * z)

    return (4 * central(zeta / 2) - central(zeta)) / 3


def dirac_total_charge(psi, rule):
    """int d3x <J_D^0(t, x)> reduced in momentum space.

    The x-integral of e^{i(p_a - p_b).x} gives (2 pi)^3 delta(p_a - p_b), leaving
    int d3p sum psi*_a psi_b ubar(p, m_a) gamma^0 u(p, m_b) / omega.
    """
    U = dirac_u_matrix(rule.nodes)
    M = np.einsum("nam,nak->nmk", np.conj(U), U)
    vals = psi(rule.nodes)
    dens = np.einsum("nm,nmk,nk->n", np.conj(vals), M, vals) / energy(rule.nodes)
    return float(rule.integrate(dens).real)

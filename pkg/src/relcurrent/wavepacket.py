"""Momentum-spin amplitudes Psi_m(p) and their Poincare transformations.

An amplitude is a callable mapping momenta of shape (..., 3) to complex
components of shape (..., 2s+1), ordered by descending m. Amplitudes stay
closed-form through every transformation (a boosted packet is evaluated at
Lambda^-1 p on demand), so no interpolation error enters the operator
algebra; grids only exist inside quadrature rules.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lorentz as lz
from .lorentz import MASS, DomainError, energy, on_shell
from .spin import as_spin, m_values, spin_dim, wigner_D


class MomentumAmplitude:
    """Base class. Subclasses implement ``__call__`` and optionally ``gradient``."""

    s = 0
    tag = "amplitude"

    @property
    def dim(self):
        return spin_dim(self.s)

    def __call__(self, p3):
        raise NotImplementedError

    def gradient(self, p3):
        """Analytic momentum gradient, shape (..., 3, d), or None if unavailable."""
        return None

    @property
    def has_gradient(self):
        return type(self).gradient is not MomentumAmplitude.gradient


class FunctionAmplitude(MomentumAmplitude):
    def __init__(self, s, func, grad=None, tag="function"):
        self.s = as_spin(s)
        self._func = func
        self._grad = grad
        self.tag = tag

    def __call__(self, p3):
        return self._func(np.asarray(p3, dtype=float))

    def gradient(self, p3):
        if self._grad is None:
            return None
        return self._grad(np.asarray(p3, dtype=float))

    @property
    def has_gradient(self):
        return self._grad is not None


def _normalized_weights(weights, s):
    c = np.asarray(weights, dtype=complex).ravel()
    if c.size != spin_dim(s):
        raise DomainError(f"spin {s} needs {spin_dim(s)} weights, got {c.size}")
    n = np.linalg.norm(c)
    if n == 0:
        raise DomainError("spin weights must not all vanish")
    return c / n


@dataclass(frozen=True, eq=False)
class GaussianPacket(MomentumAmplitude):
    """Normalized Gaussian packet.

    Psi_m(p) = c_m prod_j (2 pi sigma_j^2)^(-1/4) exp(-(p_j - p0_j)^2 / (4 sigma_j^2))
               * exp(-i p.x0)

    so |Psi|^2 is a normal density with standard deviation sigma_j per axis
    and the position-space packet is centred at x0 at t = 0.
    """

    s: object = 0
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    sigma: np.ndarray = field(default_factory=lambda: np.full(3, 0.5))
    weights: np.ndarray | None = None
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    tag = "gaussian"

    def __post_init__(self):
        s = as_spin(self.s)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "center", np.broadcast_to(np.asarray(self.center, float), (3,)).copy())
        object.__setattr__(self, "sigma", np.broadcast_to(np.asarray(self.sigma, float), (3,)).copy())
        object.__setattr__(self, "offset", np.broadcast_to(np.asarray(self.offset, float), (3,)).copy())
        if np.any(self.sigma <= 0):
            raise DomainError("packet widths must be positive")
        w = self.weights
        if w is None:
            w = np.eye(spin_dim(s))[0]
        object.__setattr__(self, "weights", _normalized_weights(w, s))

    def with_spin(self, s, weights=None):
        """Same momentum profile for another spin; highest weight unless given."""
        return GaussianPacket(s, self.center, self.sigma, weights, self.offset)

    def _envelope(self, p3):
        d = p3 - self.center
        log = -np.sum(d * d / (4 * self.sigma**2), axis=-1) - 1j * (p3 @ self.offset)
        norm = np.prod((2 * np.pi * self.sigma**2) ** -0.25)
        return norm * np.exp(log)

    def __call__(self, p3):
        p3 = np.asarray(p3, dtype=float)
        return self._envelope(p3)[..., None] * self.weights

    def gradient(self, p3):
        p3 = np.asarray(p3, dtype=float)
        g = self._envelope(p3)
        dlog = -(p3 - self.center) / (2 * self.sigma**2) - 1j * self.offset
        return (g[..., None] * dlog)[..., None] * self.weights

    def describe(self):
        fmt = lambda v: ",".join(f"{x:g}" for x in np.ravel(v))
        c = ",".join(f"{x.real:g}{x.imag:+g}j" for x in self.weights)
        return (
            f"gaussian s={self.s} p0=({fmt(self.center)}) sigma=({fmt(self.sigma)}) "
            f"x0=({fmt(self.offset)}) c=({c})"
        )


def gaussian_overlap(a: GaussianPacket, b: GaussianPacket):
    """Closed-form <a|b> for two Gaussian packets of equal spin."""
    if a.s != b.s:
        raise DomainError("mismatched spin")
    spin = np.vdot(a.weights, b.weights)
    total = 1.0 + 0j
    for j in range(3):
        sa, sb = a.sigma[j], b.sigma[j]
        A = 1 / (4 * sa**2) + 1 / (4 * sb**2)
        # exponent: -A p^2 + B p - C with complex B from the position offsets
        B = a.center[j] / (2 * sa**2) + b.center[j] / (2 * sb**2) + 1j * (a.offset[j] - b.offset[j])
        C = a.center[j] ** 2 / (4 * sa**2) + b.center[j] ** 2 / (4 * sb**2)
        norm = (2 * np.pi * sa**2) ** -0.25 * (2 * np.pi * sb**2) ** -0.25
        total *= norm * np.sqrt(np.pi / A) * np.exp(B * B / (4 * A) - C)
    return spin * total


# --- transformations -----------------------------------------------------


class _Translated(MomentumAmplitude):
    tag = "translated"

    def __init__(self, psi, a):
        self.psi, self.a, self.s = psi, np.asarray(a, dtype=float), psi.s

    def _phase(self, p3):
        return np.exp(1j * lz.minkowski_dot(on_shell(p3), self.a))

    def __call__(self, p3):
        p3 = np.asarray(p3, dtype=float)
        return self.psi(p3) * self._phase(p3)[..., None]

    def gradient(self, p3):
        p3 = np.asarray(p3, dtype=float)
        g = self.psi.gradient(p3)
        if g is None:
            return None
        # d(p.a)/dp = beta a^0 - a_vec
        dphase = p3 / energy(p3)[..., None] * self.a[0] - self.a[1:]
        val = self.psi(p3)
        return (g + 1j * dphase[..., None] * val[..., None, :]) * self._phase(p3)[..., None, None]

    @property
    def has_gradient(self):
        return self.psi.has_gradient


class _Lorentz(MomentumAmplitude):
    """Psi'(p) = sqrt(omega_k / omega_p) D(W(p <- k)) Psi(k) with k = Lambda^-1 p."""

    tag = "lorentz"

    def __init__(self, psi, A):
        self.psi, self.s = psi, psi.s
        self.A = np.asarray(A, dtype=complex)
        self.L = lz.covering_to_lorentz(self.A)
        self.Linv = np.linalg.inv(self.L)

    def __call__(self, p3):
        p3 = np.asarray(p3, dtype=float)
        k = lz.apply(self.Linv, on_shell(p3))
        pref = np.sqrt(k[..., 0] / energy(p3))
        vals = self.psi(k[..., 1:])
        if self.dim == 1:
            return pref[..., None] * vals
        W = lz.spinor_standard_boost_inverse(p3) @ self.A @ lz.spinor_standard_boost(k[..., 1:])
        D = wigner_D(self.s, W)
        return pref[..., None] * np.einsum("...ij,...j->...i", D, vals)


class _Rotated(_Lorentz):
    tag = "rotated"

    def __init__(self, psi, U):
        if not lz.is_su2(U, tol=1e-9):
            raise DomainError("rotation needs an SU(2) element")
        super().__init__(psi, U)
        self.D = wigner_D(psi.s, self.A)
        self.R3 = self.L[1:, 1:]

    def __call__(self, p3):
        p3 = np.asarray(p3, dtype=float)
        return self.psi(p3 @ self.R3) @ self.D.T

    def gradient(self, p3):
        p3 = np.asarray(p3, dtype=float)
        g = self.psi.gradient(p3 @ self.R3)
        if g is None:
            return None
        return np.einsum("ij,...jb,ab->...ia", self.R3, g, self.D)

    @property
    def has_gradient(self):
        return self.psi.has_gradient


class _Parity(MomentumAmplitude):
    tag = "parity"

    def __init__(self, psi, eta=1.0):
        self.psi, self.eta, self.s = psi, eta, psi.s

    def __call__(self, p3):
        return self.eta * self.psi(-np.asarray(p3, dtype=float))

    def gradient(self, p3):
        g = self.psi.gradient(-np.asarray(p3, dtype=float))
        return None if g is None else -self.eta * g

    @property
    def has_gradient(self):
        return self.psi.has_gradient


class _TimeReversed(MomentumAmplitude):
    tag = "time-reversed"

    def __init__(self, psi):
        self.psi, self.s = psi, psi.s
        # (-1)^(s+m) with m descending; s+m is an integer
        self.sign = np.array([(-1.0) ** int(round(float(self.s) + m)) for m in m_values(self.s)])

    def __call__(self, p3):
        vals = self.psi(-np.asarray(p3, dtype=float))
        return self.sign * np.conj(vals[..., ::-1])

    def gradient(self, p3):
        g = self.psi.gradient(-np.asarray(p3, dtype=float))
        return None if g is None else -self.sign * np.conj(g[..., ::-1])

    @property
    def has_gradient(self):
        return self.psi.has_gradient


def translate(psi, a):
    """Spacetime translation by the four-vector ``a``: Psi'(p) = Psi(p) e^{+i p.a}."""
    return _Translated(psi, a)


def rotate(psi, R):
    """Rotation by the SU(2) element ``R``: Psi'(p) = D(R) Psi(R^-1 p)."""
    return _Rotated(psi, np.asarray(R, dtype=complex))


def boost(psi, L):
    """Apply the proper orthochronous transform ``L`` (4x4 matrix or spinor map).

    For a pure boost this is
    Psi'(p) = sqrt(gamma0 (1 - beta0.beta)) D(W(p <- L^-1 p)) Psi(L^-1 p),
    the prefactor being omega(L^-1 p) / omega(p) under the square root.
    """
    return _Lorentz(psi, lz.as_spinor(L))


def parity(psi, eta=1.0):
    return _Parity(psi, eta)


def time_reversal(psi):
    """Antiunitary: Psi'_m(p) = (-1)^(s+m) conj(Psi_{-m}(-p))."""
    return _TimeReversed(psi)


# --- integrals -----------------------------------------------------------


def inner_product(phi, psi, rule):
    if phi.s != psi.s:
        raise DomainError(f"mismatched spin {phi.s} vs {psi.s}")
    vals = np.sum(np.conj(phi(rule.nodes)) * psi(rule.nodes), axis=-1)
    return complex(rule.integrate(vals))


def norm(psi, rule):
    return float(np.sqrt(inner_product(psi, psi, rule).real))


def expectation_four_momentum(psi, rule):
    dens = np.sum(np.abs(psi(rule.nodes)) ** 2, axis=-1)
    return rule.integrate(dens[:, None] * on_shell(rule.nodes))


def expectation_sz(psi, rule):
    dens = np.abs(psi(rule.nodes)) ** 2
    return float(rule.integrate(dens @ m_values(psi.s)))


class PositionAmplitude:
    """psi_m(t, x) = int d3p (2 pi)^(-3/2) Psi_m(p) exp(-i (omega t - p.x)) by quadrature."""

    def __init__(self, psi, t, rule, chunk=2048):
        self.s = psi.s
        self.t = float(t)
        self.rule = rule
        self._p = rule.nodes
        w = energy(rule.nodes)
        self._coef = (rule.weights * np.exp(-1j * w * self.t))[:, None] * psi(rule.nodes) / (2 * np.pi) ** 1.5
        self._chunk = chunk

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 3)
        out = np.empty((len(flat), self._coef.shape[1]), dtype=complex)
        for i in range(0, len(flat), self._chunk):
            ph = np.exp(1j * flat[i : i + self._chunk] @ self._p.T)
            out[i : i + self._chunk] = ph @ self._coef
        return out.reshape(x.shape[:-1] + (self._coef.shape[1],))

    def density(self, x):
        return np.sum(np.abs(self(x)) ** 2, axis=-1)


def position_amplitude(psi, t, rule):
    return PositionAmplitude(psi, t, rule)


def amplitude_at_events(psi, events, rule, chunk=2048):
    """Components psi_m(t, x) at spacetime points of shape (..., 4)."""
    events = np.asarray(events, dtype=float)
    flat = events.reshape(-1, 4)
    p4 = on_shell(rule.nodes)
    coef = rule.weights[:, None] * psi(rule.nodes) / (2 * np.pi) ** 1.5
    out = np.empty((len(flat), coef.shape[1]), dtype=complex)
    for i in range(0, len(flat), chunk):
        ph = np.exp(-1j * lz.minkowski_dot(p4[None, :, :], flat[i : i + chunk, None, :]))
        out[i : i + chunk] = ph @ coef
    return out.reshape(events.shape[:-1] + (coef.shape[1],))


def density_at_events(psi, events, rule, chunk=2048):
    """Newton-Wigner density sum_m |psi_m(x)|^2 at spacetime points of shape (..., 4)."""
    return np.sum(np.abs(amplitude_at_events(psi, events, rule, chunk)) ** 2, axis=-1)

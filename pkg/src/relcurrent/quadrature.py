"""Quadrature rules for momentum-space integrals.

The default rule is a tensor Gauss-Hermite rule whose nodes are placed as
for a normal density of mean ``center`` and standard deviation ``scale``
per axis, with the Gaussian weight divided back out, so that
``rule.integrate(f)`` approximates the plain integral of ``f`` over R^3.
A rule can be pushed forward through a Lorentz transformation using the
invariance of d^3p / omega, which keeps transformed packets as accurate
as the original.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lorentz import apply, energy, on_shell


class QuadratureGateError(RuntimeError):
    """Raised when a quantity is not converged between two refinement levels."""


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    nodes_per_axis: int
    center: np.ndarray
    scale: np.ndarray
    transform: np.ndarray | None = field(default=None)

    @classmethod
    def gauss_hermite(cls, center, scale, nodes_per_axis=24):
        center = np.broadcast_to(np.asarray(center, dtype=float), (3,)).copy()
        scale = np.broadcast_to(np.asarray(scale, dtype=float), (3,)).copy()
        if nodes_per_axis < 1:
            raise ValueError("need at least one node per axis")
        x, w = np.polynomial.hermite.hermgauss(nodes_per_axis)
        axes = [center[j] + np.sqrt(2.0) * scale[j] * x for j in range(3)]
        wts = [np.sqrt(2.0) * scale[j] * w * np.exp(x * x) for j in range(3)]
        P = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        W = np.einsum("i,j,k->ijk", *wts).ravel()
        return cls(P, W, nodes_per_axis, center, scale)

    @classmethod
    def for_packet(cls, packet, nodes_per_axis=24):
        return cls.gauss_hermite(packet.center, packet.sigma, nodes_per_axis)

    def __len__(self):
        return len(self.weights)

    def integrate(self, values):
        """Weighted sum over nodes along the first axis of ``values``."""
        return np.tensordot(self.weights, values, axes=(0, 0))

    def transformed(self, L):
        """Rule for integrands pulled back through the Lorentz matrix ``L``.

        Nodes become the spatial parts of L p and weights pick up
        omega(L p) / omega(p), the Jacobian of d^3p.
        """
        L = np.asarray(L, dtype=float)
        base = QuadratureRule.gauss_hermite(self.center, self.scale, self.nodes_per_axis)
        total = L if self.transform is None else L @ self.transform
        return base._push(total)

    def _push(self, L):
        p = on_shell(self.nodes)
        q = apply(L, p)
        W = self.weights * q[:, 0] / p[:, 0]
        return QuadratureRule(q[:, 1:].copy(), W, self.nodes_per_axis, self.center, self.scale, L)

    def refine(self, factor=2):
        base = QuadratureRule.gauss_hermite(self.center, self.scale, factor * self.nodes_per_axis)
        return base if self.transform is None else base._push(self.transform)

    def describe(self):
        kind = "gauss-hermite" if self.transform is None else "gauss-hermite(pushed)"
        c = ",".join(f"{v:g}" for v in self.center)
        s = ",".join(f"{v:g}" for v in self.scale)
        return f"{kind} n={self.nodes_per_axis} center=({c}) scale=({s})"

    def boundary_mass(self, amplitude):
        """Fraction of the norm carried by the outermost layer of nodes."""
        n = self.nodes_per_axis
        idx = np.indices((n, n, n)).reshape(3, -1)
        outer = np.any((idx == 0) | (idx == n - 1), axis=0)
        dens = np.sum(np.abs(amplitude(self.nodes)) ** 2, axis=-1) * self.weights
        total = dens.sum()
        return float(np.abs(dens[outer]).sum() / total)


def convergence_gate(amplitude, rule, tol=1e-8, factor=2):
    """Compare norm and mean energy between ``rule`` and its refinement.

    Returns the larger of the two discrepancies; raises QuadratureGateError
    naming the failing quantity if it exceeds ``tol``.
    """
    fine = rule.refine(factor)
    diffs = {}
    for name, f in (("norm", lambda p: 1.0), ("energy", energy)):
        vals = []
        for q in (rule, fine):
            dens = np.sum(np.abs(amplitude(q.nodes)) ** 2, axis=-1)
            vals.append(q.integrate(dens * f(q.nodes)))
        diffs[name] = abs(vals[1] - vals[0])
    worst = max(diffs, key=diffs.get)
    if diffs[worst] > tol:
        raise QuadratureGateError(
            f"quadrature-gate: {worst} changes by {diffs[worst]:.3e} between "
            f"{rule.nodes_per_axis} and {fine.nodes_per_axis} nodes/axis (tol {tol:g})"
        )
    return diffs[worst]


@dataclass(frozen=True)
class ReducedRule:
    """Rule over (r_a, r_b, cos theta_ab) for two-point rotationally invariant integrands.

    For spherically symmetric f and g and a kernel depending on r_a, r_b and
    the angle between the momenta,
    int d3p_a d3p_b f(r_a) K g(r_b) = 8 pi^2 int r_a^2 r_b^2 f K g dr_a dr_b dcos.
    Radii come from Gauss-Legendre on t in (0, 1) mapped by r = L t / (1 - t).
    """

    r_a: np.ndarray
    r_b: np.ndarray
    cos: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, scale, n_radial=80, n_angle=40):
        t, wt = np.polynomial.legendre.leggauss(n_radial)
        t = 0.5 * (t + 1.0)
        wt = 0.5 * wt
        r = scale * t / (1.0 - t)
        wr = wt * scale / (1.0 - t) ** 2 * r * r
        c, wc = np.polynomial.legendre.leggauss(n_angle)
        ra, rb, cc = np.meshgrid(r, r, c, indexing="ij")
        W = 8 * np.pi**2 * np.einsum("i,j,k->ijk", wr, wr, wc)
        return cls(ra.ravel(), rb.ravel(), cc.ravel(), W.ravel())

    def momenta(self):
        """Representative vectors p_a along z and p_b in the x-z plane."""
        sin = np.sqrt(np.clip(1 - self.cos**2, 0, None))
        pa = np.stack([np.zeros_like(self.r_a), np.zeros_like(self.r_a), self.r_a], -1)
        pb = np.stack([self.r_b * sin, np.zeros_like(self.r_b), self.r_b * self.cos], -1)
        return pa, pb

    def integrate(self, values):
        return np.tensordot(self.weights, values, axes=(0, 0))

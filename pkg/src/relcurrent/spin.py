"""Spin-s rotation matrices, Wigner D-matrices and Dirac spinors.

Spin components are always ordered by descending m: index k <-> m = s - k.
Dirac spinors use the Dirac basis and the normalization ubar u = 1, so that
u^dagger u = omega / m.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .lorentz import MASS, METRIC, PAULI, DomainError, energy, on_shell


def as_spin(s):
    """Parse ``s`` (number or string such as "3/2") into an exact Fraction."""
    try:
        f = Fraction(s) if isinstance(s, str) else Fraction(float(s)).limit_denominator(1000)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot read spin {s!r}") from exc
    if f < 0 or (2 * f).denominator != 1:
        raise DomainError(f"spin must be a non-negative half-integer, got {s!r}")
    return f


def spin_dim(s):
    return int(2 * as_spin(s)) + 1


def m_values(s):
    s = as_spin(s)
    return np.array([float(s - k) for k in range(spin_dim(s))])


@lru_cache(maxsize=None)
def _spin_matrices(twice_s):
    s = twice_s / 2
    m = s - np.arange(twice_s + 1)
    Jz = np.diag(m).astype(complex)
    Jp = np.zeros((twice_s + 1, twice_s + 1), dtype=complex)
    for k in range(1, twice_s + 1):
        # J+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, and m+1 sits at index k-1
        Jp[k - 1, k] = np.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    Jm = Jp.conj().T
    J = np.array([(Jp + Jm) / 2, (Jp - Jm) / 2j, Jz])
    J.setflags(write=False)
    return J


def spin_matrices(s):
    """(Jx, Jy, Jz) for spin ``s`` as an array of shape (3, 2s+1, 2s+1)."""
    return _spin_matrices(int(2 * as_spin(s)))


def wigner_D(s, U, tol=1e-9):
    """Spin-``s`` representation of the SU(2) element(s) ``U``.

    The rotation angle is read from ``U`` itself (range [0, 2 pi]) so that
    half-integer representations inherit the sign of the SU(2) element.
    Vectorised over leading axes of ``U``.
    """
    from .lorentz import su2_axis_angle

    U = np.asarray(U, dtype=complex)
    unit = np.abs(U @ np.swapaxes(U.conj(), -1, -2) - np.eye(2)).max()
    if unit > tol or np.abs(np.linalg.det(U) - 1).max() > tol:
        raise DomainError("wigner_D needs an SU(2) element")
    d = spin_dim(s)
    if d == 1:
        return np.ones(U.shape[:-2] + (1, 1), dtype=complex)
    if d == 2:
        return U.copy()
    axis, angle = su2_axis_angle(U)
    J = spin_matrices(s)
    nJ = np.einsum("...i,ijk->...jk", axis, J)
    lam, V = np.linalg.eigh(nJ)
    phase = np.exp(-1j * angle[..., None] * lam)
    return np.einsum("...ij,...j,...kj->...ik", V, phase, V.conj())


# --- Dirac algebra ---------------------------------------------------------

_I2 = np.eye(2)
_Z2 = np.zeros((2, 2))

GAMMA = np.array(
    [np.block([[_I2, _Z2], [_Z2, -_I2]]).astype(complex)]
    + [np.block([[_Z2, PAULI[k]], [-PAULI[k], _Z2]]) for k in (1, 2, 3)]
)
GAMMA5 = 1j * GAMMA[0] @ GAMMA[1] @ GAMMA[2] @ GAMMA[3]
SIGMA_MUNU = 0.5j * (
    np.einsum("mab,nbc->mnac", GAMMA, GAMMA) - np.einsum("nab,mbc->mnac", GAMMA, GAMMA)
)
# charge conjugation matrix C = i gamma^2 gamma^0
CHARGE_CONJ = 1j * GAMMA[2] @ GAMMA[0]

for _a in (GAMMA, GAMMA5, SIGMA_MUNU, CHARGE_CONJ):
    _a.setflags(write=False)


def slash(p):
    """p-slash = gamma^mu p_mu for four-vector(s) ``p``."""
    p_low = np.asarray(p) @ METRIC
    return np.einsum("...m,mab->...ab", p_low, GAMMA)


def bar(psi):
    """Dirac adjoint as a row: psi^dagger gamma^0 (vectorised)."""
    return np.einsum("...a,ab->...b", np.conj(psi), GAMMA[0])


def _m_index(m):
    if m in (0.5, Fraction(1, 2)):
        return 0
    if m in (-0.5, Fraction(-1, 2)):
        return 1
    raise DomainError(f"Dirac spin label must be +1/2 or -1/2, got {m!r}")


def dirac_u_matrix(p3, mass=MASS):
    """Positive-energy spinors as columns: shape (..., 4, 2), columns m = +1/2, -1/2."""
    p3 = np.asarray(p3, dtype=float)
    w = energy(p3, mass)
    ps = np.einsum("...i,ijk->...jk", p3, PAULI[1:])
    n = np.sqrt(2 * mass * (w + mass))
    upper = ((w + mass) / n)[..., None, None] * _I2
    lower = ps / n[..., None, None]
    return np.concatenate([upper, lower], axis=-2)


def dirac_u(p, m, mass=MASS):
    """u(p, m) for on-shell four-momentum ``p`` (energy recomputed from p[1:])."""
    return dirac_u_matrix(np.asarray(p, dtype=float)[..., 1:], mass)[..., _m_index(m)]


def dirac_v_matrix(p3, mass=MASS):
    """Negative-energy spinors v(p, m) = C ubar(p, m)^T, columns m = +1/2, -1/2."""
    U = dirac_u_matrix(p3, mass)
    ubar_t = np.einsum("ab,...bm->...am", GAMMA[0].T, np.conj(U))
    return np.einsum("ab,...bm->...am", CHARGE_CONJ, ubar_t)


def dirac_v(p, m, mass=MASS):
    return dirac_v_matrix(np.asarray(p, dtype=float)[..., 1:], mass)[..., _m_index(m)]


def bilinear(pa3, pb3, matrix, kind="u", mass=MASS):
    """2x2 spin matrix of wbar(p_a, m_a) M w(p_b, m_b) for w = u or v."""
    spinors = dirac_u_matrix if kind == "u" else dirac_v_matrix
    Wa = spinors(pa3, mass)
    Wb = spinors(pb3, mass)
    return np.einsum("...am,ab,bc,...cn->...mn", np.conj(Wa), GAMMA[0], matrix, Wb)


def gordon_residual(pa, ma, pb, mb, mu, mass=MASS):
    """ubar_a gamma^mu u_b minus its convection + spin (Gordon) decomposition."""
    pa = on_shell(np.asarray(pa, dtype=float)[1:], mass)
    pb = on_shell(np.asarray(pb, dtype=float)[1:], mass)
    ua = dirac_u(pa, ma, mass)
    ub = dirac_u(pb, mb, mass)
    ubar = bar(ua)
    lhs = ubar @ GAMMA[mu] @ ub
    q_low = METRIC @ (pa - pb)
    convection = (pa + pb)[mu] / (2 * mass) * (ubar @ ub)
    spin_part = 1j / (2 * mass) * np.einsum("a,nab,b,n->", ubar, SIGMA_MUNU[mu], ub, q_low)
    return lhs - convection - spin_part


def boost_spin_term(s, p3, mass=MASS):
    """Spin part of the boost generator, (J x p)_i / (omega + m).

    Returns shape (..., 3, d, d). For s = 1/2 this is (sigma x p)/(2(omega + m)).
    """
    J = spin_matrices(s)
    p3 = np.asarray(p3, dtype=float)
    w = energy(p3, mass)
    u = p3 / (w + mass)[..., None]
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    return np.einsum("ijk,jab,...k->...iab", eps, J, u)

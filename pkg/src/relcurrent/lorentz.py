"""Four-vectors, Lorentz transformations and the SL(2,C) covering map.

Conventions: metric (+,-,-,-), natural units with the particle mass set to 1.
Four-vectors are float arrays of shape (..., 4) ordered (t, x, y, z); Lorentz
transforms are (4, 4) real arrays; spinor maps are (..., 2, 2) complex arrays
of unit determinant acting as X -> A X A^dagger on X = p^0 + p.sigma.

Wigner rotations are formed entirely inside SL(2,C), so half-integer spin
representations never need a sign reconstructed from an SO(3) matrix.
"""
from __future__ import annotations

import numpy as np

MASS = 1.0
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

# sigma_0 = identity followed by the Pauli matrices
PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

_LINALG_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside the domain of a kinematic construction."""


def minkowski_dot(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def energy(p3, mass=MASS):
    p3 = np.asarray(p3, dtype=float)
    return np.sqrt(np.sum(p3 * p3, axis=-1) + mass * mass)


def on_shell(p3, mass=MASS):
    """Four-momentum with the positive energy computed from the 3-momentum."""
    p3 = np.asarray(p3, dtype=float)
    return np.concatenate([energy(p3, mass)[..., None], p3], axis=-1)


def apply(L, p):
    return np.einsum("...ij,...j->...i", L, p)


def boost_from_velocity(beta):
    """Pure boost giving a particle at rest the velocity ``beta``."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (3,):
        raise DomainError(f"velocity must be a 3-vector, got shape {beta.shape}")
    b2 = float(beta @ beta)
    if b2 >= 1.0:
        raise DomainError(f"|beta| = {np.sqrt(b2):.6g} is not subluminal")
    L = np.eye(4)
    if b2 == 0.0:
        return L
    g = 1.0 / np.sqrt(1.0 - b2)
    L[0, 0] = g
    L[0, 1:] = g * beta
    L[1:, 0] = g * beta
    L[1:, 1:] += (g - 1.0) * np.outer(beta, beta) / b2
    return L


def velocity_from_rapidity(zeta):
    zeta = np.asarray(zeta, dtype=float)
    r = np.linalg.norm(zeta)
    if r == 0.0:
        return np.zeros(3)
    return np.tanh(r) * zeta / r


def boost_from_rapidity(zeta):
    return boost_from_velocity(velocity_from_rapidity(zeta))


def standard_boost(p):
    """The boost taking the rest momentum (m, 0, 0, 0) to the on-shell ``p``."""
    p = np.asarray(p, dtype=float)
    if p[0] <= 0:
        raise DomainError("standard boost needs positive energy")
    return boost_from_velocity(p[1:] / p[0])


def rotation_matrix(axis, angle):
    """4x4 active rotation by ``angle`` about ``axis`` (right-hand rule)."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    K = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    R3 = np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K
    L = np.eye(4)
    L[1:, 1:] = R3
    return L


def is_proper_orthochronous(L, tol=_LINALG_TOL):
    L = np.asarray(L, dtype=float)
    metric_ok = np.max(np.abs(L.T @ METRIC @ L - METRIC)) <= tol * max(1.0, np.max(np.abs(L)) ** 2)
    return bool(metric_ok and L[0, 0] >= 1.0 - tol and np.linalg.det(L) > 0)


def polar_decomposition(L):
    """Split ``L = B R`` into a pure boost ``B`` and a rotation ``R``."""
    L = np.asarray(L, dtype=float)
    B = boost_from_velocity(L[1:, 0] / L[0, 0])
    R = np.linalg.solve(B, L)
    return B, R


# --- SL(2,C) ---------------------------------------------------------------


def spinor_rotation(axis, angle):
    """exp(-i angle n.sigma/2); covers the active rotation about ``axis``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    ns = np.einsum("i,ijk->jk", n, PAULI[1:])
    return np.cos(angle / 2) * PAULI[0] - 1j * np.sin(angle / 2) * ns


def spinor_boost(zeta):
    """exp(zeta.sigma/2): Hermitian positive lift of the boost with rapidity ``zeta``."""
    zeta = np.asarray(zeta, dtype=float)
    r = np.linalg.norm(zeta)
    if r == 0.0:
        return PAULI[0].copy()
    ns = np.einsum("i,ijk->jk", zeta / r, PAULI[1:])
    return np.cosh(r / 2) * PAULI[0] + np.sinh(r / 2) * ns


def spinor_standard_boost(p3, mass=MASS):
    """Hermitian SL(2,C) lift of the standard boost, vectorised over ``p3``.

    B(p) = (omega + m + p.sigma) / sqrt(2 m (omega + m)) satisfies
    B B^dagger = (p^0 + p.sigma) / m.
    """
    p3 = np.asarray(p3, dtype=float)
    w = energy(p3, mass)
    ps = np.einsum("...i,ijk->...jk", p3, PAULI[1:])
    num = (w + mass)[..., None, None] * PAULI[0] + ps
    return num / np.sqrt(2 * mass * (w + mass))[..., None, None]


def spinor_standard_boost_inverse(p3, mass=MASS):
    p3 = np.asarray(p3, dtype=float)
    w = energy(p3, mass)
    ps = np.einsum("...i,ijk->...jk", p3, PAULI[1:])
    num = (w + mass)[..., None, None] * PAULI[0] - ps
    return num / np.sqrt(2 * mass * (w + mass))[..., None, None]


def covering_to_lorentz(A, tol=1e-9):
    """Lorentz matrix of the spinor map ``A``: L^mu_nu = tr(sigma_mu A sigma_nu A^dag)/2."""
    A = np.asarray(A, dtype=complex)
    if abs(np.linalg.det(A) - 1.0) > tol:
        raise DomainError(f"det A = {np.linalg.det(A):.6g}, expected 1")
    L = 0.5 * np.einsum("mab,bc,ncd,ad->mn", PAULI, A, PAULI, A.conj())
    return L.real


def _su2_from_rotation(R3):
    # quaternion with non-negative scalar part
    q = np.empty(4)
    tr = np.trace(R3)
    q[0] = 0.5 * np.sqrt(max(0.0, 1.0 + tr))
    q[1] = 0.5 * np.sqrt(max(0.0, 1.0 + R3[0, 0] - R3[1, 1] - R3[2, 2]))
    q[2] = 0.5 * np.sqrt(max(0.0, 1.0 - R3[0, 0] + R3[1, 1] - R3[2, 2]))
    q[3] = 0.5 * np.sqrt(max(0.0, 1.0 - R3[0, 0] - R3[1, 1] + R3[2, 2]))
    k = int(np.argmax(q))
    if k == 0:
        q[1] = (R3[2, 1] - R3[1, 2]) / (4 * q[0])
        q[2] = (R3[0, 2] - R3[2, 0]) / (4 * q[0])
        q[3] = (R3[1, 0] - R3[0, 1]) / (4 * q[0])
    elif k == 1:
        q[0] = (R3[2, 1] - R3[1, 2]) / (4 * q[1])
        q[2] = (R3[0, 1] + R3[1, 0]) / (4 * q[1])
        q[3] = (R3[0, 2] + R3[2, 0]) / (4 * q[1])
    elif k == 2:
        q[0] = (R3[0, 2] - R3[2, 0]) / (4 * q[2])
        q[1] = (R3[0, 1] + R3[1, 0]) / (4 * q[2])
        q[3] = (R3[1, 2] + R3[2, 1]) / (4 * q[2])
    else:
        q[0] = (R3[1, 0] - R3[0, 1]) / (4 * q[3])
        q[1] = (R3[0, 2] + R3[2, 0]) / (4 * q[3])
        q[2] = (R3[1, 2] + R3[2, 1]) / (4 * q[3])
    if q[0] < 0:
        q = -q
    q /= np.linalg.norm(q)
    return q[0] * PAULI[0] - 1j * np.einsum("i,ijk->jk", q[1:], PAULI[1:])


def lift_to_spinor(L):
    """SL(2,C) preimage of a proper orthochronous ``L``.

    The boost factor of the polar decomposition is lifted to its Hermitian
    positive preimage and the rotation factor to the SU(2) element with
    non-negative trace. The overall sign is therefore a convention; pass a
    spinor map directly wherever the sign matters.
    """
    L = np.asarray(L, dtype=float)
    if not is_proper_orthochronous(L, tol=1e-9):
        raise DomainError("only proper orthochronous transforms can be lifted")
    B, R = polar_decomposition(L)
    beta = B[1:, 0] / B[0, 0]
    b = np.linalg.norm(beta)
    zeta = np.arctanh(b) * beta / b if b > 0 else np.zeros(3)
    return spinor_boost(zeta) @ _su2_from_rotation(R[1:, 1:])


def as_spinor(T):
    """Accept either a 4x4 Lorentz matrix or a 2x2 spinor map."""
    T = np.asarray(T)
    if T.shape == (2, 2):
        return T.astype(complex)
    if T.shape == (4, 4):
        return lift_to_spinor(T)
    raise DomainError(f"expected a (4,4) or (2,2) array, got {T.shape}")


def as_lorentz(T):
    T = np.asarray(T)
    if T.shape == (4, 4):
        return T.astype(float)
    return covering_to_lorentz(T)


def wigner_rotation(T, p, mass=MASS):
    """SU(2) Wigner rotation W(Lambda p <- p) = B(Lambda p)^-1 A B(p).

    ``T`` is a Lorentz matrix or spinor map; ``p`` is a four-momentum or an
    array of them (only the spatial part is used, the energy being implied).
    """
    A = as_spinor(T)
    p = np.asarray(p, dtype=float)
    p3 = p[..., 1:]
    Lam = covering_to_lorentz(A)
    q3 = apply(Lam, on_shell(p3, mass))[..., 1:]
    return spinor_standard_boost_inverse(q3, mass) @ A @ spinor_standard_boost(p3, mass)


def su2_axis_angle(U):
    """Axis and angle in [0, 2 pi] of U = cos(a/2) - i sin(a/2) n.sigma (vectorised)."""
    U = np.asarray(U, dtype=complex)
    a0 = 0.5 * np.real(U[..., 0, 0] + U[..., 1, 1])
    # v_k = i tr(sigma_k U)/2
    v = np.real(0.5j * np.einsum("kab,...ba->...k", PAULI[1:], U))
    s = np.linalg.norm(v, axis=-1)
    angle = 2.0 * np.arctan2(s, a0)
    with np.errstate(invalid="ignore", divide="ignore"):
        axis = np.where(s[..., None] > 0, v / np.where(s > 0, s, 1.0)[..., None], 0.0)
    return axis, angle


def is_su2(U, tol=_LINALG_TOL):
    U = np.asarray(U, dtype=complex)
    unitary = np.max(np.abs(U @ U.conj().T - np.eye(2))) <= tol
    return bool(unitary and abs(np.linalg.det(U) - 1) <= tol)


def random_spinor_map(rng, scale=1.0):
    """exp of a random traceless complex 2x2 matrix (a random SL(2,C) element)."""
    from scipy.linalg import expm

    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    M = 0.5 * scale * np.einsum("i,ijk->jk", c, PAULI[1:])
    return expm(M)

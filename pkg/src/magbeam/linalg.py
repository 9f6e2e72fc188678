"""Small dense linear-algebra helpers."""
import numpy as np

from .errors import NumericalFailure


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues ascending and eigenvectors as columns.
    Iterates until the off-diagonal Frobenius norm is at most ``tol`` times the
    Frobenius norm of ``a``.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("square matrix required")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.diag(a).copy(), v

    def off(x):
        return np.sqrt(2.0 * np.sum(np.triu(x, 1) ** 2))

    for _ in range(max_sweeps):
        if off(a) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if off(a) > tol * scale:
            raise NumericalFailure("Jacobi iteration did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def real_embedding(h):
    """Map Hermitian ``P + jQ`` to the real symmetric ``[[P, -Q], [Q, P]]``."""
    h = np.asarray(h)
    p, q = h.real, h.imag
    return np.block([[p, -q], [q, p]])


def hermitian_from_embedding(y):
    """Inverse of :func:`real_embedding`, averaging a generic symmetric block matrix."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0] // 2
    p = 0.5 * (y[:n, :n] + y[n:, n:])
    q = 0.5 * (y[n:, :n] - y[:n, n:])
    x = p + 1j * q
    return 0.5 * (x + x.conj().T)


def min_eig(a):
    return float(np.linalg.eigvalsh(a)[0])


def hermitize(a):
    return 0.5 * (a + a.conj().T)

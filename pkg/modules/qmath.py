from __future__ import annotations

import logging
from typing import Sequence, Tuple

import numpy as np

from modules.errors import ConvergenceError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_CLAMP_TOL = 1e-10
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
JACOBI_MAX_DIM = 16

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def _as_matrix(m, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}.")
    return arr


def _square(m, name: str = "matrix") -> np.ndarray:
    arr = _as_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}.")
    return arr


def qubit_count(dim: int) -> int:
    """Number of qubits for a Hilbert-space dimension that must be a power of two."""
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise ValueError(f"Dimension {dim} is not a power of two.")
    return n


def hermiticity_error(m) -> float:
    arr = _square(m)
    return float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0


def is_hermitian(m, tol: float = 1e-12) -> bool:
    return hermiticity_error(m) <= tol


def kron(a, b) -> np.ndarray:
    """Kronecker product; entry (i·p+k, j·q+l) is a[i, j]·b[k, l]."""
    return np.kron(_as_matrix(a, "a"), _as_matrix(b, "b"))


def _check_keep(keep: Sequence[int], n: int) -> Tuple[int, ...]:
    keep = tuple(int(q) for q in keep)
    if not keep:
        raise ValueError("keep must name at least one qubit.")
    if len(set(keep)) != len(keep):
        raise ValueError(f"keep has repeated qubits: {keep}.")
    if any(q < 0 or q >= n for q in keep):
        raise ValueError(f"keep {keep} out of range for {n} qubits.")
    return keep


def partial_trace(rho, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on ``keep`` (in the given order), tracing the rest."""
    rho = _square(rho, "rho")
    n = qubit_count(rho.shape[0])
    keep = _check_keep(keep, n)
    traced = [q for q in range(n) if q not in keep]

    tensor = rho.reshape([2] * (2 * n))
    order = list(keep) + traced
    tensor = tensor.transpose(order + [n + q for q in order])

    dk, dt = 2 ** len(keep), 2 ** len(traced)
    reduced = np.einsum("ajbj->ab", tensor.reshape(dk, dt, dk, dt))
    return 0.5 * (reduced + reduced.conj().T)


def purification_factor(psi, keep: Sequence[int]) -> np.ndarray:
    """Matrix F with F·F† equal to the reduction of |psi><psi| onto ``keep``.

    Rows index the kept qubits (in the given order), columns the traced ones.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    n = qubit_count(psi.size)
    keep = _check_keep(keep, n)
    traced = [q for q in range(n) if q not in keep]
    tensor = psi.reshape([2] * n).transpose(list(keep) + traced)
    return tensor.reshape(2 ** len(keep), 2 ** len(traced))


def _jacobi_eigen(h: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a = h.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    threshold = JACOBI_TOL * max(1.0, float(np.linalg.norm(a)))
    off_mask = ~np.eye(n, dtype=bool)

    for sweep in range(JACOBI_MAX_SWEEPS + 1):
        off = float(np.sqrt(np.sum(np.abs(a[off_mask]) ** 2)))
        if off <= threshold:
            logger.debug("Jacobi converged after %d sweep(s), off-norm %.3e", sweep, off)
            return a.diagonal().real.copy(), v
        if sweep == JACOBI_MAX_SWEEPS:
            break

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = np.conj(apq / mag)
                theta = 0.5 * np.arctan2(2.0 * mag, (a[q, q] - a[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                g = np.array([[c, s], [-s * phase, c * phase]], dtype=complex)

                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ g

    raise ConvergenceError(f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps.")


def hermitian_eigen(h, method: str = "auto") -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns eigenvalues sorted descending and the matching orthonormal eigenvectors
    as columns. ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    dimension 16, LAPACK above).
    """
    h = _square(h, "h")
    err = hermiticity_error(h)
    if err > HERMITIAN_TOL:
        raise ValueError(f"Matrix is not Hermitian (max |H - H^dagger| = {err:.3e}).")
    h = 0.5 * (h + h.conj().T)

    method = method.strip().lower()
    if method == "auto":
        method = "jacobi" if h.shape[0] <= JACOBI_MAX_DIM else "lapack"

    if method == "jacobi":
        evals, evecs = _jacobi_eigen(h)
    elif method == "lapack":
        evals, evecs = np.linalg.eigh(h)
    else:
        raise ValueError(f"Unknown eigen method '{method}'.")

    order = np.argsort(-evals, kind="stable")
    return evals[order], evecs[:, order]


def validate_density_matrix(rho, dim: int | None = None) -> np.ndarray:
    """Return ``rho`` as an array after checking shape, Hermiticity and unit trace."""
    rho = _square(rho, "rho")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"Expected a {dim}x{dim} density matrix, got {rho.shape}.")
    err = hermiticity_error(rho)
    if err > HERMITIAN_TOL:
        raise ValueError(f"Density matrix is not Hermitian (error {err:.3e}).")
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > TRACE_TOL:
        raise ValueError(f"Density matrix trace is {trace.real:.12f}, expected 1.")
    return rho


def psd_sqrt(rho) -> np.ndarray:
    """Hermitian positive square root S with S·S = rho.

    Eigenvalues in (-1e-10, 0) are clamped to zero; anything more negative means
    the input is not a density matrix.
    """
    evals, evecs = hermitian_eigen(rho)
    if evals.size and evals[-1] < -PSD_CLAMP_TOL:
        raise ValueError(f"Matrix has eigenvalue {evals[-1]:.3e}; not positive semidefinite.")
    roots = np.sqrt(np.clip(evals, 0.0, None))
    s = (evecs * roots) @ evecs.conj().T
    return 0.5 * (s + s.conj().T)

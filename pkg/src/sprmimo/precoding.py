"""Downlink precoders, including multi-cell block diagonalization (MBD).

MBD projects a conventional precoder onto the null space of the stacked
inter-cell edge channels ``A`` estimated by the BS, so that its downlink
signal does not reach the edge users of neighbouring cells.

All precoders are returned with their normalization factor ``gamma``.  For
the MF family ``Tr(W^H W) = K``; for the ZF family ``gamma`` is the mean of
the diagonal of the inverse Gram matrix, which gives the same total power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import full_column_rank
from .errors import DegenerateChannelError, SingularityError


@dataclass(frozen=True)
class NullSpaceBasis:
    """Orthonormal basis ``B`` (``M x (M - rank)``) of ``Null(A)``."""

    B: np.ndarray
    rank: int
    singular_values: np.ndarray


def null_space(A: np.ndarray) -> NullSpaceBasis:
    """Null space of ``A`` from its full SVD.

    The numerical rank counts singular values above
    ``sigma_max * max(A.shape) * eps``; ``B`` collects the remaining right
    singular vectors.  An empty or all-zero ``A`` yields the identity basis.
    """
    n_rows, m = A.shape
    if n_rows == 0:
        return NullSpaceBasis(B=np.eye(m, dtype=complex), rank=0, singular_values=np.zeros(0))
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    tol = (s[0] if s.size else 0.0) * max(A.shape) * np.finfo(float).eps
    rank = int(np.sum(s > tol)) if s.size and s[0] > 0 else 0
    return NullSpaceBasis(B=Vh[rank:].conj().T, rank=rank, singular_values=s[:rank])


def projector(B: np.ndarray) -> np.ndarray:
    """Orthogonal projector ``B B^H`` onto the column space of ``B``.

    ``B`` has orthonormal columns, so ``B^H`` is its pseudo-inverse.
    """
    return B @ B.conj().T


def _where(cell: int | None) -> str:
    return "" if cell is None else f" in cell {cell}"


def mf_precoder(H_hat: np.ndarray, cell: int | None = None) -> tuple[np.ndarray, float]:
    k = H_hat.shape[1]
    gamma = float(np.real(np.trace(H_hat.T @ H_hat.conj()))) / k
    if not gamma > 0:
        raise DegenerateChannelError(f"MF normalization vanished{_where(cell)}")
    return H_hat.conj() / np.sqrt(gamma), gamma


def _zero_forcing(effective: np.ndarray, cell: int | None, label: str) -> tuple[np.ndarray, float]:
    """``W = X (X^H X)^-1 / sqrt(gamma)`` with ``gamma = Tr((X^H X)^-1) / K``.

    ``X`` is the (possibly projected) conjugate channel, ``M x K``.
    """
    if not full_column_rank(effective):
        raise SingularityError(f"{label} Gram matrix is singular{_where(cell)}")
    # pinv(X^H) = X (X^H X)^-1, and its squared Frobenius norm is Tr((X^H X)^-1).
    W0 = np.linalg.pinv(effective.conj().T)
    k = effective.shape[1]
    gamma = float(np.sum(np.abs(W0) ** 2)) / k
    return W0 / np.sqrt(gamma), gamma


def zf_precoder(H_hat: np.ndarray, cell: int | None = None) -> tuple[np.ndarray, float]:
    """``W = H* (H^T H*)^-1 / sqrt(gamma)``, ``gamma = Tr((H^T H*)^-1) / K``."""
    return _zero_forcing(H_hat.conj(), cell, "ZF")


def mf_mbd(H_hat: np.ndarray, P: np.ndarray, cell: int | None = None) -> tuple[np.ndarray, float]:
    """``W = P H* / sqrt(gamma)`` with ``gamma = Tr(H^T P H*) / K``."""
    k = H_hat.shape[1]
    projected = P @ H_hat.conj()
    gamma = float(np.real(np.trace(H_hat.T @ projected))) / k
    # Relative to the unprojected energy: anything at rounding level means
    # every channel lies in the row space of the inter-cell matrix.
    scale = float(np.sum(np.abs(H_hat) ** 2)) / k
    if not gamma > scale * max(P.shape) * np.finfo(float).eps:
        raise DegenerateChannelError(f"projected channels vanish{_where(cell)}")
    return projected / np.sqrt(gamma), gamma


def zf_mbd(H_hat: np.ndarray, P: np.ndarray, cell: int | None = None) -> tuple[np.ndarray, float]:
    """``W = P H* (H^T P H*)^-1 / sqrt(gamma)``, ``gamma = Tr((H^T P H*)^-1) / K``.

    Fails when the projected channels are dependent, which happens as soon
    as ``K`` exceeds the null-space dimension.
    """
    return _zero_forcing(P @ H_hat.conj(), cell, "projected ZF")


@dataclass(frozen=True)
class PrecoderSet:
    """Per-cell precoding matrices (``M x K_i``, local user order) and factors."""

    W: tuple[np.ndarray, ...]
    gamma: np.ndarray
    kind: str
    null_rank: np.ndarray | None = None


def build_precoders(estimates, kind: str) -> PrecoderSet:
    """Precoders for every cell from an :class:`~sprmimo.estimation.EstimateSet`."""
    mbd = kind.endswith("-mbd")
    if mbd and estimates.intercell is None:
        raise ValueError(f"{kind} needs inter-cell estimates")
    W, gammas, ranks = [], [], []
    for cell, H_hat in enumerate(estimates.own):
        if mbd:
            basis = null_space(estimates.intercell[cell].A)
            ranks.append(basis.rank)
            P = projector(basis.B)
            w, g = (mf_mbd if kind == "mf-mbd" else zf_mbd)(H_hat, P, cell)
        elif kind == "mf":
            w, g = mf_precoder(H_hat, cell)
        elif kind == "zf":
            w, g = zf_precoder(H_hat, cell)
        else:
            raise ValueError(f"unknown precoder {kind!r}")
        W.append(w)
        gammas.append(g)
    return PrecoderSet(
        W=tuple(W),
        gamma=np.array(gammas),
        kind=kind,
        null_rank=np.array(ranks) if mbd else None,
    )

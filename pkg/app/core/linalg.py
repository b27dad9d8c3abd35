"""
Linalg - 密行列の数値カーネル
エルミート固有値分解・実SVD・トレースノルム・PSD平方根・テンソル積・部分トレース/部分転置

複合インデックスはプロジェクト全体で A-major (i_A * d_B + i_B) に固定。
"""

import logging
from typing import Literal, Tuple

import numpy as np

from .errors import (
    DimensionMismatchError,
    NonFiniteError,
    NonSquareError,
    NotHermitianError,
    NotPositiveError,
    SingularBelowCutoffError,
)
from .settings import get_settings

logger = logging.getLogger(__name__)

ComplexMatrix = np.ndarray
RealMatrix = np.ndarray
Side = Literal["A", "B"]

HERMITIAN_TOL = get_settings().tolerance("hermitian")
PSD_CLAMP = get_settings().tolerance("psd_clamp")
PINV_CUTOFF = get_settings().tolerance("pinv_cutoff")


def _check_finite(M: np.ndarray) -> None:
    if not np.all(np.isfinite(M)):
        raise NonFiniteError("matrix contains non-finite entries")


def _check_square(M: np.ndarray) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {M.shape}")


def hermitian_part(H: ComplexMatrix, tol: float = HERMITIAN_TOL) -> ComplexMatrix:
    """
    (H + H†)/2 を返す。非対称性が tol を超えたら NotHermitianError

    Args:
        H: 正方行列
        tol: ‖H − H†‖_max の許容値

    Returns:
        対称化した行列
    """
    H = np.asarray(H, dtype=complex)
    _check_square(H)
    _check_finite(H)
    asym = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    if asym > tol:
        raise NotHermitianError(asym, tol)
    return (H + H.conj().T) / 2


def is_hermitian(H: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        return False
    return bool(np.max(np.abs(H - H.conj().T)) <= tol)


def hermitian_eig(H: ComplexMatrix, tol: float = HERMITIAN_TOL) -> Tuple[np.ndarray, ComplexMatrix]:
    """
    エルミート行列の固有値分解（固有値は昇順）

    Returns:
        (eigenvalues, eigenvectors) 列が固有ベクトル
    """
    Hs = hermitian_part(H, tol)
    evals, evecs = np.linalg.eigh(Hs)
    return evals, evecs


def svd_real(M: RealMatrix) -> Tuple[RealMatrix, np.ndarray, RealMatrix]:
    """
    実行列の特異値分解 M = U Σ Vᵀ（特異値は降順）

    Returns:
        (U, singular_values, V)  U, V は直交行列
    """
    M = np.asarray(M, dtype=float)
    _check_finite(M)
    U, s, Vt = np.linalg.svd(M, full_matrices=True)
    return U, s, Vt.T


def trace_norm(M: np.ndarray, method: Literal["svd", "eig"] = "svd") -> float:
    """
    トレースノルム ‖M‖_tr = Σ σ_i(M)

    Args:
        M: 実または複素行列
        method: "svd"（特異値の和）または "eig"（Tr√(M†M) を対称固有値分解で計算）

    Returns:
        トレースノルム
    """
    M = np.asarray(M)
    _check_finite(M)
    if M.size == 0:
        return 0.0
    if method == "svd":
        return float(np.sum(np.linalg.svd(M, compute_uv=False)))
    if method == "eig":
        gram = M.conj().T @ M
        evals = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
        return float(np.sum(np.sqrt(np.clip(evals, 0.0, None))))
    raise ValueError(f"unknown method: {method}")


def _psd_eig(H: ComplexMatrix, clamp: float) -> Tuple[np.ndarray, ComplexMatrix]:
    evals, evecs = hermitian_eig(H)
    if evals.size and evals[0] < -clamp:
        raise NotPositiveError(float(evals[0]), clamp)
    return np.clip(evals, 0.0, None), evecs


def psd_sqrt(H: ComplexMatrix, clamp: float = PSD_CLAMP) -> ComplexMatrix:
    """PSD 行列の平方根（[−clamp, 0) の固有値は 0 とみなす）"""
    evals, evecs = _psd_eig(H, clamp)
    return (evecs * np.sqrt(evals)) @ evecs.conj().T


def psd_inv_sqrt(H: ComplexMatrix, cutoff: float, clamp: float = PSD_CLAMP) -> ComplexMatrix:
    """
    PSD 行列の逆平方根

    Raises:
        SingularBelowCutoffError: 最小固有値が cutoff 以下（局所ランク欠損の通知に使う）
    """
    evals, evecs = _psd_eig(H, clamp)
    if evals.size and evals[0] <= cutoff:
        raise SingularBelowCutoffError(float(evals[0]), cutoff)
    return (evecs / np.sqrt(evals)) @ evecs.conj().T


def pinv_symmetric(S: RealMatrix, cutoff: float = PINV_CUTOFF) -> RealMatrix:
    """
    実対称行列の Moore–Penrose 逆行列（固有値分解、|λ| <= cutoff·max|λ| は 0 扱い）
    """
    S = np.asarray(S, dtype=float)
    _check_square(S)
    _check_finite(S)
    evals, evecs = np.linalg.eigh((S + S.T) / 2)
    scale = max(float(np.max(np.abs(evals))) if evals.size else 0.0, 1.0)
    inv = np.zeros_like(evals)
    keep = np.abs(evals) > cutoff * scale
    inv[keep] = 1.0 / evals[keep]
    return (evecs * inv) @ evecs.T


def kron(X: ComplexMatrix, Y: ComplexMatrix) -> ComplexMatrix:
    """Kronecker 積 X ⊗ Y"""
    return np.kron(np.asarray(X), np.asarray(Y))


def _check_bipartite(rho: np.ndarray, dA: int, dB: int) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape != (dA * dB, dA * dB):
        raise DimensionMismatchError(f"expected ({dA * dB}, {dA * dB}) for dims ({dA}, {dB}), got {rho.shape}")
    return rho


def partial_trace(rho: ComplexMatrix, dA: int, dB: int, side: Side) -> ComplexMatrix:
    """
    部分トレース

    Args:
        rho: (dA·dB)×(dA·dB) 行列
        side: トレースアウトする側。"B" なら ρ_A を返す

    Returns:
        縮約行列
    """
    rho = _check_bipartite(rho, dA, dB)
    r = rho.reshape(dA, dB, dA, dB)
    if side == "B":
        return np.einsum("ijkj->ik", r)
    if side == "A":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def partial_transpose(rho: ComplexMatrix, dA: int, dB: int, side: Side = "B") -> ComplexMatrix:
    """部分転置 ρ^{T_side}"""
    rho = _check_bipartite(rho, dA, dB)
    r = rho.reshape(dA, dB, dA, dB)
    if side == "B":
        return r.transpose(0, 3, 2, 1).reshape(dA * dB, dA * dB)
    if side == "A":
        return r.transpose(2, 1, 0, 3).reshape(dA * dB, dA * dB)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def expectation(rho: ComplexMatrix, op: ComplexMatrix) -> complex:
    """Tr[ρ·op]"""
    return complex(np.einsum("ij,ji->", np.asarray(rho), np.asarray(op)))

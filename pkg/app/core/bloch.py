"""
Bloch - su(d) 生成子と Bloch 表示の相互変換

生成子の順序は固定:
  1) 対称ペア (j<k, 辞書順)  E_jk + E_kj
  2) 反対称ペア (j<k, 辞書順) −i E_jk + i E_kj
  3) 対角生成子 l = 1..d−1   √(2/(l(l+1))) diag(1,…,1, −l, 0,…)
d=2 では (σ_x, σ_y, σ_z) になる。Bloch ベクトルは基底依存なので順序は変更しないこと。

係数の規約:
  状態   ρ = 𝟙/d + ½ r·π,    r_μ = Tr[ρ π_μ]
  観測量 A = (t/d)𝟙 + a·π,   t = Tr A, a_μ = Tr[A π_μ]/2
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Tuple

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError, ParameterRangeError
from .linalg import hermitian_part
from .settings import get_settings

if TYPE_CHECKING:
    from .states import BipartiteState

logger = logging.getLogger(__name__)

TRACE_TOL = get_settings().tolerance("trace")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    """
    su(d) 生成子の基底
    Tr[π_μ] = 0, Tr[π_μ π_ν] = 2δ_μν
    """
    dim: int
    generators: np.ndarray  # shape (d²−1, d, d)

    def __len__(self) -> int:
        return self.generators.shape[0]

    def gram(self) -> np.ndarray:
        """Gram 行列 Tr[π_μ π_ν]（理想は 2·𝟙）"""
        return np.einsum("mij,nji->mn", self.generators, self.generators).real

    def extended(self) -> np.ndarray:
        """Π_0 = √(2/d)𝟙 を先頭に付けた d² 個の基底"""
        return extended_basis(self.dim)


@lru_cache(maxsize=None)
def su_generators(d: int) -> GeneratorBasis:
    """
    一般化 Gell-Mann 行列（d²−1 個）

    Args:
        d: 次元（2 以上）

    Returns:
        GeneratorBasis（キャッシュされた読み取り専用インスタンス）
    """
    if d < 2:
        raise ParameterRangeError(f"dimension must be >= 2, got {d}")

    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    gens = []
    for j, k in pairs:
        g = np.zeros((d, d), dtype=complex)
        g[j, k] = g[k, j] = 1.0
        gens.append(g)
    for j, k in pairs:
        g = np.zeros((d, d), dtype=complex)
        g[j, k] = -1.0j
        g[k, j] = 1.0j
        gens.append(g)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        gens.append(np.diag(np.sqrt(2.0 / (l * (l + 1))) * diag).astype(complex))

    basis = GeneratorBasis(dim=d, generators=_readonly(np.array(gens)))
    logger.debug(f"su({d}) generators built: {len(basis)}")
    return basis


@lru_cache(maxsize=None)
def extended_basis(d: int) -> np.ndarray:
    """{Π_0 = √(2/d)𝟙, π_1, …, π_{d²−1}}（すべて Tr[Π_μ Π_ν] = 2δ_μν）"""
    gens = su_generators(d).generators
    pi0 = np.sqrt(2.0 / d) * np.eye(d, dtype=complex)
    return _readonly(np.concatenate([pi0[None], gens], axis=0))


@dataclass(frozen=True, eq=False)
class BlochState:
    """単一系の Bloch ベクトル"""
    dim: int
    r: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.r))

    @staticmethod
    def max_norm(d: int) -> float:
        """純粋状態の Bloch ベクトル長 √(2(d−1)/d)"""
        return float(np.sqrt(2.0 * (d - 1) / d))


def _validate_density(rho: np.ndarray) -> Tuple[np.ndarray, int]:
    rho = np.asarray(rho, dtype=complex)
    try:
        rho = hermitian_part(rho)
    except ValueError as e:
        raise InvalidStateError(str(e)) from e
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace must be 1, got {tr:.12f}")
    return rho, rho.shape[0]


def state_to_bloch(rho: np.ndarray) -> BlochState:
    """
    密度行列 → Bloch ベクトル r_μ = Tr[ρ π_μ]

    Raises:
        InvalidStateError: トレース ≠ 1 または非エルミート
    """
    rho, d = _validate_density(rho)
    gens = su_generators(d).generators
    r = np.einsum("ij,mji->m", rho, gens).real
    return BlochState(dim=d, r=r)


def bloch_to_state(r: np.ndarray, d: int) -> np.ndarray:
    """Bloch ベクトル → ρ = 𝟙/d + ½ r·π"""
    r = np.asarray(r, dtype=float)
    gens = su_generators(d).generators
    if r.shape != (len(gens),):
        raise DimensionMismatchError(f"Bloch vector for d={d} needs {len(gens)} components, got {r.shape}")
    return np.eye(d, dtype=complex) / d + 0.5 * np.einsum("m,mij->ij", r, gens)


def observable_to_bloch(A: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    観測量 → (t, a)  t = Tr A, a_μ = Tr[A π_μ]/2

    Raises:
        NotHermitianError: 非エルミート入力
    """
    A = hermitian_part(A)
    d = A.shape[0]
    gens = su_generators(d).generators
    t = float(np.trace(A).real)
    a = np.einsum("ij,mji->m", A, gens).real / 2.0
    return t, a


def bloch_to_observable(t: float, a: np.ndarray, d: int) -> np.ndarray:
    """(t, a) → A = (t/d)𝟙 + a·π"""
    a = np.asarray(a, dtype=float)
    gens = su_generators(d).generators
    if a.shape != (len(gens),):
        raise DimensionMismatchError(f"Bloch vector for d={d} needs {len(gens)} components, got {a.shape}")
    return (t / d) * np.eye(d, dtype=complex) + np.einsum("m,mij->ij", a, gens)


@dataclass(frozen=True, eq=False)
class BipartiteBloch:
    """
    二体状態の係数行列
    ρ = ¼ Σ χ_μν Π_μ^A ⊗ Π_ν^B,  χ_00 = 2/√(d_A d_B)
    a, b は局所 Bloch ベクトル、T = χ[1:, 1:] は相関テンソル
    """
    dA: int
    dB: int
    chi: np.ndarray
    a: np.ndarray
    b: np.ndarray
    T: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """係数行列から ρ を再構成"""
        PiA = extended_basis(self.dA)
        PiB = extended_basis(self.dB)
        rho = np.einsum("mn,mij,nkl->ikjl", self.chi, PiA, PiB, optimize=True) / 4.0
        n = self.dA * self.dB
        return rho.reshape(n, n)


def bipartite_expectations(rho: np.ndarray, dA: int, dB: int, ops_a: np.ndarray, ops_b: np.ndarray) -> np.ndarray:
    """
    Tr[ρ (X_μ ⊗ Y_ν)] の行列（実部）

    Args:
        rho: (dA·dB) 正方行列
        ops_a: shape (m, dA, dA)
        ops_b: shape (n, dB, dB)
    """
    r = np.asarray(rho).reshape(dA, dB, dA, dB)
    return np.einsum("abcd,mca,ndb->mn", r, ops_a, ops_b, optimize=True).real


def decompose_bipartite(state: "BipartiteState") -> BipartiteBloch:
    """
    二体状態 → (χ, a, b, T)

    Args:
        state: BipartiteState（rho, dA, dB を持つもの）

    Returns:
        BipartiteBloch
    """
    dA, dB = state.dA, state.dB
    rho = np.asarray(state.rho)
    if rho.shape != (dA * dB, dA * dB):
        raise DimensionMismatchError(f"rho shape {rho.shape} does not match dims ({dA}, {dB})")
    chi = bipartite_expectations(rho, dA, dB, extended_basis(dA), extended_basis(dB))
    a = chi[1:, 0] / np.sqrt(2.0 / dB)
    b = chi[0, 1:] / np.sqrt(2.0 / dA)
    return BipartiteBloch(dA=dA, dB=dB, chi=chi, a=a, b=b, T=chi[1:, 1:].copy())


def casimir(d: int) -> np.ndarray:
    """Σ_μ π_μ²（理論値 2(d²−1)/d·𝟙）"""
    gens = su_generators(d).generators
    return np.einsum("mij,mjk->ik", gens, gens)

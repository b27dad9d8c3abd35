"""
States - 状態の動物園とサンプラー
Werner / Horodecki / UPB / チェス盤 / Hilbert–Schmidt ランダム / 分離可能混合 / 最大エンタングル

乱数は (global_seed, stream_id, index) で決まるカウンタ型 Philox ストリーム。
正規乱数は 64bit 一様乱数からの Box–Muller で生成し、プラットフォーム間でビット再現する。
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .bloch import su_generators
from .errors import DimensionMismatchError, InvalidStateError, ParameterRangeError, ZeroDenominatorError
from .linalg import hermitian_part, kron, partial_trace, partial_transpose
from .settings import get_settings

logger = logging.getLogger(__name__)

_settings = get_settings()
TRACE_TOL = _settings.tolerance("trace")
PSD_TOL = _settings.tolerance("psd_clamp")

# 乱数ストリーム ID
STREAM_HS = 1
STREAM_SEPARABLE = 2
STREAM_CHESSBOARD = 3
STREAM_HAAR = 4


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """
    二体密度行列（d_A × d_B）
    Tr ρ = 1, エルミート, 最小固有値 ≥ −1e−10 を構築時に検証する
    """
    dA: int
    dB: int
    rho: np.ndarray

    def __post_init__(self):
        if int(self.dA) < 1 or int(self.dB) < 1:
            raise InvalidStateError(f"local dimensions must be >= 1, got ({self.dA}, {self.dB})")
        rho = np.array(self.rho, dtype=complex)
        n = self.dA * self.dB
        if rho.shape != (n, n):
            raise DimensionMismatchError(f"rho shape {rho.shape} does not match dims ({self.dA}, {self.dB})")
        try:
            rho = hermitian_part(rho)
        except ValueError as e:
            raise InvalidStateError(str(e)) from e
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace must be 1, got {tr:.12f}")
        min_eig = float(np.linalg.eigvalsh(rho)[0])
        if min_eig < -PSD_TOL:
            raise InvalidStateError(f"state has negative eigenvalue {min_eig:.3e}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dims(self):
        return (self.dA, self.dB)

    def reduced(self, side: str) -> np.ndarray:
        """縮約密度行列。side="A" なら ρ_A"""
        traced = "B" if side == "A" else "A"
        return partial_trace(self.rho, self.dA, self.dB, traced)

    def partial_transpose(self, side: str = "B") -> np.ndarray:
        return partial_transpose(self.rho, self.dA, self.dB, side)

    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.rho, self.rho).real)


def _normalized(rho: np.ndarray) -> np.ndarray:
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# 乱数
# ---------------------------------------------------------------------------

def stream_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """(seed, stream, index) から独立な Philox ジェネレータを作る"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream), int(index)])))


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    """標準正規乱数（Box–Muller, cos 枝のみ）"""
    u1 = 1.0 - rng.random(size)  # (0, 1]
    u2 = rng.random(size)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """標準複素正規乱数 (X + iY)/√2"""
    n = int(np.prod(shape))
    z = (box_muller(rng, n) + 1j * box_muller(rng, n)) / np.sqrt(2.0)
    return z.reshape(shape)


def haar_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar ランダム純粋状態の密度行列"""
    psi = complex_gaussian(rng, (d,))
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


# ---------------------------------------------------------------------------
# 状態ファミリー
# ---------------------------------------------------------------------------

def werner(d: int, phi: float) -> BipartiteState:
    """
    Werner 状態 ρ_W = 𝟙/d² + ¼ Σ_μ c π_μ⊗π_μ,  c = 2(dφ−1)/(d(d²−1))
    φ ≥ 0 で分離可能、φ < 0 でエンタングル

    Args:
        d: 局所次元（2 以上）
        phi: φ ∈ [−1, 1]
    """
    if d < 2:
        raise ParameterRangeError(f"d must be >= 2, got {d}")
    if not -1.0 <= phi <= 1.0:
        raise ParameterRangeError(f"phi must be in [-1, 1], got {phi}")
    gens = su_generators(d).generators
    c = 2.0 * (d * phi - 1.0) / (d * (d * d - 1))
    corr = np.einsum("mij,mkl->ikjl", gens, gens).reshape(d * d, d * d)
    rho = np.eye(d * d, dtype=complex) / d**2 + 0.25 * c * corr
    return BipartiteState(d, d, rho)


def horodecki(s: float, p: float) -> BipartiteState:
    """
    Horodecki の 3×3 束縛エンタングル状態 + 白色ノイズ
    ρ_H(s, p) = p ρ_H(s) + (1−p) 𝟙/9
    """
    if not 0.0 <= s <= 1.0:
        raise ParameterRangeError(f"s must be in [0, 1], got {s}")
    if not 0.0 <= p <= 1.0:
        raise ParameterRangeError(f"p must be in [0, 1], got {p}")
    m = np.zeros((9, 9))
    for i in range(8):
        m[i, i] = s
    for i in (0, 4, 8):
        for j in (0, 4, 8):
            m[i, j] = s
    m[6, 6] = 0.5 * (1 + s)
    m[8, 8] = 0.5 * (1 + s)
    m[6, 8] = m[8, 6] = 0.5 * np.sqrt(1 - s * s)
    rho_h = m / (8 * s + 1)
    return BipartiteState(3, 3, p * rho_h + (1 - p) * np.eye(9) / 9)


def _ket(a: Sequence[complex], b: Sequence[complex]) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def upb_vectors() -> List[np.ndarray]:
    """Tiles UPB の 5 本の直積ベクトル"""
    s2 = 1 / np.sqrt(2)
    e0, e1, e2 = np.eye(3)
    return [
        _ket(e0, s2 * (e0 - e1)),
        _ket(s2 * (e0 - e1), e2),
        _ket(e2, s2 * (e1 - e2)),
        _ket(s2 * (e1 - e2), e0),
        _ket((e0 + e1 + e2) / np.sqrt(3), (e0 + e1 + e2) / np.sqrt(3)),
    ]


def upb_tiles(p: float) -> BipartiteState:
    """UPB 束縛エンタングル状態 + 白色ノイズ ρ = p·¼(𝟙 − Σ|ψ_i⟩⟨ψ_i|) + (1−p)𝟙/9"""
    if not 0.0 <= p <= 1.0:
        raise ParameterRangeError(f"p must be in [0, 1], got {p}")
    proj = sum(np.outer(v, v.conj()) for v in upb_vectors())
    rho_upb = (np.eye(9) - proj) / 4.0
    return BipartiteState(3, 3, p * rho_upb + (1 - p) * np.eye(9) / 9)


def chessboard(m: float, n: float, a: float, b: float, c: float, dd: float) -> BipartiteState:
    """
    チェス盤状態 ρ_CB = 𝒩 Σ_i |V_i⟩⟨V_i|（9 成分を A-major 複合インデックスで解釈）

    Raises:
        ZeroDenominatorError: m = 0 または n = 0
    """
    if m == 0 or n == 0:
        raise ZeroDenominatorError(f"chessboard needs m != 0 and n != 0, got m={m}, n={n}")
    vs = np.array([
        [m, 0, a * c / n, 0, n, 0, 0, 0, 0],
        [0, a, 0, b, 0, c, 0, 0, 0],
        [n, 0, 0, 0, -m, 0, a * dd / m, 0, 0],
        [0, b, 0, -a, 0, 0, 0, dd, 0],
    ], dtype=float)
    rho = vs.T @ vs
    return BipartiteState(3, 3, _normalized(rho.astype(complex)))


def random_chessboard(seed: int, index: int = 0) -> BipartiteState:
    """
    6 パラメータを標準正規分布から引いたチェス盤状態
    |m| または |n| が閾値未満なら同じストリームで引き直す
    """
    threshold = _settings.chessboard_threshold()
    rng = stream_rng(seed, STREAM_CHESSBOARD, index)
    while True:
        m, n, a, b, c, dd = box_muller(rng, 6)
        if abs(m) >= threshold and abs(n) >= threshold:
            return chessboard(m, n, a, b, c, dd)
        logger.warning(f"chessboard sample {index}: resampling (m={m:.2e}, n={n:.2e})")


def random_hs(dA: int, dB: int, seed: int, index: int = 0) -> BipartiteState:
    """
    Hilbert–Schmidt 分布のランダム状態 ρ = GG†/Tr[GG†]（G は Ginibre 正方行列）
    """
    rng = stream_rng(seed, STREAM_HS, index)
    g = complex_gaussian(rng, (dA * dB, dA * dB))
    return BipartiteState(dA, dB, _normalized(g @ g.conj().T))


def random_separable(dA: int, dB: int, k: int, seed: int, index: int = 0) -> BipartiteState:
    """
    分離可能混合 Σ_i q_i ρ_i^A⊗ρ_i^B（q は単体上一様、各因子は Haar 純粋状態）
    """
    if k < 1:
        raise ParameterRangeError(f"k must be >= 1, got {k}")
    rng = stream_rng(seed, STREAM_SEPARABLE, index)
    weights = -np.log(1.0 - rng.random(k))
    weights = weights / weights.sum()
    rho = np.zeros((dA * dB, dA * dB), dtype=complex)
    for q in weights:
        rho += q * kron(haar_pure(dA, rng), haar_pure(dB, rng))
    return BipartiteState(dA, dB, _normalized(rho))


def max_entangled(d: int) -> BipartiteState:
    """(1/√d) Σ_i |ii⟩"""
    psi = np.eye(d).reshape(d * d) / np.sqrt(d)
    return BipartiteState(d, d, np.outer(psi, psi).astype(complex))


def product_state(rho_a: np.ndarray, rho_b: np.ndarray) -> BipartiteState:
    rho_a = np.asarray(rho_a, dtype=complex)
    rho_b = np.asarray(rho_b, dtype=complex)
    return BipartiteState(rho_a.shape[0], rho_b.shape[0], kron(rho_a, rho_b))


def maximally_mixed(dA: int, dB: int) -> BipartiteState:
    return BipartiteState(dA, dB, np.eye(dA * dB, dtype=complex) / (dA * dB))


def embed(state: BipartiteState, dA: int, dB: int) -> BipartiteState:
    """小さい二体状態を先頭の基底ベクトルに埋め込む（局所ランクはそのまま）"""
    if dA < state.dA or dB < state.dB:
        raise DimensionMismatchError(f"cannot embed {state.dims} into ({dA}, {dB})")
    va = np.eye(dA)[:, : state.dA]
    vb = np.eye(dB)[:, : state.dB]
    iso = kron(va, vb)
    return BipartiteState(dA, dB, iso @ state.rho @ iso.T)


def ppt_min_eigenvalue(state: BipartiteState) -> float:
    """ρ^{T_B} の最小固有値"""
    pt = state.partial_transpose("B")
    return float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])


# ---------------------------------------------------------------------------
# ファミリー登録（gen サブコマンド用）
# ---------------------------------------------------------------------------

FAMILIES: Dict[str, Callable[..., BipartiteState]] = {
    "werner": lambda d=3, phi=-0.5, **_: werner(int(d), float(phi)),
    "horodecki": lambda s=0.5, p=1.0, **_: horodecki(float(s), float(p)),
    "upb": lambda p=1.0, **_: upb_tiles(float(p)),
    "chessboard": lambda seed=0, index=0, **_: random_chessboard(int(seed), int(index)),
    "hs": lambda dA=3, dB=3, seed=0, index=0, **_: random_hs(int(dA), int(dB), int(seed), int(index)),
    "separable": lambda dA=3, dB=3, k=4, seed=0, index=0, **_: random_separable(
        int(dA), int(dB), int(k), int(seed), int(index)
    ),
    "bell": lambda d=2, **_: max_entangled(int(d)),
    "mixed": lambda dA=3, dB=3, **_: maximally_mixed(int(dA), int(dB)),
}


def make_state(family: str, **params) -> BipartiteState:
    """名前付きファミリーから状態を生成"""
    if family not in FAMILIES:
        raise ParameterRangeError(f"unknown family {family!r} (known: {', '.join(FAMILIES)})")
    return FAMILIES[family](**{k: v for k, v in params.items() if v is not None})


# ---------------------------------------------------------------------------
# 状態ファイル I/O
# ---------------------------------------------------------------------------

def state_to_json(state: BipartiteState) -> Dict:
    """{"dA": int, "dB": int, "rho": [[[re, im], ...], ...]}"""
    return {
        "dA": state.dA,
        "dB": state.dB,
        "rho": [[[float(z.real), float(z.imag)] for z in row] for row in state.rho],
    }


def state_from_json(data: Dict) -> BipartiteState:
    """状態ファイルの辞書表現 → BipartiteState"""
    try:
        dA = int(data["dA"])
        dB = int(data["dB"])
        arr = np.asarray(data["rho"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidStateError(f"malformed state file: {e}") from e
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidStateError(f"rho entries must be [re, im] pairs, got array of shape {arr.shape}")
    return BipartiteState(dA, dB, arr[..., 0] + 1j * arr[..., 1])


def load_state(path: Union[str, Path]) -> BipartiteState:
    """状態ファイルを読み込む"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidStateError(f"{path}: invalid JSON ({e})") from e
    return state_from_json(data)


def save_state(state: BipartiteState, path: Optional[Union[str, Path]] = None) -> str:
    """状態ファイルを書き出す（path が None なら JSON 文字列を返すだけ）"""
    text = json.dumps(state_to_json(state))
    if path is not None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"State written to {path}")
    return text

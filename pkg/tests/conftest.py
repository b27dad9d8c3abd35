# tests/conftest.py
"""共通フィクスチャ"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

FROZEN_FILE = Path(__file__).parent / "data" / "frozen_values.json"


def pytest_addoption(parser):
    parser.addoption(
        "--record-frozen",
        action="store_true",
        default=False,
        help="record missing seeded regression values into tests/data/frozen_values.json",
    )


class FrozenValues:
    """
    シード固定の回帰値（tests/data/frozen_values.json）
    記録済みのキーは整数なら完全一致、浮動小数なら rel=1e-12 で比較する
    """

    def __init__(self, path: Path, record: bool):
        self.path = path
        self.record = record
        self.values = json.loads(path.read_text(encoding="utf-8")) if path.exists() else {}
        self.dirty = False

    def check(self, key, value):
        if key not in self.values:
            if not self.record:
                pytest.skip(f"no frozen value for {key!r} (run pytest --record-frozen once and commit the file)")
            self.values[key] = value
            self.dirty = True
            return
        expected = self.values[key]
        if isinstance(expected, float):
            assert value == pytest.approx(expected, rel=1e-12, abs=0.0), key
        else:
            assert value == expected, key

    def save(self):
        if not self.dirty:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(self.values, indent=2, sort_keys=True) + "\n", encoding="utf-8")


@pytest.fixture(scope="session")
def frozen(request):
    store = FrozenValues(FROZEN_FILE, request.config.getoption("--record-frozen"))
    yield store
    store.save()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def random_hermitian(rng):
    def make(n):
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        return (g + g.conj().T) / 2

    return make


@pytest.fixture
def random_density(rng):
    def make(n):
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        rho = g @ g.conj().T
        return rho / np.trace(rho).real

    return make


@pytest.fixture
def random_orthogonal(rng):
    def make(n):
        q, r = np.linalg.qr(rng.normal(size=(n, n)))
        return q * np.sign(np.diag(r))

    return make

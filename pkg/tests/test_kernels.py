from array import array
import random

import pytest
from hypothesis import given, strategies as st

from couniv import _pykernels, kernels
from couniv.neighborhoods import cyclic_table

try:
    from couniv import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
codes = st.lists(st.integers(0, 25), max_size=12)


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")


@needs_ext
@given(codes, codes)
def test_reduce_and_mul_parity(a, b):
    assert _ckernels.reduce_codes(a) == _pykernels.reduce_codes(a)
    ra, rb = _pykernels.reduce_codes(a), _pykernels.reduce_codes(b)
    assert _ckernels.mul_codes(ra, rb) == _pykernels.mul_codes(ra, rb)
    assert _ckernels.index_sum_codes(ra) == _pykernels.index_sum_codes(ra)


@needs_ext
@given(st.integers(0, 6), codes)
def test_phi_parity(n, a):
    w = _pykernels.reduce_codes(a)
    assert _ckernels.phi_recursive(n, w) == _pykernels.phi_recursive(n, w)


@needs_ext
def test_set_product_parity():
    order = 12
    flat = array("i", [x for row in cyclic_table(order) for x in row])
    rng = random.Random(3)
    for _ in range(50):
        left = sorted(rng.sample(range(order), 4))
        right = sorted(rng.sample(range(order), 3))
        assert _ckernels.set_product(flat, order, left, right) == _pykernels.set_product(flat, order, left, right)


def test_set_product_values():
    flat = array("i", [x for row in cyclic_table(8) for x in row])
    assert _pykernels.set_product(flat, 8, [0, 4], [0, 2]) == [0, 2, 4, 6]


def test_pure_fallback_env(monkeypatch):
    import importlib
    monkeypatch.setenv("COUNIV_PURE", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("COUNIV_PURE")
        importlib.reload(kernels)


@needs_ext
def test_benchmark_script_runs(tmp_path, capsys):
    import json
    import runpy
    import sys
    from pathlib import Path
    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    out = tmp_path / "bench.json"
    argv = sys.argv
    sys.argv = [str(script), "--repeat", "1", "--json", str(out)]
    try:
        with pytest.raises(SystemExit) as exc:
            runpy.run_path(str(script), run_name="__main__")
    finally:
        sys.argv = argv
    assert exc.value.code == 0
    assert all(row["cython_s"] > 0 for row in json.loads(out.read_text()))

"""The compiled kernels and the numpy fallback must agree bit for bit."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from entropylab import _kernels_py as py_kernels
from entropylab.backend import get_backend

cy_kernels = pytest.importorskip(
    "entropylab._kernels_cy", reason="compiled extension not built"
)


def frozen(a, dtype=float):
    out = np.ascontiguousarray(np.asarray(a, dtype=dtype))
    out.flags.writeable = False  # pmf internals are read-only; kernels must cope
    return out


def test_get_backend_names_a_real_module():
    assert get_backend() in ("python", "cython")


def test_neg_xlogx_sum_matches_fallback_exactly():
    rng = np.random.default_rng(0)
    w = frozen(rng.dirichlet(np.ones(50_000)))
    total_c, abs_c = cy_kernels.neg_xlogx_sum(w)
    total_p, abs_p = py_kernels.neg_xlogx_sum(w)
    assert total_c == total_p
    assert abs_c == abs_p
    assert math.isfinite(total_c) and abs_c >= abs(total_c) * 0


def test_neg_xlogx_sum_ignores_exact_zeros():
    w = frozen([0.0, 0.5, 0.0, 0.5])
    total, _ = cy_kernels.neg_xlogx_sum(w)
    assert total == pytest.approx(math.log(2.0), abs=1e-15)


def test_group_sum_dense_path_agreement():
    rng = np.random.default_rng(1)
    keys = frozen(rng.integers(0, 512, size=20_000), np.int64)
    vals = frozen(rng.random(20_000))
    kc, vc = cy_kernels.group_sum(keys, vals, size=512)
    kp, vp = py_kernels.group_sum(keys, vals, size=512)
    assert np.array_equal(kc, kp)
    assert np.array_equal(vc, vp)


def test_group_sum_sort_path_agreement():
    rng = np.random.default_rng(2)
    keys = frozen(rng.integers(-(10**12), 10**12, size=5_000), np.int64)
    vals = frozen(rng.random(5_000))
    kc, vc = cy_kernels.group_sum(keys, vals)
    kp, vp = py_kernels.group_sum(keys, vals)
    assert np.array_equal(kc, kp)
    assert np.array_equal(vc, vp)
    assert np.all(np.diff(kc) > 0)


def test_pair_accumulate_dense_path_agreement():
    rng = np.random.default_rng(3)
    kp_keys = frozen(rng.choice(200, 64, replace=False), np.int64)
    kq_keys = frozen(rng.choice(200, 48, replace=False), np.int64)
    mp = frozen(rng.dirichlet(np.ones(64)))
    mq = frozen(rng.dirichlet(np.ones(48)))
    span = int(kp_keys.max() + kq_keys.max()) + 1
    kc, vc = cy_kernels.pair_accumulate(kp_keys, mp, kq_keys, mq, size=span)
    kpy, vpy = py_kernels.pair_accumulate(kp_keys, mp, kq_keys, mq, size=span)
    assert np.array_equal(kc, kpy)
    assert np.array_equal(vc, vpy)
    assert math.fsum(vc) == pytest.approx(1.0, abs=1e-12)


def test_pair_accumulate_sort_path_agreement():
    rng = np.random.default_rng(4)
    kp_keys = frozen(np.cumsum(rng.integers(1, 10**9, size=40)), np.int64)
    kq_keys = frozen(np.cumsum(rng.integers(1, 10**9, size=30)), np.int64)
    mp = frozen(rng.dirichlet(np.ones(40)))
    mq = frozen(rng.dirichlet(np.ones(30)))
    kc, vc = cy_kernels.pair_accumulate(kp_keys, mp, kq_keys, mq)
    kpy, vpy = py_kernels.pair_accumulate(kp_keys, mp, kq_keys, mq)
    assert np.array_equal(kc, kpy)
    assert np.array_equal(vc, vpy)


def test_empty_inputs():
    empty_f = frozen([])
    empty_i = frozen([], np.int64)
    assert cy_kernels.neg_xlogx_sum(empty_f) == py_kernels.neg_xlogx_sum(empty_f)
    kc, vc = cy_kernels.group_sum(empty_i, empty_f)
    assert kc.size == 0 and vc.size == 0


def test_entropies_identical_across_backends():
    # drive the public API under each backend in a fresh interpreter and
    # compare the printed values textually: repr round-trips doubles
    script = (
        "import numpy as np\n"
        "from entropylab.lattice import LatticePMF, convolve, shannon_entropy\n"
        "rng = np.random.default_rng(9)\n"
        "pts = rng.choice(400, 120, replace=False) - 200\n"
        "p = LatticePMF(pts.reshape(-1, 1), rng.dirichlet(np.ones(120)))\n"
        "q = convolve(p, p)\n"
        "print(repr(shannon_entropy(q).value))\n"
        "from entropylab.backend import BACKEND\n"
        "print(BACKEND)\n"
    )
    outs = {}
    for backend in ("python", "cython"):
        env = {**os.environ, "ENTROPYLAB_BACKEND": backend}
        proc = subprocess.run(
            [sys.executable, "-c", script], capture_output=True, text=True, env=env
        )
        assert proc.returncode == 0, proc.stderr
        value, reported = proc.stdout.split()
        assert reported == backend
        outs[backend] = value
    assert outs["python"] == outs["cython"]


def test_backend_env_python_forces_fallback():
    env = {**os.environ, "ENTROPYLAB_BACKEND": "python"}
    proc = subprocess.run(
        [sys.executable, "-c", "from entropylab.backend import get_backend; print(get_backend())"],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "python"


def test_backend_env_rejects_unknown_value():
    env = {**os.environ, "ENTROPYLAB_BACKEND": "fortran"}
    proc = subprocess.run(
        [sys.executable, "-c", "import entropylab.backend"],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode != 0
    assert "ENTROPYLAB_BACKEND" in proc.stderr

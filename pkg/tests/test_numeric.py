import numpy as np
import pytest

from fftfam.family import all_zero_wb, random_member, splitradix_conjugate
from fftfam.flowgraph import build_flowgraph
from fftfam.numeric import dft_oracle, evaluate_member, verify_member


def test_oracle_against_defining_sum():
    rng = np.random.default_rng(0)
    x = rng.random(8) + 1j * rng.random(8)
    w = np.exp(-2j * np.pi / 8)
    for k in range(8):
        want = sum(x[j] * w ** (j * k) for j in range(8))
        assert abs(dft_oracle(x)[k] - want) < 1e-9


def test_oracle_impulse_and_constant():
    e = np.zeros(16, dtype=complex)
    e[0] = 1.0
    assert np.allclose(dft_oracle(e), np.ones(16))
    c = np.ones(16, dtype=complex)
    want = np.zeros(16, dtype=complex)
    want[0] = 16.0
    assert np.allclose(dft_oracle(c), want)


@pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 64, 128, 256, 512])
def test_all_zero_member_computes_dft(n):
    fg = build_flowgraph(n)
    mem = all_zero_wb(fg)
    res = verify_member(fg, mem, trials=2, seed=1)
    assert res.ok, res


@pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 64, 128])
def test_random_members_compute_dft(n):
    fg = build_flowgraph(n)
    for seed in range(5):
        res = verify_member(fg, random_member(fg, seed=seed), trials=2, seed=seed)
        assert res.ok, (n, seed, res.max_rel_err)


@pytest.mark.parametrize("n", [4, 8, 16, 32, 64, 128, 256])
def test_splitradix_member_computes_dft(n):
    fg = build_flowgraph(n)
    res = verify_member(fg, splitradix_conjugate(fg), trials=2, seed=2)
    assert res.ok, res


def test_corrupted_twiddle_is_caught():
    fg = build_flowgraph(16)
    mem = random_member(fg, seed=9)
    victim = fg.rows[1][3]
    mem.ltfp[victim] = (mem.ltfp[victim] + 1) % 16
    res = verify_member(fg, mem, trials=1)
    assert not res.ok


def test_evaluate_rejects_bad_shape():
    fg = build_flowgraph(8)
    mem = all_zero_wb(fg)
    with pytest.raises(ValueError):
        evaluate_member(fg, mem, np.zeros(4))

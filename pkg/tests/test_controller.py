import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdmh_aec import filterbank as fb
from sdmh_aec.controller import (BandHypothesisState, ControlConfig, Selection, select_min_power,
                                 step_band, step_frame, update_copy_logic)
from sdmh_aec.errors import ConfigError, InputError
from sdmh_aec.simulator import echo, gen_rir

CFG = ControlConfig()


def _cnoise(rng, shape=None):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _band_with(main_taps, shadow_taps):
    st_ = BandHypothesisState.create(n_taps=len(main_taps))
    st_.main.taps[:] = main_taps
    st_.shadow.taps[:] = shadow_taps
    return st_


def test_converged_pair_ties_to_main():
    # dyadic taps and integer inputs keep the arithmetic exact
    rng = np.random.default_rng(0)
    h = np.array([1.0, 2.0 - 1j, -0.5, 0.25j])
    st_ = _band_with(h, h)
    line = np.zeros(4, complex)
    for _ in range(10):
        x = complex(*rng.integers(-8, 9, 2))
        line = np.concatenate([[x], line[:-1]])
        out = step_band(st_, x, np.dot(line, h))
        assert out.e_m == 0 and out.e_s == 0
        assert out.selected is Selection.MAIN
        assert not out.copied_into_main and not out.copied_into_shadow


def test_main_copied_into_shadow_after_five_frames():
    # main matches the path, the shadow sits at zero (its step is then zero)
    rng = np.random.default_rng(1)
    h = _cnoise(rng, 4)
    st_ = _band_with(h, np.zeros(4))
    line = np.zeros(4, complex)
    fired = []
    for _ in range(5):
        x = _cnoise(rng)
        line = np.concatenate([[x], line[:-1]])
        out = step_band(st_, x, np.dot(line, h))
        fired.append(out.copied_into_shadow)
        assert not out.copied_into_main
    assert fired == [False, False, False, False, True]
    np.testing.assert_allclose(st_.shadow.taps, st_.main.taps, atol=1e-12)
    assert st_.main_better_count == 0 and st_.shadow_better_count == 0


def test_four_frame_run_never_copies_into_shadow():
    rng = np.random.default_rng(2)
    h = _cnoise(rng, 4)
    st_ = _band_with(h, np.zeros(4))
    line = np.zeros(4, complex)
    for n in range(5):
        x = _cnoise(rng)
        line = np.concatenate([[x], line[:-1]])
        # frame 5: silent mic, so the zero shadow wins and the run breaks
        d = np.dot(line, h) if n < 4 else 0.0
        out = step_band(st_, x, d)
        assert not out.copied_into_shadow


def test_shadow_copied_into_main_after_two_frames():
    rng = np.random.default_rng(3)
    h = _cnoise(rng, 4)
    st_ = _band_with(np.zeros(4), h)
    line = np.zeros(4, complex)
    fired = []
    for _ in range(2):
        x = _cnoise(rng)
        line = np.concatenate([[x], line[:-1]])
        fired.append(step_band(st_, x, np.dot(line, h)).copied_into_main)
    assert fired == [False, True]
    np.testing.assert_allclose(st_.main.taps, h, atol=1e-12)


def test_non_finite_input_leaves_state_alone():
    st_ = BandHypothesisState.create(n_taps=3)
    before = st_.copy()
    with pytest.raises(InputError):
        step_band(st_, np.nan, 1.0)
    np.testing.assert_array_equal(st_.main.delay_line, before.main.delay_line)


def test_copy_logic_examples():
    im, is_, sb, mb = update_copy_logic(2.0, 2.0, 1, 3, CFG)
    assert (bool(im), bool(is_), int(sb), int(mb)) == (False, False, 0, 0)

    sb, mb, calls = 0, 0, []
    for _ in range(5):
        im, is_, sb, mb = update_copy_logic(1.0, 100.0, sb, mb, CFG)
        calls.append(bool(is_))
    assert calls == [False] * 4 + [True]

    sb = mb = 0
    for n in range(40):
        ratio = 10 ** 1.5 if n % 2 == 0 else 1.0
        im, is_, sb, mb = update_copy_logic(1.0, ratio, sb, mb, CFG)
        assert not im and not is_
    with pytest.raises(InputError):
        update_copy_logic(-1.0, 1.0, 0, 0, CFG)


def test_zero_powers_use_floor():
    # both zero: equal after flooring, nothing counts
    assert tuple(int(v) for v in update_copy_logic(0.0, 0.0, 0, 0, CFG)[2:]) == (0, 0)
    # one zero: the other is infinitely worse
    assert int(update_copy_logic(1e-20, 0.0, 0, 0, CFG)[2]) == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1e6), st.floats(0, 1e6)), min_size=1, max_size=60))
def test_copies_follow_exact_runs(powers):
    sb = mb = 0
    run_s = run_m = 0
    for p_m, p_s in powers:
        im, is_, sb, mb = update_copy_logic(p_m, p_s, sb, mb, CFG)
        pm, ps = max(p_m, 1e-30), max(p_s, 1e-30)
        run_s = run_s + 1 if pm >= 10 * ps else 0
        run_m = run_m + 1 if ps >= 10 * pm else 0
        assert not (im and is_)
        assert bool(im) == (run_s == 2)
        assert bool(is_) == (run_m == 5)
        if im or is_:
            run_s = run_m = 0
        assert 0 <= sb < CFG.shadow_to_main_holdover and 0 <= mb < CFG.main_to_shadow_holdover


def test_select_examples():
    assert select_min_power(1.0, np.sqrt(2), np.sqrt(3)) is Selection.MAIN
    assert select_min_power(np.sqrt(2), 1.0, np.sqrt(3)) is Selection.SHADOW
    assert select_min_power(1.0, 1.0, 1.0) is Selection.MAIN
    assert select_min_power(2.0, 1.0, 1.0) is Selection.SHADOW
    assert select_min_power(2.0, 2.0, 1.0) is Selection.MIC


def test_all_zero_frames():
    states = BandHypothesisState.create(fb.BAND_COUNT)
    z = np.zeros(fb.BAND_COUNT, complex)
    for _ in range(3):
        out = step_frame(states, fb.SubbandFrame(z), fb.SubbandFrame(z))
        assert not np.any(out.residual)
        assert np.all(out.selected == Selection.MAIN)
        assert not np.any(out.copied_into_main) and not np.any(out.copied_into_shadow)


def test_frame_errors_name_the_band():
    states = BandHypothesisState.create(8)
    d = np.zeros(8, complex)
    d[5] = np.inf
    with pytest.raises(InputError, match="band 5"):
        step_frame(states, np.zeros(8, complex), d)
    with pytest.raises(InputError):
        step_frame(states, np.zeros(7, complex), np.zeros(8, complex))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_frame_invariants_and_band_equivalence(seed):
    rng = np.random.default_rng(seed)
    n_bands, n_taps = 6, 5
    h = _cnoise(rng, (n_bands, n_taps))
    whole = BandHypothesisState.create(n_bands, n_taps)
    singles = [BandHypothesisState.create(None, n_taps) for _ in range(n_bands)]
    line = np.zeros((n_bands, n_taps), complex)
    for _ in range(30):
        x = _cnoise(rng, n_bands)
        line = np.concatenate([x[:, None], line[:, :-1]], axis=1)
        d = np.sum(line * h, axis=1) + 0.3 * _cnoise(rng, n_bands) * rng.uniform(0, 1)
        out = step_frame(whole, x, d)
        powers = np.stack([np.abs(out.e_m) ** 2, np.abs(out.e_s) ** 2, np.abs(d) ** 2])
        chosen = np.abs(out.residual) ** 2
        np.testing.assert_array_equal(chosen, powers[out.selected, np.arange(n_bands)])
        assert np.all(chosen <= powers.min(axis=0))
        assert np.all(chosen <= np.abs(d) ** 2)
        assert not np.any(out.copied_into_main & out.copied_into_shadow)
        for k in range(n_bands):
            b = step_band(singles[k], x[k], d[k])
            assert b == out[k]


def _static_path_erle(cfg=CFG, seconds=10.0):
    rng = np.random.default_rng(7)
    n = int(seconds * fb.SAMPLE_RATE) // fb.HOP * fb.HOP
    x = rng.standard_normal(n)
    d = echo(x, gen_rir(3).h)
    X, _ = fb.analyze_signal(x)
    D, _ = fb.analyze_signal(d)
    D = np.concatenate([np.zeros((2, fb.BAND_COUNT), complex), D[:-2]])
    states = BandHypothesisState.create(fb.BAND_COUNT)
    R = np.array([step_frame(states, X[i], D[i], cfg).residual for i in range(len(X))])
    tail = slice(-94, None)
    return 10 * np.log10(np.sum(np.abs(D[tail, :100]) ** 2) / np.sum(np.abs(R[tail, :100]) ** 2))


def test_static_path_erle():
    assert _static_path_erle() >= 20.0


def test_deterministic_outcomes():
    rng = np.random.default_rng(8)
    X = _cnoise(rng, (40, 16))
    D = _cnoise(rng, (40, 16))
    runs = []
    for _ in range(2):
        states = BandHypothesisState.create(16)
        runs.append(np.array([step_frame(states, X[i], D[i]).residual for i in range(40)]))
    np.testing.assert_array_equal(runs[0], runs[1])


def test_config_validation():
    with pytest.raises(ConfigError):
        ControlConfig(copy_threshold_db=0)
    with pytest.raises(ConfigError):
        ControlConfig(shadow_to_main_holdover=0)
    with pytest.raises(ConfigError):
        ControlConfig(mu_main=0.7)

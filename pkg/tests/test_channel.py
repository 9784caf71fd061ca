import numpy as np
import pytest

from fr3sim.channel import (DEFAULT_RICIAN_K_DB, SHADOWING_STD_DB,
                            classify_model, los_probability,
                            o2i_material_loss_db, o2i_penetration, pathloss,
                            sample_fading, sample_shadowing)


def test_classify_height_threshold():
    assert classify_model(25.0) == "UMa"
    assert classify_model(15.0) == "UMi"  # strict inequality at the boundary
    assert classify_model(10.0) == "UMi"
    assert classify_model(15.01) == "UMa"


def test_los_probability_limits():
    assert los_probability("UMi", 0.0) == 1.0
    assert los_probability("UMi", 18.0) == 1.0
    assert los_probability("UMa", 18.0) == 1.0  # UMa expression equals 1 up to 18 m
    assert los_probability("UMa", 18.0001) < 1.0
    assert los_probability("UMi", 5000.0) < 0.01


@pytest.mark.parametrize("model", ["UMa", "UMi"])
def test_los_probability_monotone_nonincreasing(model):
    d = np.linspace(0.0, 5000.0, 20001)
    p = los_probability(model, d)
    assert np.all(np.diff(p) <= 1e-12)
    assert np.all((p >= 0) & (p <= 1))


def test_pathloss_frequency_gap_pre_breakpoint():
    # UMa LoS: PL(10 GHz) - PL(3.5 GHz) = 20 log10(10/3.5) before either
    # breakpoint (h_bs 25 m -> breakpoints at 560 m and 1601 m)
    expect = 20.0 * np.log10(10.0 / 3.5)
    for d in (50.0, 120.0, 300.0, 500.0):
        d3d = np.hypot(d, 25.0 - 1.5)
        gap = (pathloss("UMa", True, 10.0, d, d3d, 25.0)
               - pathloss("UMa", True, 3.5, d, d3d, 25.0))
        assert gap == pytest.approx(expect, abs=0.01)


def test_pathloss_distance_doubling_pre_breakpoint():
    pl1 = pathloss("UMa", True, 3.5, 100.0, 100.0, 25.0)
    pl2 = pathloss("UMa", True, 3.5, 200.0, 200.0, 25.0)
    assert pl2 - pl1 == pytest.approx(22.0 * np.log10(2.0), abs=1e-9)


@pytest.mark.parametrize("model", ["UMa", "UMi"])
def test_nlos_at_least_los(model):
    rng = np.random.default_rng(5)
    d2d = rng.uniform(10.0, 3000.0, 500)
    d3d = np.hypot(d2d, 23.5)
    pl_los = pathloss(model, True, 6.0, d2d, d3d, 25.0)
    pl_nlos = pathloss(model, False, 6.0, d2d, d3d, 25.0)
    assert np.all(pl_nlos >= pl_los - 1e-12)


def test_pathloss_monotone_in_distance():
    d = np.linspace(10.0, 4000.0, 4000)
    d3d = np.hypot(d, 23.5)
    for model in ("UMa", "UMi"):
        for los in (True, False):
            pl = pathloss(model, los, 10.0, d, d3d, 25.0)
            assert np.all(np.diff(pl) > -1e-12)


def test_pathloss_clamps_below_model_minimum():
    near = pathloss("UMi", True, 10.0, 3.0, 3.0, 10.0)
    at10 = pathloss("UMi", True, 10.0, 10.0, 10.0, 10.0)
    assert near == pytest.approx(at10)


def test_pathloss_frequency_validity():
    with pytest.raises(ValueError):
        pathloss("UMa", True, 0.2, 100.0, 100.0, 25.0)


def test_shadowing_statistics():
    rng = np.random.default_rng(11)
    x = sample_shadowing("UMa", False, rng, size=100_000)
    assert x.mean() == pytest.approx(0.0, abs=0.1)
    assert x.std() == pytest.approx(SHADOWING_STD_DB[("UMa", False)], abs=0.1)
    x = sample_shadowing("UMa", True, rng, size=100_000)
    assert x.std() == pytest.approx(4.0, abs=0.1)


def test_shadowing_reproducible():
    a = sample_shadowing("UMi", False, np.random.default_rng(3), size=10)
    b = sample_shadowing("UMi", False, np.random.default_rng(3), size=10)
    assert np.array_equal(a, b)


def test_o2i_outdoor_zero_and_nonnegative():
    rng = np.random.default_rng(2)
    assert o2i_penetration(10.0, rng, indoor=False) == 0.0
    losses = [o2i_penetration(10.0, rng, indoor=True) for _ in range(2000)]
    assert min(losses) >= 0.0


def test_o2i_increases_with_frequency_in_expectation():
    rng_hi = np.random.default_rng(4)
    rng_lo = np.random.default_rng(4)
    hi = np.mean([o2i_penetration(10.0, rng_hi, True) for _ in range(20000)])
    lo = np.mean([o2i_penetration(2.7, rng_lo, True) for _ in range(20000)])
    assert hi > lo
    assert o2i_material_loss_db(10.0) > o2i_material_loss_db(2.7)


def test_fading_pure_los_limit():
    rng = np.random.default_rng(9)
    h = sample_fading(64, 300.0, rng)  # K -> infinity
    assert np.max(np.abs(np.abs(h) - 1.0)) < 1e-6


@pytest.mark.parametrize("k_db", [None, 9.0])
def test_fading_unit_mean_power(k_db):
    rng = np.random.default_rng(13)
    h = sample_fading(100_000, k_db, rng, n_pol=1)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)


def test_fading_requires_prbs():
    with pytest.raises(ValueError):
        sample_fading(0, None, np.random.default_rng(0))


def test_default_k_factors():
    assert DEFAULT_RICIAN_K_DB["UMa"] == 9.0
    assert DEFAULT_RICIAN_K_DB["UMi"] == 9.0

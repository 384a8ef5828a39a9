import numpy as np
import pytest

from ddmod import SeededRng, make_frame_config, qam_constellation, qam_demap, qam_map


def test_reference_frame_geometry():
    cfg = make_frame_config(13, 16, 30e3)
    assert cfg.bandwidth == pytest.approx(0.39e6)
    assert cfg.duration == pytest.approx(0.5333e-3, rel=1e-3)
    assert cfg.mn == 208


def test_unit_frame():
    cfg = make_frame_config(1, 1, 1.0)
    assert cfg.bandwidth == 1.0
    assert cfg.duration == 1.0
    assert cfg.mn == 1


@pytest.mark.parametrize("m,n,df", [(13, 16, 0.0), (0, 16, 30e3), (13, -1, 30e3), (13, 16, -5.0)])
def test_bad_frame_args_rejected(m, n, df):
    with pytest.raises(ValueError):
        make_frame_config(m, n, df)


def test_bandwidth_time_product_consistency():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = int(rng.integers(1, 40))
        n = int(rng.integers(1, 40))
        df = float(rng.uniform(1e2, 1e6))
        cfg = make_frame_config(m, n, df)
        # B*T == MN to within one ulp
        assert cfg.bandwidth * cfg.duration == pytest.approx(cfg.mn, rel=1e-15)


def test_qam_map_reference_point():
    sym = qam_map([0, 0], 4)
    assert sym[0] == pytest.approx((1 + 1j) / np.sqrt(2))


def test_qam4_all_points_unit_magnitude():
    bits = [0, 0, 0, 1, 1, 0, 1, 1]
    syms = qam_map(bits, 4)
    assert np.allclose(np.abs(syms), 1.0)
    assert len(set(np.round(syms, 12))) == 4


@pytest.mark.parametrize("order", [4, 16])
def test_constellation_mean_energy(order):
    const = qam_constellation(order)
    assert np.mean(np.abs(const) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_qam_bit_length_mismatch():
    with pytest.raises(ValueError):
        qam_map([0, 1, 0], 4)


def test_qam_unsupported_order():
    with pytest.raises(ValueError):
        qam_map([0, 1, 0], 8)
    with pytest.raises(ValueError):
        qam_demap(np.array([1.0 + 0j]), 32)


@pytest.mark.parametrize("order", [4, 16])
def test_qam_round_trip(order):
    rng = np.random.default_rng(7)
    k = int(np.log2(order))
    bits = rng.integers(0, 2, size=60 * k)
    assert np.array_equal(qam_demap(qam_map(bits, order), order), bits)


def test_qam_demap_nearest_neighbor():
    noisy = 0.9 * (1 + 1j) / np.sqrt(2)
    assert np.array_equal(qam_demap([noisy], 4), [0, 0])


def test_qam_demap_tie_breaks_to_lowest_index():
    # the origin is equidistant from all four points; index 0 -> bits (0, 0)
    assert np.array_equal(qam_demap([0.0 + 0.0j], 4), [0, 0])


def test_rng_determinism():
    a = SeededRng(1234, 5).generator().standard_normal(32)
    b = SeededRng(1234, 5).generator().standard_normal(32)
    assert np.array_equal(a, b)


def test_rng_streams_differ():
    a = SeededRng(1234, 0).generator().standard_normal(32)
    b = SeededRng(1234, 1).generator().standard_normal(32)
    assert not np.allclose(a, b)

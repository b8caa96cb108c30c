import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from deepce import channel as ch
from deepce.ofdm import (
    QPSK,
    GridConfig,
    dump_grid_csv,
    grid_to_tensor,
    make_transmit_grid,
    tensor_to_grid,
    transmit,
)


def test_grid_config_validation():
    with pytest.raises(ValueError):
        GridConfig(n_f=0)
    with pytest.raises(ValueError):
        GridConfig(delta_f=-1.0)


@pytest.mark.parametrize("fill", ["data", "pilot"])
def test_transmit_grid_pilots_unit_modulus_and_shape(fill):
    x = make_transmit_grid(GridConfig(), QPSK, np.random.default_rng(0), fill)
    assert x.x.shape == (64, 64, 1)
    assert np.max(np.abs(np.abs(x.pilots) - 1.0)) <= 1e-12
    assert x.pilot_index == 0


def test_transmit_grid_fill_modes():
    cfg = GridConfig(n_f=16, n=8, n_t=2)
    data = make_transmit_grid(cfg, QPSK, np.random.default_rng(1), "data")
    pilot = make_transmit_grid(cfg, QPSK, None, "pilot")
    assert np.all(pilot.x == QPSK[0])
    assert np.all(np.isin(data.x, QPSK))
    assert len(np.unique(data.x[:, 1:])) == 4


def test_transmit_grid_is_deterministic():
    a = make_transmit_grid(GridConfig(), QPSK, np.random.default_rng(4))
    b = make_transmit_grid(GridConfig(), QPSK, np.random.default_rng(4))
    np.testing.assert_array_equal(a.x, b.x)


def test_transmit_grid_rejects_bad_constellation():
    with pytest.raises(ValueError, match="empty"):
        make_transmit_grid(GridConfig(), np.array([]), np.random.default_rng(0))
    with pytest.raises(ValueError, match="unit modulus"):
        make_transmit_grid(GridConfig(), np.array([2.0, -2.0]), np.random.default_rng(0))


def _setup(n_f=16, n=8, n_r=2, seed=0):
    cfg = GridConfig(n_f=n_f, n=n, n_r=n_r)
    rng = np.random.default_rng(seed)
    h = ch.sample_epa_channel(ch.EPA, n_f, cfg.delta_f, n_r, 1, rng)
    x = make_transmit_grid(cfg, QPSK, rng)
    return cfg, h, x


def test_noiseless_transmit_is_hadamard_product():
    _, h, x = _setup()
    y = transmit(h, x, np.inf)
    np.testing.assert_array_equal(y, h.h[:, None, :, 0] * x.x[:, :, 0, None])


def test_noise_power_matches_snr():
    n_f, n = 512, 256
    h = ch.ChannelRealization(np.zeros((n_f, 1, 1)))
    x = make_transmit_grid(GridConfig(n_f=n_f, n=n), QPSK, np.random.default_rng(0))
    for snr in (0.0, 7.0):
        y = transmit(h, x, snr, np.random.default_rng(1))
        sigma2 = 10 ** (-snr / 10)
        assert abs(np.mean(np.abs(y) ** 2) / sigma2 - 1) < 0.03
        assert abs(np.var(y.real) / (sigma2 / 2) - 1) < 0.03


def test_measured_snr_at_zero_db():
    n_f, n = 512, 256
    rng = np.random.default_rng(2)
    h = ch.sample_iid_channel(n_f, 1, 1, rng)
    x = make_transmit_grid(GridConfig(n_f=n_f, n=n), QPSK, rng)
    clean = transmit(h, x, np.inf)
    noise = transmit(h, x, 0.0, np.random.default_rng(3)) - clean
    ratio = np.mean(np.abs(clean) ** 2) / np.mean(np.abs(noise) ** 2)
    assert abs(ratio - 1.0) < 0.05


def test_transmit_is_linear_in_x_at_fixed_noise():
    cfg, h, x = _setup()
    a = 0.7 - 1.3j
    noise = transmit(h, x, 5.0, np.random.default_rng(8)) - transmit(h, x, np.inf)
    scaled = type(x)(a * x.x)
    lhs = transmit(h, scaled, 5.0, np.random.default_rng(8)) - noise
    rhs = a * transmit(h, x, np.inf)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_transmit_shape_mismatch():
    _, h, _ = _setup(n_f=16)
    x = make_transmit_grid(GridConfig(n_f=8, n=8), QPSK, np.random.default_rng(0))
    with pytest.raises(ValueError, match="incompatible"):
        transmit(h, x, 10.0, np.random.default_rng(0))


def test_grid_to_tensor_layout():
    y = np.zeros((4, 3, 1), dtype=complex)
    y[2, 1, 0] = 3 - 4j
    t = grid_to_tensor(y)
    assert t.shape == (4, 3, 2)
    assert t[2, 1, 0] == 3 and t[2, 1, 1] == -4
    assert grid_to_tensor(np.zeros((64, 64, 16), dtype=complex)).shape == (64, 64, 32)


def test_tensor_to_grid_cases():
    np.testing.assert_array_equal(tensor_to_grid(np.zeros((2, 2, 4))), np.zeros((2, 2, 2)))
    t = np.zeros((1, 1, 2))
    t[0, 0] = (1, 2)
    assert tensor_to_grid(t)[0, 0, 0] == 1 + 2j
    with pytest.raises(ValueError, match="even"):
        tensor_to_grid(np.zeros((2, 2, 3)))


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5), st.integers(1, 3), st.just(2)),
              elements=finite))
def test_grid_tensor_roundtrip(parts):
    y = parts[..., 0] + 1j * parts[..., 1]
    back = tensor_to_grid(grid_to_tensor(y))
    np.testing.assert_array_equal(back, y)


def test_dump_grid_csv(tmp_path):
    y = np.array([[[1 + 2j]], [[complex(0.0, -0.5)]]])
    path = tmp_path / "g.csv"
    dump_grid_csv(y, path)
    lines = path.read_text().splitlines()
    assert lines == ["k,n,antenna,re,im", "0,0,0,1.0,2.0", "1,0,0,0.0,-0.5"]

import math

import numpy as np
import pytest

import dibmap


def test_kl_matches_quadrature():
    assert dibmap.kl_gaussian(0.0, 1.0, 0.0, 1.0) == 0.0
    assert abs(dibmap.kl_gaussian(1.0, 1.0, 0.0, 1.0) - 0.5) < 1e-12
    for mu0, s0, mu1, s1 in [(0.3, 0.7, -0.4, 1.2), (-1.5, 2.0, 0.0, 0.5)]:
        closed = dibmap.kl_gaussian(mu0, s0, mu1, s1)
        quad = dibmap.kl_numeric(mu0, s0, mu1, s1)
        assert abs(closed - quad) < 1e-6


def test_kl_rejects_bad_sigma():
    with pytest.raises(ArithmeticError):
        dibmap.kl_gaussian(0.0, -1.0, 0.0, 1.0)


def test_softplus_roundtrip():
    for rho in [-5.0, -1.0, 0.0, 2.0]:
        sigma = dibmap.sigma_from_rho(rho)
        assert sigma > 0.0
        assert abs(dibmap.rho_from_sigma(sigma) - rho) < 1e-9


def test_rng_is_positional_and_splittable():
    a = dibmap.RngStream(42)
    b = dibmap.RngStream(42)
    a.uniform()  # consuming draws must not move the split point
    assert a.split("eps").normal() == b.split("eps").normal()
    assert a.split(0).next_u64() != a.split(1).next_u64()
    assert dibmap.RngStream(42).next_u64() != dibmap.RngStream(43).next_u64()


def test_mapper_predict_shapes_and_determinism():
    net = dibmap.MapperNet.init(seed=7, hidden=16)
    coords = np.array([[0.0, 0.0], [0.25, -0.5], [-0.9, 0.9]])
    mean, std = net.predict(coords, passes=8, seed=3)
    assert mean.shape == (3,) and std.shape == (3,)
    assert np.all((mean > 0.0) & (mean < 1.0))
    assert np.all(std >= 0.0)
    mean2, std2 = net.predict(coords, passes=8, seed=3)
    assert np.array_equal(mean, mean2) and np.array_equal(std, std2)
    sample = net.sample(coords, seed=11)
    assert sample.shape == (3,)


def test_flatten_restore_roundtrip():
    net = dibmap.MapperNet.init(seed=1, hidden=16)
    mu, rho = net.flatten()
    assert mu.shape == (net.mu_size,) and rho.shape == (net.rho_size,)
    clone = dibmap.MapperNet.skeleton(16)
    clone.restore(mu, rho)
    coords = np.array([[0.1, 0.2], [-0.3, 0.4]])
    assert np.array_equal(net.predict(coords, 4, 9)[0], clone.predict(coords, 4, 9)[0])


def test_checkpoint_roundtrip(tmp_path):
    net = dibmap.MapperNet.init(seed=5, hidden=16)
    path = tmp_path / "net.ckpt"
    net.save(path)
    loaded = dibmap.MapperNet.load(path)
    assert loaded.fingerprint == net.fingerprint
    a = net.flatten()
    b = loaded.flatten()
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_wire_roundtrip():
    net = dibmap.MapperNet.init(seed=2, hidden=16)
    mu, rho = net.flatten()
    codec = dibmap.WireCodec(net.fingerprint, net.mu_size, net.rho_size)
    frame = codec.encode_state(3, 4, mu, rho)
    msg = codec.decode(frame)
    assert msg.kind == "state" and msg.sender == 3 and msg.round == 4
    assert np.array_equal(msg.mu, mu) and np.array_equal(msg.rho, rho)

    rc = codec.encode_round_complete(1, 2)
    assert len(rc) == 25
    rc_msg = codec.decode(rc)
    assert rc_msg.kind == "round_complete" and rc_msg.mu is None

    with pytest.raises(ValueError):
        codec.decode(b"XXXX" + bytes(21))


def test_floorplan_grid():
    walls = dibmap.generate_floorplan(8.0, 6.0, 0.1, seed=4)
    assert walls.shape == (60, 80)
    assert walls.dtype == np.uint8
    assert walls[0].all() and walls[-1].all()  # enclosing border
    assert not walls.all()  # some free space
    again = dibmap.generate_floorplan(8.0, 6.0, 0.1, seed=4)
    assert np.array_equal(walls, again)


def test_kde_density_normalization():
    pts = np.array([[0.0, 0.0], [0.3, -0.2]])  # interior, so no boundary leakage
    raw, normalized = dibmap.kde_density(pts, grid=101, bandwidth=0.1)
    cell = (2.0 / 101) ** 2
    assert abs(raw.sum() * cell - 1.0) < 5e-3
    assert math.isclose(normalized.max(), 1.0)


def test_run_config_single(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(
        "scenario = single\nseed = 3\nhidden = 16\niters = 30\nbatch = 64\n"
        "floor_width_m = 10\nfloor_height_m = 8\nscan_stride = 2.0\n"
        "sensor_beams = 40\neval_grid = 24\neval_passes = 4\n"
    )
    out = dibmap.run_config(cfg, out_dir=tmp_path / "out")
    assert math.isfinite(out["final_val"]) and out["final_val"] > 0.0
    assert (tmp_path / "out" / "state.bin").exists()

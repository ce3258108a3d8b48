import numpy as np
import pytest

from microast import (
    ConvParams,
    ModSignals,
    ShapeError,
    adain,
    conv2d,
    conv2d_oracle,
    feat_mod,
    filter_mod_direct,
    filter_mod_pseudo,
    flatten_signals,
    instance_stats,
    modulated_resblock,
    relu,
)

# frozen hand evaluation of the renormalization formula for
# f_c = [1, 2, 3, 4], f_s = [0, 0, 0, 2]:
#   mu_c = 2.5, sd_c = sqrt(1.25 + 1e-5)
#   mu_s = 0.5, sd_s = sqrt(0.75 + 1e-5)
ADAIN_EXPECTED = np.array(
    [-0.6618981022199839, 0.11270063259333868, 0.8872993674066614, 1.661898102219984],
    dtype=np.float64,
)


def rand_mod_case(rng, c=4, hw=6, k=3):
    f = rng.standard_normal((1, c, hw, hw)).astype(np.float32)
    p = ConvParams(
        rng.standard_normal((c, c, k, k)).astype(np.float32),
        rng.standard_normal(c).astype(np.float32),
        padding="zero",
        pad=k // 2,
    )
    w_s = rng.standard_normal(c).astype(np.float32)
    b_s = rng.standard_normal(c).astype(np.float32)
    return f, p, w_s, b_s


# ------------------------------------------------------------------ adain

def test_adain_self_is_identity():
    rng = np.random.default_rng(1)
    for seed in range(20):
        x = np.random.default_rng(seed).standard_normal((1, 4, 6, 6)).astype(np.float32)
        np.testing.assert_allclose(adain(x, x), x, rtol=0, atol=1e-4)


def test_adain_constant_content_collapses_to_style_mean():
    rng = np.random.default_rng(2)
    f_c = np.broadcast_to(
        rng.standard_normal((1, 3, 1, 1)).astype(np.float32), (1, 3, 8, 8)
    ).copy()
    f_s = rng.standard_normal((1, 3, 5, 5)).astype(np.float32)
    out = adain(f_c, f_s)
    mu_s = instance_stats(f_s).mean
    np.testing.assert_allclose(
        out, np.broadcast_to(mu_s[:, :, None, None], out.shape), rtol=0, atol=1e-3
    )


def test_adain_hand_case():
    f_c = np.array([1, 2, 3, 4], np.float32).reshape(1, 1, 2, 2)
    f_s = np.array([0, 0, 0, 2], np.float32).reshape(1, 1, 2, 2)
    out = adain(f_c, f_s)
    np.testing.assert_allclose(out.ravel(), ADAIN_EXPECTED, rtol=0, atol=1e-5)


def test_adain_is_feat_mod_of_style_stats_bitwise():
    rng = np.random.default_rng(3)
    f_c = rng.standard_normal((2, 5, 7, 7)).astype(np.float32)
    f_s = rng.standard_normal((2, 5, 4, 9)).astype(np.float32)
    stats = instance_stats(f_s)
    assert np.array_equal(adain(f_c, f_s), feat_mod(f_c, stats.mean, stats.std))


def test_adain_channel_mismatch():
    x = np.zeros((1, 3, 4, 4), np.float32)
    y = np.zeros((1, 2, 4, 4), np.float32)
    with pytest.raises(ShapeError):
        adain(x, y)


# --------------------------------------------------------------- feat_mod

def test_feat_mod_own_stats_is_identity():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((1, 4, 8, 8)).astype(np.float32)
    stats = instance_stats(x)
    np.testing.assert_allclose(feat_mod(x, stats.mean, stats.std), x, rtol=0, atol=1e-4)


def test_feat_mod_tiny_sigma_collapses_to_mu():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((1, 3, 8, 8)).astype(np.float32)
    mu = np.array([1.0, -2.0, 0.5], np.float32)
    sigma = np.full(3, np.sqrt(1e-5), np.float32)
    out = feat_mod(x, mu, sigma)
    np.testing.assert_allclose(out, np.broadcast_to(mu[None, :, None, None], out.shape),
                               rtol=0, atol=1e-2)


def test_feat_mod_hits_target_stats():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((2, 4, 8, 8)).astype(np.float32)
    mu = rng.standard_normal(4).astype(np.float32)
    sigma = (rng.random(4).astype(np.float32) + 0.5)
    out = feat_mod(x, mu, sigma)
    stats = instance_stats(out)
    np.testing.assert_allclose(stats.mean, np.broadcast_to(mu, (2, 4)), rtol=1e-4, atol=1e-4)
    np.testing.assert_allclose(stats.std, np.broadcast_to(sigma, (2, 4)), rtol=1e-4, atol=0)


def test_feat_mod_idempotent_in_effect():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((1, 4, 6, 6)).astype(np.float32)
    mu = rng.standard_normal(4).astype(np.float32)
    sigma = rng.random(4).astype(np.float32) + 0.25
    once = feat_mod(x, mu, sigma)
    twice = feat_mod(once, mu, sigma)
    np.testing.assert_allclose(twice, once, rtol=0, atol=1e-4)


def test_feat_mod_rejects_bad_args():
    x = np.zeros((1, 4, 4, 4), np.float32)
    with pytest.raises(ShapeError):
        feat_mod(x, np.zeros(3, np.float32), np.ones(3, np.float32))
    with pytest.raises(ShapeError):
        feat_mod(x, np.zeros(4, np.float32), np.zeros(4, np.float32))


# ------------------------------------------------------------- filter mod

def test_filter_mod_neutral_is_plain_conv_bitwise():
    rng = np.random.default_rng(8)
    f, p, _, _ = rand_mod_case(rng)
    ones = np.ones(4, np.float32)
    zeros = np.zeros(4, np.float32)
    base = conv2d(f, p)
    assert np.array_equal(filter_mod_pseudo(f, p, ones, zeros), base)
    assert np.array_equal(filter_mod_direct(f, p, ones, zeros), base)


def test_filter_mod_pure_pointwise_identity():
    rng = np.random.default_rng(9)
    f, p, _, _ = rand_mod_case(rng)
    p0 = ConvParams(p.weight, np.zeros(4, np.float32), padding=p.padding, pad=p.pad)
    zeros = np.zeros(4, np.float32)
    ones = np.ones(4, np.float32)
    np.testing.assert_allclose(filter_mod_direct(f, p0, zeros, ones), f, rtol=0, atol=1e-6)
    np.testing.assert_allclose(filter_mod_pseudo(f, p0, zeros, ones), f, rtol=0, atol=1e-6)


def test_filter_mod_w_scaling_linearity():
    rng = np.random.default_rng(10)
    f, p, w_s, b_s = rand_mod_case(rng)
    zeros = np.zeros(4, np.float32)
    first = filter_mod_pseudo(f, p, w_s, zeros)
    doubled = filter_mod_pseudo(f, p, 2 * w_s, zeros)
    np.testing.assert_allclose(doubled, 2 * first, rtol=0, atol=1e-5)
    # and b_s = 0 means the output is exactly w * conv
    np.testing.assert_array_equal(first, w_s[None, :, None, None] * conv2d(f, p))


@pytest.mark.parametrize("seed", range(100))
def test_filter_mod_direct_pseudo_equivalence(seed):
    rng = np.random.default_rng(20_000 + seed)
    c = int(rng.integers(1, 9))
    hw = int(rng.integers(3, 9))
    k = int(rng.choice([1, 3]))
    f, p, w_s, b_s = rand_mod_case(rng, c=c, hw=hw, k=k)
    a = filter_mod_direct(f, p, w_s, b_s)
    b = filter_mod_pseudo(f, p, w_s, b_s)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-4)


def test_filter_mod_rejects_channel_changing_conv():
    rng = np.random.default_rng(11)
    f = rng.standard_normal((1, 4, 6, 6)).astype(np.float32)
    p = ConvParams(rng.standard_normal((5, 4, 3, 3)).astype(np.float32),
                   np.zeros(5, np.float32), pad=1)
    with pytest.raises(ShapeError):
        filter_mod_pseudo(f, p, np.ones(4, np.float32), np.zeros(4, np.float32))


# ------------------------------------------------------ modulated resblock

def test_resblock_zero_weights_neutral_sig_is_identity():
    rng = np.random.default_rng(12)
    f = rng.standard_normal((1, 4, 6, 6)).astype(np.float32)
    zero = ConvParams(np.zeros((4, 4, 3, 3), np.float32), np.zeros(4, np.float32), pad=1)
    ones = np.ones(4, np.float32)
    zeros = np.zeros(4, np.float32)
    out = modulated_resblock(f, zero, zero, (ones, zeros), (ones, zeros))
    assert np.array_equal(out, f)


def test_resblock_neutral_sig_equals_plain_resblock():
    rng = np.random.default_rng(13)
    f, p1, _, _ = rand_mod_case(rng)
    p2 = ConvParams(rng.standard_normal((4, 4, 3, 3)).astype(np.float32),
                    rng.standard_normal(4).astype(np.float32), padding="zero", pad=1)
    ones = np.ones(4, np.float32)
    zeros = np.zeros(4, np.float32)
    out = modulated_resblock(f, p1, p2, (ones, zeros), (ones, zeros))
    plain = conv2d(relu(conv2d(f, p1)), p2) + f
    assert np.array_equal(out, plain)


def test_resblock_matches_direct_form_oracle():
    rng = np.random.default_rng(14)
    f, p1, w1, b1 = rand_mod_case(rng, c=3, hw=5)
    p2 = ConvParams(rng.standard_normal((3, 3, 3, 3)).astype(np.float32),
                    rng.standard_normal(3).astype(np.float32), padding="zero", pad=1)
    w2 = rng.standard_normal(3).astype(np.float32)
    b2 = rng.standard_normal(3).astype(np.float32)

    def direct_ref(x, p, w_s, b_s):
        weight = w_s[:, None, None, None] * p.weight
        idx = np.arange(3)
        weight = weight.copy()
        weight[idx, idx, 1, 1] += b_s
        mod = ConvParams(weight, w_s * p.bias, padding=p.padding, pad=p.pad)
        return conv2d_oracle(x, mod)

    ref = direct_ref(relu(direct_ref(f, p1, w1, b1)), p2, w2, b2) + f
    out = modulated_resblock(f, p1, p2, (w1, b1), (w2, b2))
    np.testing.assert_allclose(out, ref, rtol=0, atol=1e-4)


# -------------------------------------------------------- signal flatten

def test_flatten_order():
    m = ModSignals(
        mu=np.array([1, 2], np.float32),
        sigma=np.array([3, 4], np.float32),
        filter_mods=((np.array([5, 6], np.float32), np.array([7, 8], np.float32)),),
    )
    np.testing.assert_array_equal(flatten_signals(m), [1, 2, 3, 4, 5, 6, 7, 8])


def test_flatten_injective():
    base = dict(
        mu=np.array([1, 2], np.float32),
        sigma=np.array([3, 4], np.float32),
        filter_mods=((np.array([5, 6], np.float32), np.array([7, 8], np.float32)),),
    )
    a = ModSignals(**base)
    b = ModSignals(
        mu=np.array([1, 2], np.float32),
        sigma=np.array([3, 4], np.float32),
        filter_mods=((np.array([5, 6], np.float32), np.array([7, 9], np.float32)),),
    )
    assert not np.array_equal(flatten_signals(a), flatten_signals(b))


def test_flatten_round_trip():
    rng = np.random.default_rng(15)
    c = 5
    m = ModSignals(
        mu=rng.standard_normal(c).astype(np.float32),
        sigma=rng.random(c).astype(np.float32) + 0.1,
        filter_mods=tuple(
            (rng.standard_normal(c).astype(np.float32),
             rng.standard_normal(c).astype(np.float32))
            for _ in range(4)
        ),
    )
    flat = flatten_signals(m)
    assert flat.shape == (2 * c + 2 * c * 4,)
    rebuilt = ModSignals(
        mu=flat[:c],
        sigma=flat[c : 2 * c],
        filter_mods=tuple(
            (flat[2 * c + 2 * i * c : 2 * c + (2 * i + 1) * c],
             flat[2 * c + (2 * i + 1) * c : 2 * c + (2 * i + 2) * c])
            for i in range(4)
        ),
    )
    np.testing.assert_array_equal(flatten_signals(rebuilt), flat)
    np.testing.assert_array_equal(rebuilt.mu, m.mu)
    np.testing.assert_array_equal(rebuilt.sigma, m.sigma)
    for (w1, b1), (w2, b2) in zip(rebuilt.filter_mods, m.filter_mods):
        np.testing.assert_array_equal(w1, w2)
        np.testing.assert_array_equal(b1, b2)


def test_mod_signals_require_positive_sigma():
    with pytest.raises(ShapeError):
        ModSignals(
            mu=np.zeros(2, np.float32),
            sigma=np.array([1.0, 0.0], np.float32),
            filter_mods=(),
        )

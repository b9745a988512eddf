import numpy as np

from samplerlang import kernels


def test_numpy_and_jit_paths_bit_identical():
    seed = kernels.derive_seed(kernels.DEFAULT_SEED, "rand")
    a = kernels._lcg_states_numpy(seed, 12345)
    b = kernels.lcg_states(seed, 12345)
    assert np.array_equal(a, b)


def test_uniforms_in_unit_interval():
    u = kernels.lcg_uniforms(kernels.DEFAULT_SEED, 50000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.01


def test_states_extend_consistently():
    seed = 12345
    short = kernels.lcg_states(seed, 100)
    long = kernels.lcg_states(seed, 1000)
    assert np.array_equal(short, long[:100])


def test_derived_seeds_differ_per_name():
    s1 = kernels.derive_seed(kernels.DEFAULT_SEED, "rand")
    s2 = kernels.derive_seed(kernels.DEFAULT_SEED, "tri")
    s3 = kernels.derive_seed(kernels.DEFAULT_SEED + 1, "rand")
    assert len({s1, s2, s3}) == 3
    assert kernels.derive_seed(kernels.DEFAULT_SEED, "rand") == s1


def test_weighted_prefix_sums_match():
    values = np.linspace(0, 1, 1000)
    weights = np.linspace(1, 2, 1000)
    a = kernels._weighted_sums_numpy(values, weights)
    b = kernels.weighted_prefix_sums(values, weights)
    assert np.allclose(a[0], b[0]) and np.allclose(a[1], b[1])


def test_documented_constants():
    assert kernels.LCG_MULT == 6364136223846793005
    assert kernels.LCG_INC == 1442695040888963407
    assert kernels.DEFAULT_SEED == 0x9E3779B97F4A7C15

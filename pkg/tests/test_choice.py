import math

import pytest
from hypothesis import assume, given, strategies as st

from transit_assign.choice import MODELS, EmptyChoiceSet, ModelConfig, choose, compute_gains, probabilities
from transit_assign.network import INF

gain_vectors = st.lists(st.floats(0, 1000, allow_nan=False), min_size=1, max_size=8).filter(
    lambda g: any(x > 0 for x in g))
configs = st.builds(ModelConfig, st.sampled_from(MODELS), st.sampled_from([0.0, 0.01, 0.5, 1.0, 2.0]))


class TestGains:
    def test_formula(self):
        assert compute_gains([100, 110, 200], 5) == [15, 0, 0]

    def test_ties(self):
        assert compute_gains([50, 50], 5) == [5, 5]

    def test_single_option(self):
        assert compute_gains([42], 5) == [math.inf]
        assert probabilities(compute_gains([42], 5), ModelConfig()) == [1.0]

    def test_infinite_pats(self):
        assert compute_gains([INF, 10, math.inf], 5) == [0.0, math.inf, 0.0]
        with pytest.raises(EmptyChoiceSet):
            compute_gains([INF, None], 5)


class TestModels:
    def test_examples(self):
        assert probabilities([1, 2], ModelConfig("kirchhoff", 2)) == pytest.approx([0.2, 0.8])
        assert probabilities([10, 5], ModelConfig("linear")) == pytest.approx([0.75, 0.25])
        assert probabilities([3, 7, 7], ModelConfig("optimal")) == [0, 1, 0]
        assert probabilities([0, 3, 3], ModelConfig("logit", 5)) == pytest.approx([0, 0.5, 0.5])

    def test_all_zero_rejected(self):
        with pytest.raises(EmptyChoiceSet):
            probabilities([0, 0], ModelConfig())

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            ModelConfig("probit")

    def test_beta_zero_uniform(self):
        for model in ("logit", "kirchhoff"):
            assert probabilities([1, 5, 0], ModelConfig(model, 0)) == pytest.approx([0.5, 0.5, 0])

    def test_zero_tolerance_ties(self):
        assert choose([10, 10, 12], 0, ModelConfig("linear")) == pytest.approx([0.5, 0.5, 0])

    @given(gain_vectors, configs)
    def test_probability_vector(self, gains, cfg):
        p = probabilities(gains, cfg)
        assert abs(math.fsum(p) - 1) <= 1e-9
        assert all(0 <= x <= 1 for x in p)
        assert all(x == 0 for g, x in zip(gains, p) if g == 0)

    @given(gain_vectors, st.floats(0, 500), st.floats(0.01, 3))
    def test_logit_shift_invariance(self, gains, shift, beta):
        cfg = ModelConfig("logit", beta)
        shifted = [g + shift if g > 0 else 0 for g in gains]
        assert probabilities(shifted, cfg) == pytest.approx(probabilities(gains, cfg), abs=1e-9)

    @given(gain_vectors, st.floats(0.01, 100), st.floats(0.1, 3))
    def test_kirchhoff_scale_invariance(self, gains, scale, beta):
        assume(all(g == 0 or g * scale > 1e-300 for g in gains))
        cfg = ModelConfig("kirchhoff", beta)
        assert probabilities([g * scale for g in gains], cfg) == pytest.approx(probabilities(gains, cfg), abs=1e-9)

    @given(gain_vectors, st.floats(0.01, 100), st.floats(0, 100))
    def test_optimal_one_hot_and_affine_invariant(self, gains, a, b):
        assume(len(set(gains)) == len(gains))
        p = probabilities(gains, ModelConfig("optimal"))
        assert sorted(p) == [0.0] * (len(p) - 1) + [1.0]
        moved = [a * g + b if g > 0 else 0 for g in gains]
        assume(len(set(moved)) == len(moved))
        assert probabilities(moved, ModelConfig("optimal")) == p

    @given(gain_vectors, configs, st.randoms())
    def test_permutation_equivariance(self, gains, cfg, rnd):
        assume(cfg.model != "optimal" or len(set(gains)) == len(gains))
        order = list(range(len(gains)))
        rnd.shuffle(order)
        p = probabilities(gains, cfg)
        q = probabilities([gains[i] for i in order], cfg)
        assert q == pytest.approx([p[i] for i in order], abs=1e-9)

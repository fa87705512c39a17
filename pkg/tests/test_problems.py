import numpy as np
import pytest

from offo.errors import (
    DimensionMismatch,
    InvalidParameter,
    NonFiniteValue,
    UnknownProblem,
)
from offo.problems import (
    Problem,
    diag_quadratic,
    evaluate,
    fd_hessian,
    load_suite,
    registry_manifest,
    suite_names,
    with_noise,
)

#: dimensions as printed in the source collection's problem table
TABLE_DIMS = {
    "arglina": 10, "arwhead": 10, "bard": 3, "beale": 2, "booth": 2,
    "box3": 3, "brownal": 10, "broyden3d": 10, "chebyqad": 10, "cliff": 2,
    "cube": 2, "dixmaana": 12, "dqartic": 10, "freuroth": 4, "helix": 3,
    "hilbert": 10, "integreq": 10, "jensmp": 2, "kowosb": 4, "morebv": 12,
    "osborneb": 11, "penalty1": 10, "powellsg": 12, "rosenbr": 10,
    "sisser": 2, "tridia": 10, "vardim": 10, "watson": 12, "woods": 12,
}


class TestRegistry:
    def test_suite_size(self):
        assert len(load_suite()) >= 25

    def test_dimensions_match_table(self):
        for p in load_suite():
            assert p.n == TABLE_DIMS[p.name], p.name
            assert p.x0.shape == (p.n,)

    def test_every_problem_has_reference(self):
        for p in load_suite():
            assert p.f_ref is not None
            assert p.f_ref_provenance in ("literature", "reference-run")

    def test_load_by_name(self):
        (p,) = load_suite(["rosenbr"])
        assert p.name == "rosenbr" and p.n == 10

    def test_unknown_name(self):
        with pytest.raises(UnknownProblem):
            load_suite(["nosuch"])

    def test_manifest_roundtrip(self):
        import json

        manifest = registry_manifest()
        assert manifest["version"] == 1
        blob = json.loads(json.dumps(manifest))
        assert [e["name"] for e in blob["problems"]] == suite_names()
        entry = next(e for e in blob["problems"] if e["name"] == "beale")
        assert entry["n"] == 2 and entry["f_ref"] == 0.0


class TestEvaluate:
    def test_beale_values(self):
        (p,) = load_suite(["beale"])
        out = evaluate(p, np.array([1.0, 1.0]), ("value", "gradient"))
        assert out["value"] == 14.203125
        np.testing.assert_allclose(out["gradient"], [0.0, 27.75], rtol=0, atol=0)

    def test_quadratic_all_oracles(self):
        p = diag_quadratic([1.0], [3.0])
        out = evaluate(p, np.array([3.0]), ("value", "gradient", "hessian"))
        assert out["value"] == 4.5
        assert out["gradient"][0] == 3.0
        assert out["hessian"][0, 0] == 1.0

    def test_returns_exactly_requested(self):
        (p,) = load_suite(["beale"])
        out = evaluate(p, p.x0, ("gradient",))
        assert set(out) == {"gradient"}

    def test_empty_want_rejected(self):
        (p,) = load_suite(["beale"])
        with pytest.raises(InvalidParameter):
            evaluate(p, p.x0, ())

    def test_dimension_mismatch(self):
        (p,) = load_suite(["beale"])
        with pytest.raises(DimensionMismatch):
            evaluate(p, np.zeros(3), ("value",))

    def test_overflow_reported(self):
        (p,) = load_suite(["cliff"])
        with pytest.raises(NonFiniteValue):
            evaluate(p, np.array([200.0, -200.0]), ("value",))


def _fd_gradient(p, x):
    h = np.cbrt(np.finfo(float).eps) * (1.0 + np.abs(x))
    out = np.zeros(p.n)
    for j in range(p.n):
        e = np.zeros(p.n)
        e[j] = h[j]
        out[j] = (p.value(x + e) - p.value(x - e)) / (2.0 * h[j])
    return out


@pytest.mark.parametrize("name", sorted(TABLE_DIMS))
def test_oracle_consistency_at_six_points(name):
    """Central differences of f match g, and of g match H, at x0 plus 5
    perturbations (relative tolerance 1e-5)."""
    (p,) = load_suite([name])
    rng = np.random.default_rng(1234)
    points = [p.x0] + [
        p.x0 + 0.05 * (1.0 + np.abs(p.x0)) * rng.standard_normal(p.n)
        for _ in range(5)
    ]
    for x in points:
        g = p.gradient(x)
        fd = _fd_gradient(p, x)
        assert np.max(np.abs(fd - g)) <= 1e-5 * (1.0 + np.max(np.abs(g)))
    x = points[1]
    hess = p.hessian(x)
    fd_h = fd_hessian(p.g, x)
    assert np.max(np.abs(hess - fd_h)) <= 1e-5 * (1.0 + np.max(np.abs(fd_h)))
    np.testing.assert_allclose(hess, hess.T, atol=1e-10 * (1 + np.max(np.abs(hess))))


class TestNoise:
    def test_level_zero_is_identity(self):
        (p,) = load_suite(["beale"])
        noisy = with_noise(p, 0.0, 123)
        for _ in range(3):
            out = noisy.evaluate(p.x0, ("value", "gradient"))
        clean = p.evaluate(p.x0, ("value", "gradient"))
        assert out["value"] == clean["value"]
        np.testing.assert_array_equal(out["gradient"], clean["gradient"])

    def test_equal_query_sequences_are_identical(self):
        (p,) = load_suite(["woods"])
        a = with_noise(p, 0.05, 99)
        b = with_noise(p, 0.05, 99)
        rng = np.random.default_rng(0)
        for _ in range(5):
            x = p.x0 + rng.standard_normal(p.n)
            oa = a.evaluate(x, ("value", "gradient"))
            ob = b.evaluate(x, ("value", "gradient"))
            assert oa["value"] == ob["value"]
            np.testing.assert_array_equal(oa["gradient"], ob["gradient"])

    def test_order_within_query_does_not_matter(self):
        (p,) = load_suite(["woods"])
        a = with_noise(p, 0.05, 7)
        b = with_noise(p, 0.05, 7)
        ga = a.evaluate(p.x0, ("gradient",))["gradient"]
        both = b.evaluate(p.x0, ("value", "gradient"))
        np.testing.assert_array_equal(ga, both["gradient"])

    def test_multiplicative_form_matches_reference_stream(self):
        base = diag_quadratic([1.0, 1.0], [1.0, -2.0])
        level, seed = 0.05, 321
        noisy = with_noise(base, level, seed)
        x = np.array([2.0, -4.0])
        got = noisy.evaluate(x, ("gradient",))["gradient"]
        xi = noisy._draws(0, "gradient", 2)
        expect = base.gradient(x) * (1.0 + level * xi)
        np.testing.assert_array_equal(got, expect)

    def test_noise_changes_with_seed_and_query(self):
        (p,) = load_suite(["beale"])
        n1 = with_noise(p, 0.1, 1)
        n2 = with_noise(p, 0.1, 2)
        g1 = n1.evaluate(p.x0, ("gradient",))["gradient"]
        g2 = n2.evaluate(p.x0, ("gradient",))["gradient"]
        assert not np.array_equal(g1, g2)
        g1b = n1.evaluate(p.x0, ("gradient",))["gradient"]
        assert not np.array_equal(g1, g1b)

    def test_negative_level_rejected(self):
        (p,) = load_suite(["beale"])
        with pytest.raises(InvalidParameter):
            with_noise(p, -0.1, 0)

    def test_unbiased_at_desk_scale(self):
        """Mean over 1e4 seeds matches the clean gradient componentwise to
        3 * level * |g| / 100 (a three-sigma band for that many draws)."""
        base = diag_quadratic([1.0, 2.0], [1.0, 1.0])
        x = np.array([1.5, -0.5])
        g = base.gradient(x)
        level = 0.05
        total = np.zeros(2)
        n_seeds = 10**4
        for seed in range(n_seeds):
            total += with_noise(base, level, seed).evaluate(x, ("gradient",))["gradient"]
        mean = total / n_seeds
        assert np.all(np.abs(mean - g) <= 3.0 * level * np.abs(g) / 100.0)


def test_fd_hessian_is_symmetric():
    (p,) = load_suite(["bard"])
    h = fd_hessian(p.g, p.x0)
    np.testing.assert_array_equal(h, h.T)


def test_diag_quadratic_validation():
    with pytest.raises(InvalidParameter):
        diag_quadratic([1.0, -1.0], [0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        diag_quadratic([1.0], [0.0, 0.0])

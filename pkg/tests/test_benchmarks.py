import math

import numpy as np
import pytest

from benchmarks import (
    FunctionKind,
    catalog,
    evaluate,
    evaluate_many,
    grid,
    make_function,
    parse_function,
)


class TestEvaluate:
    @pytest.mark.parametrize("name", ["sphere", "ellipsoid", "griewank"])
    def test_zero_at_origin(self, name):
        assert evaluate(make_function(name), [0.0, 0.0]) == 0.0

    def test_ackley_at_origin(self):
        assert evaluate(make_function("ackley"), [0.0, 0.0]) == pytest.approx(0.0, abs=1e-12)

    def test_levy_minimum(self):
        assert evaluate(make_function("levy"), [1.0, 1.0]) == pytest.approx(0.0, abs=1e-30)

    def test_styblinski_tang_minimum(self):
        value = evaluate(make_function("styblinski_tang"), [-2.903534, -2.903534])
        assert value == pytest.approx(-78.33233, abs=1e-4)

    def test_ellipsoid_weights_first_coordinate_twice(self, rng):
        fn = make_function("ellipsoid")
        for x in rng.uniform(-5.0, 5.0, size=(20, 2)):
            assert evaluate(fn, x) == pytest.approx(2.0 * x[0] ** 2 + x[1] ** 2, rel=1e-14)

    def test_griewank_formula(self):
        x = np.array([3.0, -2.0])
        expected = (9.0 + 4.0) / 4000.0 - math.cos(3.0) * math.cos(-2.0 / math.sqrt(2.0)) + 1.0
        assert evaluate(make_function("griewank"), x) == pytest.approx(expected, rel=1e-14)

    def test_michalewicz_value(self):
        assert evaluate(make_function("michalewicz", m=10), [math.pi / 2]) == pytest.approx(-(0.5**10), rel=1e-12)

    def test_michalewicz_is_bounded(self):
        for m in (10, 50, 100):
            fn = make_function("michalewicz", m=m)
            values = evaluate_many(fn, grid(fn.domain, 200))
            assert np.all(np.abs(values) <= 1.0)
            assert np.all(np.isfinite(values))

    def test_power_two_is_parabola(self):
        x = np.linspace(-2.0, 2.0, 9)
        np.testing.assert_allclose(
            evaluate_many(make_function("power", k=2), x),
            evaluate_many(make_function("parabola"), x),
            rtol=1e-15,
        )

    def test_ackley_depends_on_parameters(self):
        x = [0.7, -1.1]
        assert evaluate(make_function("ackley", a=70), x) != evaluate(make_function("ackley", a=100), x)

    def test_out_of_domain(self):
        with pytest.raises(ValueError):
            evaluate(make_function("sphere"), [6.0, 0.0])

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            evaluate(make_function("sphere"), [1.0])

    def test_domain_edge_is_inside(self):
        assert evaluate(make_function("parabola"), [2.0]) == 4.0


class TestGrid:
    def test_one_dimensional(self):
        np.testing.assert_array_equal(grid([(0.0, 1.0)], 3), [[0.0], [0.5], [1.0]])

    def test_row_major_lattice(self):
        np.testing.assert_array_equal(grid([(0.0, 1.0), (0.0, 1.0)], 2), [[0, 0], [0, 1], [1, 0], [1, 1]])

    def test_spacing(self):
        np.testing.assert_array_equal(np.diff(grid([(-1.0, 1.0)], 5)[:, 0]), [0.5] * 4)

    def test_size(self):
        assert grid([(-5.0, 5.0)] * 2, 21).shape == (441, 2)

    @pytest.mark.parametrize("domain, points", [([(1.0, 1.0)], 3), ([(0.0, 1.0)], 1), ([(2.0, 0.0)], 4)])
    def test_rejects_degenerate(self, domain, points):
        with pytest.raises(ValueError):
            grid(domain, points)


class TestFunctionIds:
    def test_parse_with_pi_multiples(self):
        fn = parse_function("ackley:a=70,c=6pi")
        assert fn.kind == FunctionKind.ACKLEY
        assert fn.params == {"a": 70.0, "b": 0.2, "c": pytest.approx(6.0 * math.pi)}
        assert parse_function("ackley:c=pi").params["c"] == pytest.approx(math.pi)

    def test_parse_plain_name(self):
        fn = parse_function("parabola")
        assert fn.dimension == 1
        assert fn.domain == [(-2.0, 2.0)]

    @pytest.mark.parametrize("text", ["rosenbrock", "ackley:d=3", "ackley:a", "michalewicz:m=ten"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            parse_function(text)

    def test_describe(self):
        assert make_function("sphere").describe() == "sphere"
        assert parse_function("michalewicz:m=50").describe() == "michalewicz:m=50"
        assert make_function("ackley", a=70).describe() == "ackley:a=70,b=0.2,c=6.28319"

    def test_with_domain_broadcasts_single_interval(self):
        fn = make_function("griewank").with_domain([[-1.0, 2.0]])
        assert fn.domain == [(-1.0, 2.0), (-1.0, 2.0)]
        assert fn.params == make_function("griewank").params

    def test_with_domain_rejects_degenerate(self):
        with pytest.raises(ValueError):
            make_function("parabola").with_domain([[1.0, 1.0]])

    def test_catalog_covers_every_kind(self):
        functions = {fn.kind: fn for fn in catalog()}
        assert set(functions) == set(FunctionKind)
        assert functions[FunctionKind.MICHALEWICZ].dimension == 1
        assert functions[FunctionKind.LEVY].dimension == 2

    def test_evaluate_many_shape(self):
        fn = make_function("sphere")
        values = evaluate_many(fn, grid(fn.domain, 4))
        assert values.shape == (16,)

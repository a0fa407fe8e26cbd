"""Composition operators: domains, density, approximants, closedness,
boundedness."""

import math

import numpy as np
import pytest

from orlicz import (
    BoundednessStatus,
    CollapseLaw,
    ConstantWeights,
    CountableSpace,
    DomainStatus,
    FiniteSpace,
    GeometricTail,
    GeometricWeights,
    IdentityLaw,
    PairSwapLaw,
    PowerAbs,
    PowerIndexLaw,
    PowerLawWeights,
    PreconditionError,
    ShiftLaw,
    SimpleFunction,
    Transformation,
    boundedness_verdict,
    change_of_variable_check,
    closedness_demo,
    closure_identity_check,
    compose_apply,
    composite_domain_check,
    dense_weighted_subspace_check,
    density_verdict,
    domain_membership,
    luxemburg_norm,
    modular,
    operator_norm_estimate,
    radon_nikodym,
    sum_domain_check,
    truncation_approximants,
)
from orlicz.tails import IndexPowerTail
from orlicz.verdicts import Status

INF = math.inf
PHI2 = PowerAbs(2.0)


@pytest.fixture
def uniform3():
    return FiniteSpace(("1", "2", "3"), (1.0, 1.0, 1.0))


@pytest.fixture
def collapse3(uniform3):
    return Transformation.finite(uniform3, {"1": "1", "2": "1", "3": "3"})


@pytest.fixture
def geo():
    return CountableSpace(GeometricWeights(1.0, 0.5), depth=64)


@pytest.fixture
def geo_collapse(geo):
    return Transformation.from_law(geo, CollapseLaw(1))


@pytest.fixture
def const_collapse():
    sp = CountableSpace(ConstantWeights(1.0), depth=64)
    return sp, Transformation.from_law(sp, CollapseLaw(1))


class TestComposeApply:
    def test_identity(self, uniform3):
        ident = Transformation.finite(uniform3, {a: a for a in uniform3.atoms})
        f = SimpleFunction.from_dict(uniform3, {"1": 5.0, "2": 6.0, "3": 7.0})
        assert compose_apply(f, ident).values == f.values

    def test_lookup(self, uniform3, collapse3):
        f = SimpleFunction.from_dict(uniform3, {"1": 5.0, "2": 6.0, "3": 7.0})
        assert tuple(compose_apply(f, collapse3).values) == (5.0, 5.0, 7.0)

    def test_constant(self, uniform3, collapse3):
        f = SimpleFunction.constant(uniform3, 3.0)
        assert tuple(compose_apply(f, collapse3).values) == (3.0, 3.0, 3.0)

    def test_collapse_produces_constant_tail(self, geo, geo_collapse):
        f = SimpleFunction.from_dict(geo, {1: 4.5})
        comp = compose_apply(f, geo_collapse)
        assert comp.value(1) == 4.5
        assert comp.value(10**6) == 4.5

    def test_shift_pullback_geometric(self, geo):
        shift = Transformation.from_law(geo, ShiftLaw(3))
        f = SimpleFunction(geo, tuple(0.5**n for n in range(1, 65)), GeometricTail(1.0, 0.5))
        comp = compose_apply(f, shift)
        for n in (1, 10, 64, 65, 100):
            assert comp.value(n) == pytest.approx(0.5 ** (n + 3), rel=1e-12)


class TestChangeOfVariable:
    def test_identity(self, uniform3):
        ident = Transformation.finite(uniform3, {a: a for a in uniform3.atoms})
        f = SimpleFunction.from_dict(uniform3, {"1": 1.0, "2": 2.0, "3": 3.0})
        rep = change_of_variable_check(PHI2, f, ident)
        assert rep.exact
        assert rep.lhs == pytest.approx(modular(PHI2, f))

    def test_three_atom(self, uniform3, collapse3):
        f = SimpleFunction.from_dict(uniform3, {"1": 1.0, "2": 2.0, "3": 3.0})
        rep = change_of_variable_check(PHI2, f, collapse3)
        # f o phi = (1, 1, 3): modular 1 + 1 + 9 = 11; h-weighted: 1*2 + 9*1.
        assert rep.lhs == pytest.approx(11.0)
        assert rep.rhs == pytest.approx(11.0)
        assert rep.exact

    def test_zero(self, uniform3, collapse3):
        f = SimpleFunction.constant(uniform3, 0.0)
        rep = change_of_variable_check(PHI2, f, collapse3)
        assert rep.lhs == rep.rhs == 0.0

    def test_countable_collapse(self, geo, geo_collapse):
        f = SimpleFunction(geo, tuple(0.5**n for n in range(1, 65)), GeometricTail(1.0, 0.5))
        rep = change_of_variable_check(PHI2, f, geo_collapse)
        assert rep.exact


class TestDomainMembership:
    def test_finite_always(self, uniform3, collapse3):
        f = SimpleFunction.from_dict(uniform3, {"1": 9.0, "2": -3.0, "3": 1.0})
        assert domain_membership(PHI2, collapse3, f) is True

    def test_zero_member(self, geo, geo_collapse):
        z = SimpleFunction.constant(geo, 0.0)
        assert domain_membership(PHI2, geo_collapse, z) is True

    def test_constant_collapse_indicator_not_member(self, const_collapse):
        sp, tr = const_collapse
        chi = SimpleFunction.indicator(sp, [1])
        assert domain_membership(PHI2, tr, chi) is False

    def test_geometric_collapse_member(self, geo, geo_collapse):
        chi = SimpleFunction.indicator(geo, [1])
        assert domain_membership(PHI2, geo_collapse, chi) is True


class TestDensityVerdict:
    def test_finite(self, uniform3, collapse3):
        dv = density_verdict(PHI2, collapse3)
        assert dv.status is DomainStatus.DENSELY_DEFINED
        assert dv.h_finite.holds and dv.sigma_finite.holds

    def test_geometric_collapse(self, geo_collapse):
        dv = density_verdict(PHI2, geo_collapse)
        assert dv.densely_defined

    def test_constant_collapse(self, const_collapse):
        _, tr = const_collapse
        dv = density_verdict(PHI2, tr)
        assert dv.status is DomainStatus.NOT_DENSELY_DEFINED
        assert dv.witness == 1
        assert dv.sigma_finite.fails

    def test_nu_description(self, collapse3):
        assert "1 + h" in density_verdict(PHI2, collapse3).nu_description


class TestTruncationApproximants:
    def test_identity_full(self, uniform3):
        ident = Transformation.finite(uniform3, {a: a for a in uniform3.atoms})
        f = SimpleFunction.from_dict(uniform3, {"1": 1.0, "2": 2.0, "3": 3.0})
        f_n, diag = truncation_approximants(PHI2, ident, f, 3)
        assert f_n.values == f.values
        assert diag.distance.value == 0.0

    def test_three_atom_cut(self, uniform3, collapse3):
        f = SimpleFunction.from_dict(uniform3, {"1": 1.0, "2": 2.0, "3": 3.0})
        f_2, diag = truncation_approximants(PHI2, collapse3, f, 2)
        assert tuple(f_2.values) == (0.0, 2.0, 0.0)
        assert diag.in_domain
        assert diag.bound_holds

    def test_requires_index_at_least_two(self, uniform3, collapse3):
        f = SimpleFunction.constant(uniform3, 1.0)
        with pytest.raises(PreconditionError):
            truncation_approximants(PHI2, collapse3, f, 1)

    def test_requires_densely_defined(self, const_collapse):
        sp, tr = const_collapse
        f = SimpleFunction.indicator(sp, [1])
        with pytest.raises(PreconditionError):
            truncation_approximants(PHI2, tr, f, 4)

    def test_geometric_convergence(self, geo, geo_collapse):
        f = SimpleFunction(geo, tuple(0.5**n for n in range(1, 65)), GeometricTail(1.0, 0.5))
        dists = []
        for n in (2, 3, 4, 8, 16):
            _, diag = truncation_approximants(PHI2, geo_collapse, f, n)
            dists.append(diag.distance.value)
            assert diag.bound_holds
        assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
        assert dists[-1] <= 1e-6


class TestClosureIdentity:
    def test_finite_distance_zero(self, uniform3, collapse3):
        f = SimpleFunction.from_dict(uniform3, {"1": 1.0, "2": 2.0, "3": 3.0})
        rep = closure_identity_check(PHI2, collapse3, [f])
        assert rep.all_achieved
        assert all(e["achieved_distance"] <= e["epsilon"] for e in rep.entries)

    def test_geometric_collapse_achieves_epsilon(self, geo, geo_collapse):
        f = SimpleFunction(geo, tuple(0.5**n for n in range(1, 65)), GeometricTail(1.0, 0.5))
        rep = closure_identity_check(PHI2, geo_collapse, [f], epsilons=(1e-2, 1e-6))
        assert rep.all_achieved

    def test_zero_function(self, uniform3, collapse3):
        z = SimpleFunction.constant(uniform3, 0.0)
        rep = closure_identity_check(PHI2, collapse3, [z], epsilons=(1e-6,))
        assert rep.all_achieved
        assert rep.entries[0]["achieved_n"] == 2


class TestDenseWeightedSubspace:
    def test_unit_weight(self, geo):
        g = SimpleFunction.constant(geo, 1.0)
        verdict, _ = dense_weighted_subspace_check(PHI2, g)
        assert verdict.status is Status.HOLDS

    def test_infinite_atom_fails(self, uniform3):
        g = SimpleFunction(uniform3, (1.0, INF, 1.0), None)
        verdict, _ = dense_weighted_subspace_check(PHI2, g)
        assert verdict.status is Status.FAILS
        assert verdict.witness == "2"

    def test_linear_growth_truncations_converge(self, geo):
        g = SimpleFunction(geo, tuple(float(n) for n in range(1, 65)), IndexPowerTail(1.0, 1.0))
        f = SimpleFunction(geo, tuple(0.5**n for n in range(1, 65)), GeometricTail(1.0, 0.5))
        verdict, dists = dense_weighted_subspace_check(PHI2, g, sample=f)
        assert verdict.status is Status.HOLDS
        assert len(dists) >= 2
        assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
        assert dists[-1] < 1e-6


class TestSumAndCompositeDomains:
    def test_identity_pair(self, uniform3):
        ident = Transformation.finite(uniform3, {a: a for a in uniform3.atoms})
        f = SimpleFunction.from_dict(uniform3, {"1": 1.0, "2": 2.0, "3": 3.0})
        rep = sum_domain_check(PHI2, 1.0, ident, 1.0, ident, f)
        assert rep.weighted_member and rep.direct_member and rep.agree

    def test_finite_always_agree(self, uniform3, collapse3):
        psi = Transformation.finite(uniform3, {"1": "2", "2": "3", "3": "1"})
        f = SimpleFunction.from_dict(uniform3, {"1": -4.0, "2": 0.5, "3": 2.0})
        rep = sum_domain_check(PHI2, 0.5, collapse3, 2.0, psi, f)
        assert rep.agree is True

    def test_constant_collapse_both_false(self, const_collapse):
        sp, tr = const_collapse
        ident = Transformation.from_law(sp, IdentityLaw())
        chi = SimpleFunction.indicator(sp, [1])
        rep = sum_domain_check(PHI2, 1.0, tr, 1.0, ident, chi)
        assert rep.weighted_member is False
        assert rep.direct_member is False
        assert rep.agree is True

    def test_composite_identity(self, uniform3):
        ident = Transformation.finite(uniform3, {a: a for a in uniform3.atoms})
        f = SimpleFunction.from_dict(uniform3, {"1": 1.0, "2": 2.0, "3": 3.0})
        rep = composite_domain_check(PHI2, ident, ident, f)
        assert rep.weighted_member and rep.direct_member and rep.agree

    def test_composite_permutation_inner(self, uniform3, collapse3):
        perm = Transformation.finite(uniform3, {"1": "2", "2": "3", "3": "1"})
        f = SimpleFunction.from_dict(uniform3, {"1": 1.0, "2": 2.0, "3": 3.0})
        rep = composite_domain_check(PHI2, collapse3, perm, f)
        assert rep.agree is True

    def test_composite_nonbijective_inner_skips_facet(self, uniform3, collapse3):
        f = SimpleFunction.from_dict(uniform3, {"1": 1.0})
        rep = composite_domain_check(PHI2, collapse3, collapse3, f)
        assert rep.weighted_member is None
        assert "not bijective" in rep.note
        assert rep.direct_member is True


class TestClosedness:
    def test_finite_sequences(self, uniform3, collapse3):
        f = SimpleFunction.from_dict(uniform3, {"1": 1.0, "2": 2.0, "3": 3.0})
        rep = closedness_demo(PHI2, collapse3, f)
        assert rep.all_consistent
        assert all(e["status"] == "converged" for e in rep.sequences)

    def test_geometric_truncations(self, geo, geo_collapse):
        f = SimpleFunction(geo, tuple(0.5**n for n in range(1, 65)), GeometricTail(1.0, 0.5))
        rep = closedness_demo(PHI2, geo_collapse, f, builders=("truncation",), steps=8)
        assert rep.all_consistent

    def test_requires_densely_defined(self, const_collapse):
        sp, tr = const_collapse
        f = SimpleFunction.indicator(sp, [1])
        with pytest.raises(PreconditionError):
            closedness_demo(PHI2, tr, f)


class TestBoundedness:
    def test_finite_bounded(self, uniform3, collapse3):
        bd = boundedness_verdict(PHI2, collapse3)
        assert bd.status is BoundednessStatus.EVERYWHERE_DEFINED_AND_BOUNDED
        assert bd.norm_bound == pytest.approx(2.0)

    def test_identity_ratio_one(self, uniform3):
        ident = Transformation.finite(uniform3, {a: a for a in uniform3.atoms})
        bd = boundedness_verdict(PHI2, ident)
        assert bd.norm_bound == pytest.approx(1.0)
        est = operator_norm_estimate(PHI2, ident, probe_count=4)
        assert est == pytest.approx(1.0, rel=1e-9)

    def test_opnorm_probe_sqrt2(self, uniform3, collapse3):
        est = operator_norm_estimate(PHI2, collapse3, probe_count=8)
        assert est >= math.sqrt(2.0) - 1e-9
        bd = boundedness_verdict(PHI2, collapse3)
        assert est <= bd.norm_bound + 1e-9

    def test_square_map_unbounded_with_witness(self):
        sp = CountableSpace(PowerLawWeights(1.0, 2.0), depth=64)
        square = Transformation.from_law(sp, PowerIndexLaw(2))
        assert density_verdict(PHI2, square).densely_defined
        bd = boundedness_verdict(PHI2, square)
        assert bd.status is BoundednessStatus.NOT_EVERYWHERE_DEFINED
        w = bd.witness
        assert w is not None
        from orlicz.norms import modular_bounds

        # The witness lies in the space...
        assert bd.witness_modular <= 1.0 + 1e-9
        assert luxemburg_norm(PHI2, w).value < INF
        # ...but every probed scaling of its composition has infinite modular.
        comp = compose_apply(w, square)
        for t in bd.witness_scalings_probed:
            lo, _ = modular_bounds(PHI2, comp, scale=t)
            assert lo == INF
        assert luxemburg_norm(PHI2, comp).value == INF
        assert domain_membership(PHI2, square, w) is False

    def test_pair_swap_bounded(self, geo):
        swap = Transformation.from_law(geo, PairSwapLaw())
        bd = boundedness_verdict(PHI2, swap)
        assert bd.status is BoundednessStatus.EVERYWHERE_DEFINED_AND_BOUNDED
        assert bd.norm_bound == pytest.approx(2.0)  # sup h = 1/r = 2

    def test_requires_densely_defined(self, const_collapse):
        _, tr = const_collapse
        with pytest.raises(PreconditionError):
            boundedness_verdict(PHI2, tr)

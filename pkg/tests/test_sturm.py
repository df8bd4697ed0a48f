"""Pencil assembly, inertia counts, bisection, and convergence studies."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cusplab.model import EndGeometry
from cusplab.reduce import (CanonicalOperator, ModeSpec, RadialOperator,
                            scalar_radial_operator)
from cusplab.sturm import (SturmError, TridiagonalPencil, cells_for,
                           converge, count_below, count_below_many,
                           count_below_stack, discretize, eigenvalues_below,
                           gershgorin_lower, observed_order, richardson)

PI2 = math.pi * math.pi
FLAT = CanonicalOperator(p=1.0, y0=1.0, z0=0.0, conj_coeff=0.0)


def dense_spectrum(pen):
    n = pen.n
    s = 1.0 / np.sqrt(pen.mass)
    a = np.diag(pen.diag * s * s)
    ij = np.arange(n - 1)
    a[ij, ij + 1] = a[ij + 1, ij] = pen.offdiag * s[:-1] * s[1:]
    return np.sort(np.linalg.eigvalsh(a))


def test_textbook_assembly_on_unit_interval():
    pen = discretize(FLAT, 1.0, 1000)
    h = 1.0 / 1000
    assert pen.n == 999
    assert np.allclose(pen.diag, 2.0 / h)
    assert np.allclose(pen.offdiag, -1.0 / h)
    assert np.allclose(pen.mass, h)


def test_count_below_unit_interval():
    pen = discretize(FLAT, 1.0, 2000)
    # pi^2 ~ 9.87 and 4 pi^2 ~ 39.5 lie below 50; 9 pi^2 ~ 88.8 does not
    assert count_below(pen, 50.0) == 2
    assert count_below(pen, 5.0) == 0


def test_count_below_gershgorin_floor():
    pen = discretize(FLAT, 1.0, 500)
    assert count_below(pen, gershgorin_lower(pen) - 1.0) == 0


def test_weighted_pencil_matches_flat_channel():
    """w1 = 1, w0 = y^-2 on (1, e^T): eigenvalues 1/4 + (k pi / T)^2."""
    op = RadialOperator(density_exponent=-2.0, stiffness_exponent=0.0, y0=1.0)
    T = 8.0
    pen = discretize(op, T, 4000)
    got = eigenvalues_below(pen, 1.0, 1e-10)
    want = [0.25 + (k * math.pi / T) ** 2 for k in range(1, len(got) + 1)]
    assert np.allclose(got, want, atol=2e-4)


def test_small_grid_rejected():
    with pytest.raises(SturmError, match="cells"):
        discretize(FLAT, 1.0, 3)
    with pytest.raises(SturmError, match="interior"):
        TridiagonalPencil(diag=np.ones(2), offdiag=-np.ones(1),
                          mass=np.ones(2), h=0.1) and discretize(FLAT, 1.0, 3)


def test_overflow_names_the_term():
    op = RadialOperator(density_exponent=0.0, stiffness_exponent=1600.0, y0=1.0)
    with pytest.raises(SturmError, match="overflow"):
        discretize(op, 8.0, 100)


def test_count_matches_dense_oracle_fixed_seed():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(3, 120))
        pen = TridiagonalPencil(diag=rng.uniform(-2, 2, n),
                                offdiag=rng.uniform(-1, 1, n - 1),
                                mass=rng.uniform(0.5, 2.0, n), h=1.0)
        spec = dense_spectrum(pen)
        for lam in rng.uniform(spec[0] - 0.5, spec[-1] + 0.5, 8):
            assert count_below(pen, float(lam)) == int(np.sum(spec < lam))


@given(st.integers(min_value=3, max_value=40), st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_count_nondecreasing_in_lambda(n, seed):
    rng = np.random.default_rng(seed)
    pen = TridiagonalPencil(diag=rng.uniform(-2, 2, n),
                            offdiag=rng.uniform(-1, 1, n - 1),
                            mass=rng.uniform(0.5, 2.0, n), h=1.0)
    lams = np.sort(rng.uniform(-6.0, 6.0, 12))
    counts = count_below_many(pen, lams)
    assert np.all(np.diff(counts) >= 0)
    assert counts[-1] <= n


def test_count_stack_matches_scalar_counts():
    rng = np.random.default_rng(3)
    n = 60
    off = rng.uniform(-1, 1, n - 1)
    mass = rng.uniform(0.5, 2.0, n)
    diags = rng.uniform(-2, 2, (4, n))
    lams = np.linspace(-3, 3, 7)
    stacked = count_below_stack(diags, off, mass, lams)
    for i in range(4):
        pen = TridiagonalPencil(diag=diags[i].copy(), offdiag=off.copy(),
                                mass=mass.copy(), h=1.0)
        assert np.array_equal(stacked[i], count_below_many(pen, lams))


def test_exact_pivot_hit_is_recorded_and_deterministic():
    pen = TridiagonalPencil(diag=np.ones(5), offdiag=np.zeros(4),
                            mass=np.ones(5), h=1.0)
    a = count_below(pen, 1.0)
    b = count_below(pen, 1.0)
    assert a == b == 0          # eigenvalues lie exactly at 1, not below
    assert pen.breakdowns >= 2  # every exact hit was shifted and recorded


def test_eigenvalues_below_multiplicity_from_clusters():
    # two decoupled identical 2x2 blocks: doubly degenerate eigenvalues
    diag = np.array([2.0, 2.0, 2.0, 2.0])
    off = np.array([-1.0, 0.0, -1.0])
    pen = TridiagonalPencil(diag=diag, offdiag=off, mass=np.ones(4), h=1.0)
    got = eigenvalues_below(pen, 10.0, 1e-12)
    assert np.allclose(got, [1.0, 1.0, 3.0, 3.0], atol=1e-10)


def test_eigenvalues_below_empty_window():
    pen = discretize(FLAT, 1.0, 200)
    assert eigenvalues_below(pen, 1.0, 1e-8) == []


def test_bisection_tolerance_validation():
    pen = discretize(FLAT, 1.0, 200)
    with pytest.raises(SturmError, match="tolerance"):
        eigenvalues_below(pen, 50.0, 0.0)


def test_richardson_and_order_on_unit_interval():
    cells = (250, 500, 1000)
    hs = [1.0 / c for c in cells]
    vals = [eigenvalues_below(discretize(FLAT, 1.0, c), 50.0, 1e-11)[0]
            for c in cells]
    assert abs(richardson(vals, hs) - PI2) < 1e-8
    assert observed_order(vals, hs) >= 1.9


def test_grid_refinement_monotone_from_above_consistent_mass():
    """Nested P1 spaces with consistent mass: eigenvalues only come down."""
    op = CanonicalOperator(p=1.0, y0=1.0, z0=0.0, conj_coeff=0.25)
    prev = None
    for cells in (200, 400, 800):
        pen = discretize(op, 8.0, cells, mass="consistent")
        evs = np.array(eigenvalues_below(pen, 1.2, 1e-11))
        if prev is not None:
            m = min(len(prev), len(evs))
            assert np.all(evs[:m] <= prev[:m] * (1 + 1e-12) + 1e-12)
        prev = evs
    # and the consistent-mass values stay above the continuum limit
    exact = np.array([0.25 + (k * math.pi / 8.0) ** 2 for k in range(1, len(prev) + 1)])
    assert np.all(prev >= exact - 1e-12)


def test_converge_report_scalar_mode():
    geom = EndGeometry(2, 1, 1.0)
    op = scalar_radial_operator(ModeSpec(label=(0,), nu=0.25, multiplicity=1), geom)
    rep = converge(op, 1.0, grids=(400, 800, 1600), domains=(6.0, 12.0))
    assert rep.domain_monotone
    assert rep.stable  # confining mode: counts settle
    assert all(o is None or o >= 1.9 for o in rep.orders)
    for (g, T), c in rep.counts.items():
        assert c == len(rep.eigenvalues[(g, T)])


def test_converge_needs_two_grids_and_domains():
    geom = EndGeometry(2, 1, 1.0)
    op = scalar_radial_operator(ModeSpec(label=(0,), nu=0.25, multiplicity=1), geom)
    with pytest.raises(SturmError, match="at least 2"):
        converge(op, 1.0, grids=(400,), domains=(6.0, 12.0))
    with pytest.raises(SturmError, match="at least 2"):
        converge(op, 1.0, grids=(400, 800), domains=(6.0,))


def test_counts_grow_linearly_on_flat_channel():
    """Analytic law: N_T(lambda) = floor(T sqrt(lambda - 1/4) / pi)."""
    op = CanonicalOperator(p=1.0, y0=1.0, z0=0.0, conj_coeff=0.25)
    lam = 1.0
    for T in (8.0, 16.0, 32.0):
        pen = discretize(op, T, cells_for(1000, T, 8.0))
        want = math.floor(T * math.sqrt(lam - 0.25) / math.pi)
        assert abs(count_below(pen, lam) - want) <= 1

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nyquist_lab.setgeom import Grid, SetSpec
from nyquist_lab.spectral import eigendecompose
from nyquist_lab.timeband import (
    BandSpec,
    DiscreteOperator,
    DpssSetup,
    NystromSetup,
    apply,
    build_dpss,
    build_nystrom,
    dpss_block,
    load_operator,
    save_operator,
)
from oracles import jacobi_eigvals, sinc_kernel_gl

PI_BAND = BandSpec.interval(math.pi)
UNIT = SetSpec.interval(0, 1)


def test_kernel_closed_form_and_removable_singularity():
    band = BandSpec.interval(2.5)
    x = np.array([[0.0], [0.3], [-1.7]])
    expected = [2.5 / math.pi, math.sin(2.5 * 0.3) / (math.pi * 0.3), math.sin(-2.5 * 1.7) / (math.pi * -1.7)]
    assert np.allclose(band.kernel(x), expected, rtol=1e-14, atol=0)


def test_kernel_of_shifted_band_matches_difference_of_sines():
    band = BandSpec.interval(1.0, 3.0)
    x = np.array([[0.4]])
    val = band.kernel(x)[0]
    # inverse transform of the indicator of [1, 3]
    direct = (np.exp(3j * 0.4) - np.exp(1j * 0.4)) / (2j * math.pi * 0.4)
    assert val == pytest.approx(direct, rel=1e-14)
    assert not band.symmetric


def test_kernel_of_symmetric_union_is_real_even():
    band = BandSpec(SetSpec.intervals((-3, -1), (1, 3)))
    x = np.linspace(-4, 4, 41)[:, None]
    k = band.kernel(x)
    assert np.max(np.abs(np.imag(k))) < 1e-15
    assert np.allclose(k, k[::-1])
    wide, narrow = BandSpec.interval(3.0), BandSpec.interval(1.0)
    assert np.allclose(np.real(k), wide.kernel(x) - narrow.kernel(x), atol=1e-15)


def test_nystrom_diagonal_and_trace():
    g = Grid.uniform(2, 1 / 32)
    op = build_nystrom(UNIT, PI_BAND, g)
    assert np.allclose(np.diag(op.block), g.weight)
    assert op.numeric_trace == pytest.approx(1.0, rel=1e-12)
    assert op.analytic_trace == pytest.approx(1.0, rel=1e-15)
    full = op.matrix
    off = op.off_set_indices
    assert np.all(full[off] == 0) and np.all(full[:, off] == 0)
    assert np.array_equal(op.block, op.block.T)


def test_nystrom_rejects_bad_inputs():
    g = Grid.uniform(2, 1 / 8)
    with pytest.raises(ValueError, match="symmetric"):
        build_nystrom(UNIT, BandSpec.interval(0.0, 1.0), g)
    with pytest.raises(ValueError, match="Nyquist"):
        build_nystrom(UNIT, BandSpec.interval(30.0), g)
    with pytest.raises(ValueError):
        build_nystrom(SetSpec.disk(1), BandSpec(SetSpec.box((-1, 1), (-1, 1))), Grid.uniform(2, 0.25, 2))


def test_nystrom_top_eigenvalue_matches_gauss_legendre_oracle():
    # midpoint rule converges at second order to the continuum prolate value
    ref = sinc_kernel_gl(1.0, math.pi)[0]
    errs = []
    for h in (1 / 32, 1 / 64, 1 / 128):
        op = build_nystrom(UNIT, PI_BAND, Grid.covering(UNIT, h))
        errs.append(abs(eigendecompose(op).eigenvalues[0] - ref))
    assert ref == pytest.approx(0.7833688, abs=1e-6)
    assert errs[2] < 2e-5
    assert errs[1] / errs[2] > 3.5 and errs[0] / errs[1] > 3.5


def test_two_dimensional_nystrom_is_tensor_product():
    h = 1 / 8
    box = SetSpec.box((0, 1), (0, 1))
    band2 = BandSpec(SetSpec.box((-math.pi, math.pi), (-math.pi, math.pi)))
    op2 = build_nystrom(box, band2, Grid.covering(box, h))
    op1 = build_nystrom(UNIT, PI_BAND, Grid.covering(UNIT, h))
    lam2 = np.sort(np.linalg.eigvalsh(op2.block))[::-1]
    lam1 = np.linalg.eigvalsh(op1.block)
    prod = np.sort(np.outer(lam1, lam1).ravel())[::-1]
    assert np.allclose(lam2, prod, atol=1e-12)
    assert op2.numeric_trace == pytest.approx(1.0)


def test_dpss_examples():
    op1 = build_dpss(1, 0.3)
    assert op1.block.tolist() == [[0.6]]
    op = build_dpss(2, 0.25)
    assert np.allclose(op.block, [[0.5, 1 / math.pi], [1 / math.pi, 0.5]], atol=1e-16)
    lam = eigendecompose(op).eigenvalues
    assert np.allclose(lam, [0.5 + 1 / math.pi, 0.5 - 1 / math.pi], atol=1e-15)
    f = np.zeros(op.ambient_dim)
    f[:2] = 1
    assert np.allclose(apply(op, f), (0.5 + 1 / math.pi) * f, atol=1e-15)
    with pytest.raises(ValueError):
        build_dpss(4, 0.5)


def test_dpss_n64():
    op = build_dpss(64, 0.25)
    assert op.numeric_trace == pytest.approx(32.0, rel=1e-14)
    lam = eigendecompose(op).eigenvalues
    assert abs(np.sum(lam > 0.5) - 32) <= 2
    # exact extremes are ~1e-48 from 0 and 1; double precision only resolves 1e-12
    assert np.all(lam > -1e-12) and np.all(lam < 1 + 1e-12)


def test_dpss_matches_jacobi_oracle():
    block = dpss_block(24, 0.2)
    lam = eigendecompose(build_dpss(24, 0.2)).eigenvalues
    assert np.allclose(lam, jacobi_eigvals(block), atol=1e-13)


def test_apply_kernel_and_length_check():
    op = build_dpss(8, 0.25)
    f = np.zeros(op.ambient_dim)
    f[op.off_set_indices[:3]] = 1.0
    assert not np.any(apply(op, f))
    with pytest.raises(ValueError):
        apply(op, np.ones(op.ambient_dim + 1))


def test_operator_validation():
    with pytest.raises(ValueError):
        DiscreteOperator(np.eye(2), np.array([0, 1]), 1, 2.0, "dpss")
    with pytest.raises(ValueError):
        DiscreteOperator(np.eye(2), np.array([1, 0]), 3, 2.0, "dpss")


@pytest.mark.parametrize("fmt", ["npy", "csv"])
def test_dump_and_load_round_trip(tmp_path, fmt):
    op = build_nystrom(UNIT, PI_BAND, Grid.covering(UNIT, 1 / 16))
    save_operator(op, tmp_path / "op", fmt)
    back = load_operator(tmp_path / "op")
    assert np.array_equal(back.block, op.block)
    assert np.array_equal(back.set_indices, op.set_indices)
    assert back.grid == op.grid and back.backend == "nystrom"
    assert back.analytic_trace == op.analytic_trace and back.meta == op.meta


def test_setups_build_at_scale():
    assert DpssSetup(0.25).build(16).block.shape == (16, 16)
    setup = NystromSetup(UNIT, PI_BAND, 1 / 16)
    op = setup.build(4)
    assert op.numeric_trace == pytest.approx(4.0)
    assert setup.reference_density == pytest.approx(1.0)


def test_squared_trace_defect_shrinks_with_scale():
    defects = []
    for N in (32, 64, 128):
        lam = eigendecompose(build_dpss(N, 0.25)).eigenvalues
        assert np.sum(lam**2) <= np.sum(lam)
        defects.append((np.sum(lam) - np.sum(lam**2)) / (2 * N * 0.25))
    assert defects[0] > defects[1] > defects[2]


def test_eigenvectors_live_on_the_set():
    op = build_nystrom(UNIT, PI_BAND, Grid.covering(UNIT, 1 / 16))
    spec = eigendecompose(op)
    vecs = spec.ambient()
    keep = spec.eigenvalues > 1e-10
    assert np.max(np.abs(vecs[op.off_set_indices][:, keep])) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 40), st.floats(0.01, 0.49))
def test_dpss_trace_and_range(N, W):
    op = build_dpss(N, W)
    assert op.numeric_trace == pytest.approx(2 * N * W, rel=1e-12)
    lam = np.linalg.eigvalsh(op.block)
    assert lam.min() > -1e-12 and lam.max() < 1 + 1e-12
    assert np.array_equal(op.block, op.block.T)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.integers(1, 4), st.sampled_from([1 / 8, 1 / 16]))
def test_nystrom_trace_identity(length, halfwidth_eighths, h):
    T = SetSpec.interval(0, length)
    band = BandSpec.interval(halfwidth_eighths * math.pi / 4)
    op = build_nystrom(T, band, Grid.covering(T, h))
    assert op.numeric_trace == pytest.approx(op.analytic_trace, rel=1e-9)
    lam = np.linalg.eigvalsh(op.block)
    assert lam.min() > -1e-12 and lam.max() < 1 + 1e-12

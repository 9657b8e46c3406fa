import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nyquist_lab.family import (
    FamilyParams,
    build_block,
    construct_family,
    family_density,
    flat_completion,
    select_parameters,
)
from nyquist_lab.spectral import Spectrum, eigendecompose
from nyquist_lab.timeband import DiscreteOperator, build_dpss


def test_parameter_example():
    p = select_parameters(0.2, 0.02)
    assert p.gamma == pytest.approx(0.18 / 0.98, rel=1e-15)
    assert p.n == 5 and p.multiplier == pytest.approx(6 / 5)
    assert p.sigma2 + (1 - p.sigma2) * p.gamma == pytest.approx(0.2, rel=1e-15)
    assert p.residual_bound <= 0.2


def test_parameter_limits_and_errors():
    p = select_parameters(0.5 - 1e-6, 1e-9)
    assert p.n == 2 and p.gamma == pytest.approx(0.5 - 1e-6, rel=1e-6)
    with pytest.raises(ValueError):
        select_parameters(0.2, 0.2)
    with pytest.raises(ValueError):
        select_parameters(0.6)
    assert select_parameters(0.2).sigma2 == pytest.approx(0.02)


def test_integer_reciprocal_gamma_uses_it_exactly():
    # sigma2 chosen so that gamma = 1/4 up to rounding
    sigma2 = 0.1
    eps = sigma2 + (1 - sigma2) * 0.25
    assert select_parameters(eps, sigma2).n == 4


def test_flat_completion_examples():
    q2 = flat_completion(2)
    s = 1 / math.sqrt(2)
    assert np.allclose(q2, [[s, s], [s, -s]], atol=1e-16)
    q3 = flat_completion(3)
    trimmed = q3[:, 1:]
    assert np.allclose(trimmed @ trimmed.T, np.eye(3) - 1 / 3, atol=1e-15)
    with pytest.raises(ValueError):
        flat_completion(1)


def test_two_vector_block_closed_form():
    phi = np.array([1.0, 0.0])
    h = np.array([0.0, 1.0])
    out, psi = build_block(phi, h)
    s = 1 / math.sqrt(2)
    assert np.allclose(out[:, 0], s * phi + s * h, atol=1e-16)
    assert np.allclose(out[:, 1], -s * phi + s * h, atol=1e-16)
    assert abs(out[:, 0] @ out[:, 1]) <= 1e-15
    assert np.allclose(np.diag(psi.T @ psi), 1 / 2)


def test_block_rejects_non_orthonormal_input():
    with pytest.raises(ValueError):
        build_block(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).T, np.array([1.0, 0.0, 0.0]))


def test_dpss_family_example():
    op = build_dpss(64, 0.25)
    spec = eigendecompose(op)
    params = select_parameters(0.2, 0.02)
    fam = construct_family(spec, op, params)
    source = int(np.sum(spec.eigenvalues > 1 - math.sqrt(0.02)))
    assert 28 <= source <= 32
    assert fam.source_count == source
    assert fam.block_count == source // 5 == 6
    assert fam.size == 36 == 6 * (source // 5)
    assert fam.residual_count == source % 5
    assert fam.max_residual <= params.residual_bound + 1e-12 <= 0.2 + 1e-12
    g = fam.vectors.T @ fam.vectors
    assert np.max(np.abs(g - np.eye(36))) <= 1e-8
    assert fam.summary().startswith("blocks=6 n=5 size=36 max_residual=")


def test_psi_gram_per_block():
    op = build_dpss(64, 0.25)
    spec = eigendecompose(op)
    n = 5
    eig = spec.ambient(slice(0, n))
    h = np.zeros(op.ambient_dim)
    h[op.off_set_indices[0]] = 1
    _, psi = build_block(eig, h)
    target = np.eye(n + 1) - 1 / (n + 1)
    assert np.max(np.abs(psi.T @ psi - target)) <= 1e-8


def test_empty_family_branch():
    lam = np.array([0.99, 0.98, 0.97, 0.1])
    op = DiscreteOperator(np.diag(lam), np.arange(4), 8, float(lam.sum()), "dpss")
    spec = eigendecompose(op)
    fam = construct_family(spec, op, select_parameters(0.2, 0.02))
    assert fam.size == 0 and fam.source_count == 3
    assert "n=5" in fam.diagnostic
    dens = family_density(fam, 4, 1, 0.5)
    assert dens.density == 0 and not dens.ok


def test_insufficient_kernel_capacity():
    op = build_dpss(64, 0.25, ambient_dim=66)
    with pytest.raises(ValueError, match="kernel coordinates"):
        construct_family(eigendecompose(op), op, select_parameters(0.2, 0.02))


def test_save_writes_matrix_csv_and_manifest(tmp_path):
    op = build_dpss(64, 0.25)
    fam = construct_family(eigendecompose(op), op, select_parameters(0.2, 0.02))
    paths = fam.save(tmp_path / "fam", csv=True, note="x")
    assert [p.suffix for p in paths] == [".npy", ".csv", ".json"]
    assert np.array_equal(np.load(paths[0]), fam.vectors)
    doc = json.loads(paths[2].read_text())
    assert doc["size"] == 36 and doc["params"]["n"] == 5 and doc["note"] == "x"
    assert len(paths[1].read_text().splitlines()) == op.ambient_dim + 1


def test_small_epsilon_density_ratio_tends_to_one():
    p = select_parameters(1e-3, 1e-4)
    assert p.multiplier < 1.002
    fam_like = type("F", (), {"size": 0, "params": p})
    assert family_density(fam_like, 1, 1, 1.0).target == pytest.approx(1 + p.gamma)


@settings(max_examples=200)
@given(st.floats(1e-4, 0.4999), st.floats(0.001, 0.999))
def test_parameter_relations(eps, frac):
    p = select_parameters(eps, eps * frac)
    assert p.sigma2 + (1 - p.sigma2) * p.gamma == pytest.approx(eps, rel=1e-12)
    assert 0 < p.gamma < 1
    assert p.n <= 1 / p.gamma * (1 + 1e-12) and 1 / p.gamma <= (p.n + 1) * (1 + 1e-12)
    assert p.residual_bound <= eps * (1 + 1e-12)


@given(st.integers(2, 40))
def test_flat_completion_properties(m):
    q = flat_completion(m)
    assert np.max(np.abs(q.T @ q - np.eye(m))) <= 1e-12
    assert np.allclose(q, q.T)
    assert np.allclose(q[:, 0], 1 / math.sqrt(m), atol=1e-15)
    t = q[:, 1:]
    assert np.max(np.abs(t @ t.T - (np.eye(m) - 1 / m))) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(8, 80), st.floats(0.1, 0.45), st.floats(0.05, 0.45), st.floats(0.05, 0.95))
def test_family_invariants_on_dpss(N, W, eps, frac):
    op = build_dpss(N, W)
    spec = eigendecompose(op)
    params = select_parameters(eps, eps * frac)
    fam = construct_family(spec, op, params)
    source = int(np.sum(spec.eigenvalues > params.threshold))
    assert fam.size == (params.n + 1) * (source // params.n)
    if fam.size:
        assert np.max(np.abs(fam.vectors.T @ fam.vectors - np.eye(fam.size))) <= 1e-8
        assert fam.max_residual <= params.residual_bound + 1e-10
        assert np.all(op.matrix[:, fam.kernel_indices] == 0)

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsepr.certify import (CertifyConfig, MeasurementOperator, ProbeConfig, SearchConfig,
                              _RatioObjective, _complex_rows, _lift_complex, _lift_real,
                              build_complex_pair_operator, build_real_pair_operator,
                              build_real_single_operator, certify_basis, certify_items,
                              dihedral_witness, fourier_frame, hermitian_coords,
                              hermitian_from_coords, kernel_low_rank_probe, lift,
                              search_rank_constrained_kernel, symmetric_coords,
                              symmetric_from_coords, verify_witness)
from sparsepr.exceptions import ConfigError, GuardError
from sparsepr.model import (Basis, Frame, OverlappingFramePair, SparseVector, Support,
                            coefficients_in_frame_order, embed, frame_from_basis,
                            overlapping_pair_from_basis, sample_generic_basis)
from sparsepr.signal import ROTATION, power_spectrum, real_dft, reduced_b


def cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng, m):
    x = cplx(rng, m, m)
    return x + x.conj().T


def random_symmetric(rng, m):
    x = rng.standard_normal((m, m))
    return x + x.T


def complex_pair(rng, m, n):
    return OverlappingFramePair(Frame(cplx(rng, m, n)), Frame(cplx(rng, m, n)), 0)


def real_pair_from_basis(basis, s1, s2):
    pair = overlapping_pair_from_basis(basis, s1, s2)
    return OverlappingFramePair(fourier_frame(pair.first), fourier_frame(pair.second), pair.s), pair


def central_difference(fun, w, h=1e-6):
    cols = []
    for k in range(w.shape[1]):
        e = np.zeros_like(w)
        e[:, k] = h
        cols.append((fun(w + e) - fun(w - e)) / (2 * h))
    return np.stack(cols, axis=-1)


# -- coordinates and lifting -------------------------------------------------------

def test_coordinate_roundtrips(rng):
    h = random_hermitian(rng, 4)
    np.testing.assert_allclose(hermitian_from_coords(hermitian_coords(h), 4), h)
    s = random_symmetric(rng, 4)
    np.testing.assert_allclose(symmetric_from_coords(symmetric_coords(s), 4), s)


def test_lift_matches_outer_product(rng):
    x = cplx(rng, 3)
    np.testing.assert_allclose(lift(x), hermitian_coords(np.outer(x, x.conj())))
    y = rng.standard_normal(3)
    np.testing.assert_allclose(lift(y), symmetric_coords(np.outer(y, y)))


def test_lift_jacobians_match_finite_differences(rng):
    w = rng.standard_normal((5, 4))
    _, jac = _lift_real(w)
    np.testing.assert_allclose(jac, central_difference(lambda v: _lift_real(v)[0], w), atol=1e-7)
    w = rng.standard_normal((5, 6))
    _, jac = _lift_complex(w)
    np.testing.assert_allclose(jac, central_difference(lambda v: _lift_complex(v)[0], w), atol=1e-7)


@pytest.mark.parametrize("kind", ["complex", "real-pair", "real-single"])
def test_ratio_objective_jacobian(kind, rng):
    if kind == "complex":
        op = build_complex_pair_operator(complex_pair(rng, 3, 7))
    else:
        b = sample_generic_basis(8, seed=3)
        pair, _ = real_pair_from_basis(b, Support((0, 2, 5), 8), Support((1, 2, 7), 8))
        op = build_real_pair_operator(pair) if kind == "real-pair" else build_real_single_operator(pair.first)
    obj = _RatioObjective(op)
    w = rng.standard_normal((6, 2 * obj.half))
    _, jac = obj(w)
    fd = central_difference(lambda v: obj(v)[0], w)
    assert np.abs(jac - fd).max() <= 1e-5 * max(1.0, np.abs(fd).max())


# -- complex pair operator ----------------------------------------------------------

def test_complex_pair_examples(rng):
    f = Frame(cplx(rng, 3, 6))
    same = build_complex_pair_operator(OverlappingFramePair(f, f, 3))
    a = random_hermitian(rng, 3)
    np.testing.assert_allclose(same.evaluate(a, a), 0, atol=1e-12)

    pair = complex_pair(rng, 3, 6)
    op = build_complex_pair_operator(pair)
    x, y = cplx(rng, 3), cplx(rng, 3)
    alpha, beta = pair.first.matrix, pair.second.matrix
    # <x, conj(alpha_i)> = sum_j x_j alpha_ji
    direct = np.abs(x @ alpha) ** 2 - np.abs(y @ beta) ** 2
    lifted = op.evaluate(np.outer(x, x.conj()), np.outer(y, y.conj()))
    np.testing.assert_allclose(lifted, direct, atol=1e-10)
    np.testing.assert_allclose(op.evaluate_rank_one(x, y), direct, atol=1e-10)

    one = build_complex_pair_operator(complex_pair(rng, 1, 5))
    np.testing.assert_allclose(one.matrix[:, 0], np.abs(one.matrix[:, 0]))
    assert one.matrix.shape == (5, 2)


def test_complex_operator_matches_real_decomposition(rng):
    # with alpha = u + i u' and H = A + i A', the symmetric/skew form
    # u^T A u + u'^T A u' - 2 u^T A' u' equals our row applied to conj(H)
    for _ in range(20):
        m = rng.integers(1, 5)
        alpha = cplx(rng, m, 6)
        h = random_hermitian(rng, m)
        ours = _complex_rows(alpha) @ hermitian_coords(np.conj(h))
        u, up = alpha.real, alpha.imag
        a, ap = h.real, h.imag
        form = (np.einsum("in,ij,jn->n", u, a, u) + np.einsum("in,ij,jn->n", up, a, up)
                - 2 * np.einsum("in,ij,jn->n", u, ap, up))
        np.testing.assert_allclose(ours, form, atol=1e-10)


def test_complex_operator_is_power_spectrum_difference(rng):
    b = sample_generic_basis(7, "complex", seed=5)
    s1, s2 = Support((0, 3), 7), Support((1, 3), 7)
    pair = overlapping_pair_from_basis(b, s1, s2)
    op = build_complex_pair_operator(OverlappingFramePair(fourier_frame(pair.first),
                                                          fourier_frame(pair.second), pair.s))
    v1, v2 = SparseVector(s1, cplx(rng, 2)), SparseVector(s2, cplx(rng, 2))
    x = coefficients_in_frame_order(v1, pair.first)
    y = coefficients_in_frame_order(v2, pair.second)
    expected = power_spectrum(embed(v1, b)) - power_spectrum(embed(v2, b))
    np.testing.assert_allclose(op.evaluate_rank_one(x, y), expected, atol=1e-9 * np.abs(expected).max())


# -- real operators -------------------------------------------------------------------

def test_real_pair_examples(rng):
    b = sample_generic_basis(9, seed=1)
    pair, raw = real_pair_from_basis(b, Support((0, 4, 8), 9), Support((2, 4, 5), 9))
    op = build_real_pair_operator(pair)
    assert op.dim == 5
    same = build_real_pair_operator(OverlappingFramePair(pair.first, pair.first, 3))
    a = random_symmetric(rng, 3)
    np.testing.assert_allclose(same.evaluate(a, a), 0, atol=1e-12)

    v1 = SparseVector(Support((0, 4, 8), 9), rng.standard_normal(3))
    v2 = SparseVector(Support((2, 4, 5), 9), rng.standard_normal(3))
    x = coefficients_in_frame_order(v1, raw.first)
    y = coefficients_in_frame_order(v2, raw.second)
    expected = reduced_b(real_dft(embed(v1, b))) - reduced_b(real_dft(embed(v2, b)))
    np.testing.assert_allclose(op.evaluate_rank_one(x, y), expected, atol=1e-9 * np.abs(expected).max())


def test_real_pair_scalar_case(rng):
    n = 6
    alpha, beta = rng.standard_normal((1, n)), rng.standard_normal((1, n))
    op = build_real_pair_operator(OverlappingFramePair(Frame(alpha), Frame(beta), 0))
    x, y = 1.7, -0.4
    got = op.evaluate(np.array([[x * x]]), np.array([[y * y]]))
    a2, b2 = alpha[0] ** 2, beta[0] ** 2
    want = [a2[0] * x * x - b2[0] * y * y]
    want += [(a2[k] + a2[n - k]) * x * x - (b2[k] + b2[n - k]) * y * y for k in (1, 2)]
    want += [a2[3] * x * x - b2[3] * y * y]
    np.testing.assert_allclose(got, want)


def test_real_single_examples(rng):
    b = sample_generic_basis(10, seed=2)
    f = fourier_frame(frame_from_basis(b, Support((1, 2, 6), 10)))
    op = build_real_single_operator(f)
    np.testing.assert_array_equal(op.evaluate(np.zeros((3, 3))), np.zeros(6))
    x, y = rng.standard_normal(3), rng.standard_normal(3)
    via_lift = op.evaluate(np.outer(x, x) - np.outer(y, y))
    sx = SparseVector(Support((1, 2, 6), 10), x)
    sy = SparseVector(Support((1, 2, 6), 10), y)
    direct = reduced_b(real_dft(embed(sx, b))) - reduced_b(real_dft(embed(sy, b)))
    np.testing.assert_allclose(via_lift, direct, atol=1e-10 * np.abs(direct).max())
    # unit symmetric inputs give back the matrix columns
    for k in range(op.lift_dim):
        e = np.zeros(op.lift_dim)
        e[k] = 1
        np.testing.assert_allclose(op.evaluate(symmetric_from_coords(e, 3)), op.matrix[:, k])


def test_operator_argument_checks(rng):
    f = Frame(rng.standard_normal((2, 6)))
    single = build_real_single_operator(f)
    with pytest.raises(ConfigError):
        single.evaluate(np.eye(2), np.eye(2))
    pair = build_real_pair_operator(OverlappingFramePair(f, f, 2))
    with pytest.raises(ConfigError):
        pair.evaluate(np.eye(2))
    with pytest.raises(ConfigError):
        build_real_pair_operator(OverlappingFramePair(f, Frame(rng.standard_normal((3, 6))), 0))
    with pytest.raises(ConfigError):
        build_real_single_operator(Frame(cplx(rng, 2, 6)))


@given(st.integers(1, 4), st.integers(4, 9), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2 ** 16))
def test_operator_linearity(m, n, a, b, seed):
    rng = np.random.default_rng(seed)
    op = build_complex_pair_operator(complex_pair(rng, m, n))
    a1, a2, b1, b2 = (random_hermitian(rng, m) for _ in range(4))
    lhs = op.evaluate(a * a1 + b * a2, a * b1 + b * b2)
    rhs = a * op.evaluate(a1, b1) + b * op.evaluate(a2, b2)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * max(1.0, np.abs(rhs).max()))


# -- violation search --------------------------------------------------------------------

def test_full_support_identity_finds_shift_witness():
    eye = Basis.from_matrix(np.eye(6))
    f = fourier_frame(frame_from_basis(eye, Support(tuple(range(6)), 6)))
    op = build_real_pair_operator(OverlappingFramePair(f, f, 6))
    res = search_rank_constrained_kernel(op, SearchConfig(starts=50, seed=1))
    assert res.verdict == "fail"
    w = res.witness
    assert w.residual < 1e-10 and w.separation > 1e-4
    np.testing.assert_allclose(op.evaluate_rank_one(w.x, w.y), 0, atol=1e-10)


def test_explicit_shift_witness_is_a_zero():
    eye = Basis.from_matrix(np.eye(6))
    f = fourier_frame(frame_from_basis(eye, Support(tuple(range(6)), 6)))
    op = build_real_pair_operator(OverlappingFramePair(f, f, 6))
    x = np.arange(1.0, 7.0)
    y = dihedral_witness(eye, SparseVector(Support(tuple(range(6)), 6), x), ROTATION)
    assert y.support.m == 6
    np.testing.assert_allclose(op.evaluate_rank_one(x, y.coeffs), 0, atol=1e-12)
    gap, sep = verify_witness(eye, SparseVector(Support(tuple(range(6)), 6), x), y)
    assert gap < 1e-10 and sep > 0.1


def test_real_single_generic_m2_n12_passes():
    b = sample_generic_basis(12, seed=8)
    op = build_real_single_operator(fourier_frame(frame_from_basis(b, Support((3, 10), 12))))
    res = search_rank_constrained_kernel(op, SearchConfig(starts=200, seed=2))
    assert res.passed and res.witness is None and res.starts == 200
    assert res.best_residual > 1e-6


def test_complex_scalar_frame_passes(rng):
    alpha = cplx(rng, 1, 6)
    assert len(set(np.round(np.abs(alpha[0]), 12))) == 6
    f = Frame(alpha)
    op = build_complex_pair_operator(OverlappingFramePair(f, f, 1))
    assert search_rank_constrained_kernel(op, SearchConfig(starts=30)).passed


def test_search_never_reports_the_trivial_orbit(rng):
    f = Frame(cplx(rng, 3, 12))
    op = build_complex_pair_operator(OverlappingFramePair(f, f, 3))
    x = cplx(rng, 3)
    init = np.concatenate([x.real, x.imag, (1j * x).real, (1j * x).imag])
    res = search_rank_constrained_kernel(op, SearchConfig(starts=20), init=init)
    assert res.passed


def test_search_verdict_symmetric_under_swap(rng):
    b = sample_generic_basis(8, seed=6)
    pair, _ = real_pair_from_basis(b, Support((0, 1), 8), Support((2, 5), 8))
    cfg = SearchConfig(starts=40, seed=3)
    a = search_rank_constrained_kernel(build_real_pair_operator(pair), cfg)
    c = search_rank_constrained_kernel(build_real_pair_operator(pair.swapped()), cfg)
    assert a.verdict == c.verdict == "presumed-pass"

    eye = Basis.from_matrix(np.eye(8))
    pair, _ = real_pair_from_basis(eye, Support((0, 1, 2), 8), Support((1, 2, 3), 8))
    a = search_rank_constrained_kernel(build_real_pair_operator(pair), cfg)
    c = search_rank_constrained_kernel(build_real_pair_operator(pair.swapped()), cfg)
    assert a.verdict == c.verdict == "fail"


def test_search_is_deterministic(rng):
    op = build_complex_pair_operator(complex_pair(rng, 2, 5))
    a = search_rank_constrained_kernel(op, SearchConfig(starts=15, seed=9))
    b = search_rank_constrained_kernel(op, SearchConfig(starts=15, seed=9))
    assert a.best_residual == b.best_residual and a.verdict == b.verdict


def test_search_needs_a_start(rng):
    op = build_complex_pair_operator(complex_pair(rng, 2, 5))
    with pytest.raises(ConfigError):
        search_rank_constrained_kernel(op, SearchConfig(starts=0))


# -- rank <= 2 kernel probe ----------------------------------------------------------------

@pytest.mark.parametrize("m,n", [(2, 4), (3, 4), (4, 6), (4, 12), (5, 9)])
def test_probe_null_dimension(m, n):
    b = sample_generic_basis(n, seed=m * n)
    op = build_real_single_operator(fourier_frame(frame_from_basis(b, Support(tuple(range(m)), n))))
    report = kernel_low_rank_probe(op, ProbeConfig(starts=3))
    assert report.null_dim == max(0, m * (m + 1) // 2 - (n // 2 + 1))


def test_probe_m2_n12_empty_kernel():
    b = sample_generic_basis(12, seed=0)
    op = build_real_single_operator(fourier_frame(frame_from_basis(b, Support((0, 1), 12))))
    report = kernel_low_rank_probe(op)
    assert report.null_dim == 0 and report.candidate is None


def test_probe_finds_planted_rank_two(rng):
    m, n = 4, 20
    u, v = rng.standard_normal(m), rng.standard_normal(m)
    planted = np.outer(u, u) - np.outer(v, v)
    c = symmetric_coords(planted)
    rows = rng.standard_normal((n // 2 + 1, c.size))
    rows -= np.outer(rows @ c, c) / (c @ c)  # every row annihilates the planted matrix
    op = MeasurementOperator("real-single", n, m, rows)
    report = kernel_low_rank_probe(op, ProbeConfig(starts=5, seed=1))
    assert report.null_dim >= 1
    assert report.min_sigma3 < 1e-8
    ev = np.linalg.eigvalsh(report.candidate)
    assert np.sort(np.abs(ev))[-3] < 1e-8 * np.abs(ev).max()
    np.testing.assert_allclose(op.evaluate(report.candidate), 0, atol=1e-9)


def test_probe_generic_kernel_has_no_rank_two():
    # M=4, N=4: 10 unknowns, 3 equations, kernel of dimension 7 contains rank-2 matrices
    b = sample_generic_basis(4, seed=1)
    op = build_real_single_operator(fourier_frame(frame_from_basis(b, Support(tuple(range(4)), 4))))
    report = kernel_low_rank_probe(op, ProbeConfig(starts=5))
    assert report.null_dim == 7 and report.min_sigma3 < 1e-8


def test_probe_rejects_pair_operators(rng):
    with pytest.raises(ConfigError):
        kernel_low_rank_probe(build_complex_pair_operator(complex_pair(rng, 2, 5)))


# -- basis-level certification -------------------------------------------------------------------

def test_arithmetic_progression_pair_fails():
    eye = Basis.from_matrix(np.eye(8))
    entry = certify_items(eye, [("pair", Support((0, 1, 2), 8), Support((1, 2, 3), 8))])[0]
    assert entry["verdict"] == "fail"
    w = entry["witness"]
    assert w["direct_gap"] < 1e-8 and w["direct_separation"] > 1e-4
    x, y = embed(w["x"], eye), embed(w["y"], eye)
    np.testing.assert_allclose(power_spectrum(x), power_spectrum(y), atol=1e-8 * power_spectrum(x).max())


def test_full_support_identity_certification_fails():
    report = certify_basis(Basis.from_matrix(np.eye(6)), 6, "every")
    assert report.verdict == "fail" and report.single_verdict == "fail"
    assert report.entries[0]["witness"]["residual"] < 1e-10


def test_generic_small_every_mode_passes():
    b = sample_generic_basis(8, seed=12)
    report = certify_basis(b, 2, "every", CertifyConfig(search=SearchConfig(starts=60)))
    assert report.verdict == "presumed-pass"
    assert len(report.entries) == 28 + 378
    assert min(report.best_residuals) > 1e-6


def test_generic_mode_n8_m3_passes():
    report = certify_basis(sample_generic_basis(8, seed=4), 3, "generic", CertifyConfig(trials=10, seed=1))
    assert report.verdict == "presumed-pass"
    assert report.to_dict()["sr1g"] == "presumed-pass"


def test_generic_mode_detects_ambiguity_beyond_half():
    report = certify_basis(sample_generic_basis(8, seed=4), 6, "generic", CertifyConfig(trials=3, seed=1))
    assert report.verdict == "fail"
    for e in report.entries:
        if e["verdict"] == "fail":
            assert e["witness"]["direct_gap"] < 1e-6 and e["witness"]["direct_separation"] > 1e-4


def test_complex_every_mode(rng):
    b = sample_generic_basis(6, "complex", seed=3)
    report = certify_basis(b, 1, "every", CertifyConfig(search=SearchConfig(starts=30)))
    assert report.verdict == "presumed-pass"


def test_report_serializes(rng):
    report = certify_basis(Basis.from_matrix(np.eye(4)), 4, "every", CertifyConfig(search=SearchConfig(starts=10)))
    d = json.loads(json.dumps(report.to_dict()))
    assert d["verdict"] == "fail" and d["sr1"] == "fail"
    assert isinstance(d["entries"][0]["witness"]["x"], list)


def test_certify_caps():
    b = sample_generic_basis(12, seed=0)
    with pytest.raises(GuardError):
        certify_basis(b, 6, "every", CertifyConfig(support_cap=10, allow_sampling=False))
    with pytest.raises(ConfigError):
        certify_basis(b, 13)
    with pytest.raises(ConfigError):
        certify_basis(b, 2, "sometimes")


def test_sampled_supports_respect_cap():
    b = sample_generic_basis(10, seed=0)
    cfg = CertifyConfig(search=SearchConfig(starts=5, max_iter=20), support_cap=6, pair_cap=4)
    report = certify_basis(b, 3, "every", cfg)
    kinds = [e["kind"] for e in report.entries]
    assert kinds.count("single") == 6 and kinds.count("pair") == 4

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from sparsepr.estimators import SparseSpectrumRecovery, SpectrumTransformer
from sparsepr.exceptions import ConfigError
from sparsepr.model import SparseVector, Support, embed, sample_generic_basis
from sparsepr.recover import equivalent_up_to_phase
from sparsepr.signal import measurement, power_spectrum


def test_transformer_params_and_clone():
    t = SpectrumTransformer(kind="b")
    assert t.get_params() == {"kind": "b"}
    c = clone(t)
    assert c.kind == "b" and c is not t


@pytest.mark.parametrize("kind", ["power", "autocorr", "b"])
def test_transformer_rows(kind, rng):
    X = rng.standard_normal((4, 7))
    out = SpectrumTransformer(kind).fit_transform(X)
    np.testing.assert_allclose(out, np.stack([measurement(r, kind) for r in X]))


def test_transformer_complex_and_errors(rng):
    Z = rng.standard_normal((2, 5)) + 1j * rng.standard_normal((2, 5))
    np.testing.assert_allclose(SpectrumTransformer().fit(Z).transform(Z)[1], power_spectrum(Z[1]))
    t = SpectrumTransformer().fit(np.ones((1, 5)))
    with pytest.raises(ConfigError):
        t.transform(np.ones((1, 6)))
    with pytest.raises(ConfigError):
        SpectrumTransformer("phase").fit(np.ones((1, 5)))
    with pytest.raises(ConfigError):
        SpectrumTransformer().fit([[np.nan, 1.0]])


def test_recovery_params_and_validation():
    basis = sample_generic_basis(8, seed=0)
    est = SparseSpectrumRecovery(basis=basis, m=2, seed=3)
    assert est.get_params()["m"] == 2
    assert clone(est).get_params()["seed"] == 3
    with pytest.raises(ConfigError):
        SparseSpectrumRecovery().fit()
    with pytest.raises(ConfigError):
        SparseSpectrumRecovery(basis=basis, m=9).fit()
    with pytest.raises(ConfigError):
        SparseSpectrumRecovery(basis=sample_generic_basis(8, "complex", seed=0), m=2).fit()


def test_pipeline_round_trip(rng):
    basis = sample_generic_basis(10, seed=4)
    signals = np.stack([embed(SparseVector(Support.of(rng.choice(10, 3, replace=False), 10),
                                           rng.standard_normal(3)), basis) for _ in range(3)])
    pipe = make_pipeline(SpectrumTransformer("b"), SparseSpectrumRecovery(basis=basis.matrix, m=3))
    pipe.fit(signals)
    out = pipe.predict(signals)
    for x, y in zip(signals, out):
        assert equivalent_up_to_phase(x, y, 1e-6)


def test_fixed_support_recovery(rng):
    basis = sample_generic_basis(8, "complex", seed=2)
    s = Support((1, 5), 8)
    x = embed(SparseVector(s, rng.standard_normal(2) + 1j * rng.standard_normal(2)), basis)
    est = SparseSpectrumRecovery(basis=basis, m=2, field="complex", support=[1, 5]).fit()
    res = est.recover(power_spectrum(x))
    assert res.support == s and res.converged
    assert equivalent_up_to_phase(x, est.predict(power_spectrum(x))[0], 1e-6)

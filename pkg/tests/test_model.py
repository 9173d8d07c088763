import numpy as np
import pytest

from dper import (
    DataError,
    EstimationResult,
    LabeledDataset,
    MaskedMatrix,
    REGIME_SINGLE,
    validate,
)


def test_from_values_maps_nan_to_mask():
    m = MaskedMatrix.from_values([[1.0, np.nan], [2.0, 3.0]])
    assert m.n == 2 and m.p == 2
    assert m.mask.tolist() == [[True, False], [True, True]]
    assert np.isnan(m.values[0, 1])
    assert m.n_missing == 1


def test_observed_cells_must_be_finite():
    with pytest.raises(DataError):
        MaskedMatrix(values=np.array([[np.inf, 1.0]]), mask=np.array([[True, True]]))


def test_masked_cells_may_hold_garbage():
    m = MaskedMatrix(values=np.array([[np.inf, 1.0]]), mask=np.array([[False, True]]))
    assert np.isnan(m.values[0, 0])


def test_shape_validation():
    with pytest.raises(DataError):
        MaskedMatrix(values=np.zeros((2, 2)), mask=np.zeros((2, 3), dtype=bool))
    with pytest.raises(DataError):
        MaskedMatrix(values=np.zeros((0, 2)), mask=np.zeros((0, 2), dtype=bool))


def test_arrays_are_immutable():
    m = MaskedMatrix.from_values([[1.0, 2.0]])
    with pytest.raises(ValueError):
        m.values[0, 0] = 9.0
    with pytest.raises(ValueError):
        m.mask[0, 0] = False


def test_constructor_does_not_alias_caller_arrays():
    vals = np.array([[1.0, 2.0]])
    m = MaskedMatrix.from_values(vals)
    vals[0, 0] = 99.0
    assert m.values[0, 0] == 1.0


def test_validate_flags_constant_column():
    m = MaskedMatrix.from_values([[1.0, 5.0], [1.0, 6.0], [1.0, 7.0]])
    diags = validate(m)
    assert diags[0].constant and not diags[0].fully_missing
    assert not diags[1].constant


def test_validate_flags_fully_missing_column():
    m = MaskedMatrix(
        values=np.array([[1.0, 0.0], [2.0, 0.0]]),
        mask=np.array([[True, False], [True, False]]),
    )
    diags = validate(m)
    assert diags[1].fully_missing
    assert diags[1].observed == 0


def test_validate_clean_matrix_has_no_flags():
    m = MaskedMatrix.from_values(np.arange(12, dtype=float).reshape(4, 3) ** 1.5)
    assert all(not d.constant and not d.fully_missing for d in validate(m))


def test_labels_must_cover_every_class():
    data = MaskedMatrix.from_values(np.ones((3, 2)))
    with pytest.raises(DataError):
        LabeledDataset(data=data, labels=np.array([0, 0, 2]), n_classes=3)
    ds = LabeledDataset(data=data, labels=np.array([0, 1, 1]), n_classes=2)
    assert ds.class_counts.tolist() == [1, 2]


def test_estimation_result_enforces_symmetry_and_diagonal():
    means = np.zeros((1, 2))
    asym = np.array([[1.0, 0.5], [0.4, 1.0]])
    with pytest.raises(DataError):
        EstimationResult(regime=REGIME_SINGLE, means=means, covariances=(asym,))
    neg = np.array([[-1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(DataError):
        EstimationResult(regime=REGIME_SINGLE, means=means, covariances=(neg,))
    ok = EstimationResult(
        regime=REGIME_SINGLE, means=means, covariances=(np.eye(2),)
    )
    assert ok.covariance[0, 1] == ok.covariance[1, 0]

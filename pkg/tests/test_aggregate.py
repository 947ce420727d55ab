import numpy as np
import pytest

from uncerseg import (
    BBox,
    BackendError,
    DomainError,
    OracleSegmenter,
    ProbMask,
    PromptSet,
    aggregate,
    ugmp,
)
from uncerseg.segmenter import Segmenter


class FixedSegmenter(Segmenter):
    """Returns a constant mask; optionally fails on chosen call indices."""

    def __init__(self, values, fail_at=()):
        self._values = np.asarray(values, dtype=np.float64)
        self._fail_at = set(fail_at)
        self.calls = 0

    def segment_one(self, image, box, points):
        i = self.calls
        self.calls += 1
        if i in self._fail_at:
            raise BackendError(f"injected failure on call {i}")
        return ProbMask(self._values)


class TestAggregate:
    def test_single_mask_passthrough(self):
        m = ProbMask(np.array([[0.25, 0.75]]))
        out = aggregate([m])
        np.testing.assert_array_equal(out.values, m.values)

    def test_elementwise_mean(self):
        a = ProbMask(np.array([[0.0, 1.0]]))
        b = ProbMask(np.array([[0.5, 0.5]]))
        out = aggregate([a, b])
        np.testing.assert_allclose(out.values, [[0.25, 0.75]], atol=1e-15)

    def test_mean_of_ones_stays_valid(self):
        ones = ProbMask(np.ones((3, 3)))
        out = aggregate([ones] * 7)
        assert float(out.values.max()) <= 1.0

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            aggregate([])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(DomainError):
            aggregate([ProbMask(np.zeros((2, 2))), ProbMask(np.zeros((2, 3)))])


class TestUgmp:
    def test_oracle_run_shapes_and_scalar(self, gt4, img4, box_left):
        backend = OracleSegmenter(gt4)
        ps = PromptSet(boxes=(box_left, BBox(0, 0, 2, 4), BBox(0, 0, 4, 4)))
        res = ugmp(img4, ps, backend)
        assert len(res.per_box_masks) == 3
        assert res.mean_mask.width == 4
        assert res.uncertainty.width == 4
        assert res.scalar_u == pytest.approx(float(res.uncertainty.values.mean()),
                                             abs=1e-15)

    def test_identical_boxes_give_zero_disagreement_on_plateau(self, gt4, img4):
        # all boxes equal: the mean equals one mask, entropy reflects it
        backend = OracleSegmenter(gt4)
        b = BBox(0, 0, 4, 4)
        res = ugmp(img4, PromptSet(boxes=(b, b)), backend)
        one = backend.segment_one(img4, b, ())
        np.testing.assert_array_equal(res.mean_mask.values, one.values)

    def test_backend_failure_carries_box_index(self, img4):
        backend = FixedSegmenter(np.full((4, 4), 0.5), fail_at=(1,))
        ps = PromptSet(boxes=(BBox(0, 0, 1, 1), BBox(1, 1, 2, 2)))
        with pytest.raises(BackendError, match="box index 1"):
            ugmp(img4, ps, backend)

    def test_calls_once_per_box(self, img4):
        backend = FixedSegmenter(np.full((4, 4), 0.5))
        ps = PromptSet(boxes=tuple(BBox(0, 0, i + 1, 4) for i in range(4)))
        ugmp(img4, ps, backend)
        assert backend.calls == 4

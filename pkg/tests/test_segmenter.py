import numpy as np
import pytest

from uncerseg import (
    BBox,
    BinaryMask,
    DomainError,
    ImageRaster,
    OracleParams,
    OracleSegmenter,
    PointPrompt,
    RefineConfig,
    dice,
    medsam_u,
    oracle_segment,
    threshold_mask,
)
from uncerseg.prompts import degraded_box, tight_bbox


class TestOracleValues:
    def test_four_regimes(self, gt4, box_left):
        m = oracle_segment(gt4, box_left, ())
        # inside box on fg, outside box on fg, inside nothing, outside on bg
        assert m.values[0, 0] == pytest.approx(0.9, abs=1e-15)
        assert m.values[0, 1] == pytest.approx(0.09, abs=1e-15)
        assert m.values[0, 2] == pytest.approx(0.015, abs=1e-15)
        assert m.values[0, 3] == pytest.approx(0.015, abs=1e-15)

    def test_background_inside_box(self, gt4):
        wide = BBox(0, 0, 4, 4)
        m = oracle_segment(gt4, wide, ())
        assert m.values[0, 2] == pytest.approx(0.15, abs=1e-15)

    def test_box_containment_is_closed_on_pixel_centers(self, gt4):
        # box edge exactly on the center of pixel column 1
        b = BBox(0.0, 0.0, 1.5, 4.0)
        m = oracle_segment(gt4, b, ())
        assert m.values[0, 1] == pytest.approx(0.9, abs=1e-15)

    def test_full_box_on_all_foreground_is_constant(self):
        gt = BinaryMask(np.ones((4, 4), dtype=np.uint8))
        m = oracle_segment(gt, BBox(0, 0, 4, 4), ())
        np.testing.assert_allclose(m.values, 0.9, atol=1e-15)

    def test_disjoint_box(self, gt4):
        # box far from the target: fg attenuates to 0.09, bg to 0.015
        b = BBox(2.5, 0.0, 4.0, 4.0)
        m = oracle_segment(gt4, b, ())
        assert m.values[0, 0] == pytest.approx(0.09, abs=1e-15)
        assert m.values[0, 1] == pytest.approx(0.09, abs=1e-15)

    def test_point_at_distance_zero_outside_box(self, gt4):
        # boosted fg pixel outside the box: 0.09 + 0.6 = 0.69
        b = BBox(2.5, 0.0, 4.0, 4.0)
        m = oracle_segment(gt4, b, (PointPrompt(0.5, 0.5, "positive"),))
        assert m.values[0, 0] == pytest.approx(0.69, abs=1e-15)


class TestPointBoost:
    def test_positive_point_lifts_foreground(self, gt4, box_left):
        pt = PointPrompt(1.5, 0.5, "positive")
        base = oracle_segment(gt4, box_left, ())
        boosted = oracle_segment(gt4, box_left, (pt,))
        assert boosted.values[0, 1] > base.values[0, 1]

    def test_boost_is_gated_by_ground_truth(self, gt4, box_left):
        # a positive point cannot lift background pixels
        pt = PointPrompt(2.5, 0.5, "positive")
        base = oracle_segment(gt4, box_left, ())
        out = oracle_segment(gt4, box_left, (pt,))
        assert out.values[0, 2] == base.values[0, 2]
        assert out.values[0, 3] == base.values[0, 3]

    def test_negative_points_ignored(self, gt4, box_left):
        pt = PointPrompt(0.5, 0.5, "negative")
        base = oracle_segment(gt4, box_left, ())
        out = oracle_segment(gt4, box_left, (pt,))
        np.testing.assert_array_equal(out.values, base.values)

    def test_probabilities_stay_clamped(self):
        gt = BinaryMask(np.ones((8, 8), dtype=np.uint8))
        pts = tuple(PointPrompt(4.5, 4.5, "positive") for _ in range(5))
        m = oracle_segment(gt, BBox(0, 0, 8, 8), pts)
        assert float(m.values.max()) <= 1.0
        assert m.values[4, 4] == 1.0

    def test_boost_decays_with_distance(self):
        gt = BinaryMask(np.ones((32, 32), dtype=np.uint8))
        # e_out keeps values off the clamp so the decay is visible
        m = oracle_segment(gt, BBox(0, 0, 1, 1), (PointPrompt(16.5, 16.5, "positive"),))
        assert m.values[16, 16] > m.values[16, 20] > m.values[16, 28]


class TestValidation:
    def test_params_constraints(self):
        with pytest.raises(DomainError):
            OracleParams(a1=0.4)
        with pytest.raises(DomainError):
            OracleParams(a0=0.6)
        with pytest.raises(DomainError):
            OracleParams(a1=0.9, e_out=0.6)
        with pytest.raises(DomainError):
            OracleParams(rho_frac=0.0)

    def test_prompts_must_fit_image(self, gt4):
        with pytest.raises(DomainError):
            oracle_segment(gt4, BBox(0, 0, 5, 4), ())
        with pytest.raises(DomainError):
            oracle_segment(gt4, BBox(0, 0, 1, 4), (PointPrompt(9.0, 0.5, "positive"),))

    def test_image_dims_must_match_gt(self, gt4, box_left):
        seg = OracleSegmenter(gt4)
        wrong = ImageRaster(np.zeros((5, 5), dtype=np.uint8))
        with pytest.raises(DomainError):
            seg.segment_one(wrong, box_left, ())

    def test_image_is_optional(self, gt4, box_left):
        seg = OracleSegmenter(gt4)
        m = seg.segment_one(None, box_left, ())
        assert m.width == 4


class TestBehaviorUnderDegradation:
    def test_mean_dice_rises_with_box_quality(self, tiny_corpus):
        _, dataset = tiny_corpus
        cfg = RefineConfig(seed=0)
        means = []
        for ratio in (0.3, 0.5, 0.7, 0.9, 1.0):
            scores = []
            for entry in dataset.entries:
                gt_box = tight_bbox(entry.mask)
                bounds = (entry.mask.width, entry.mask.height)
                b = degraded_box(gt_box, ratio, 17, bounds)
                m = oracle_segment(entry.mask, b, ())
                scores.append(dice(threshold_mask(m, cfg.binarize_threshold),
                                   entry.mask))
            means.append(float(np.mean(scores)))
        assert all(b >= a for a, b in zip(means, means[1:]))
        assert means[-1] > 0.95

import numpy as np
import pytest

from tissuemask import evaluation as ev
from tissuemask import preprocess as pp
from tissuemask.errors import DimensionMismatchError, InvalidParamError


class TestFitWithin:
    def test_exact_halving(self):
        img = np.zeros((1024, 2048, 3), dtype=np.uint8)
        assert pp.fit_within(img).shape == (512, 1024, 3)

    def test_no_upscaling(self):
        img = np.zeros((600, 800, 3), dtype=np.uint8)
        out = pp.fit_within(img)
        assert out.shape == (600, 800, 3)

    def test_rounding(self):
        img = np.zeros((1500, 3000), dtype=np.uint8)
        assert pp.fit_within(img).shape == (512, 1024)

    def test_mask_stays_binary(self):
        rng = np.random.RandomState(0)
        mask = (rng.rand(2000, 1600) < 0.5).astype(np.uint8)
        out = pp.fit_within(mask)
        assert set(np.unique(out).tolist()) <= {0, 1}

    def test_never_increases_dims(self):
        for shape in [(10, 10), (1024, 1024), (1025, 100), (5000, 3)]:
            out = pp.fit_within(np.zeros(shape, dtype=np.uint8))
            assert out.shape[0] <= 1024 and out.shape[1] <= 1024


class TestPad:
    def test_mask_pad_bottom(self):
        mask = np.ones((512, 1024), dtype=np.uint8)
        out, rec = pp.pad_to_square(mask)
        assert out.shape == (1024, 1024)
        assert out[512:].sum() == 0
        assert rec.pad_bottom == 512 and rec.pad_right == 0

    def test_identity(self):
        img = np.zeros((1024, 1024, 3), dtype=np.uint8)
        out, rec = pp.pad_to_square(img)
        assert rec.pad_right == 0 and rec.pad_bottom == 0
        assert np.array_equal(out, img)

    def test_rgb_pads_white(self):
        img = np.zeros((10, 10, 3), dtype=np.uint8)
        out, _ = pp.pad_to_square(img, size=20)
        assert (out[15, 15] == 255).all()

    def test_too_large_rejected(self):
        with pytest.raises(InvalidParamError):
            pp.pad_to_square(np.zeros((30, 10), dtype=np.uint8), size=20)

    def test_round_trip(self):
        rng = np.random.RandomState(1)
        for _ in range(5):
            h, w = rng.randint(1, 50, size=2)
            img = rng.randint(0, 256, size=(h, w, 3)).astype(np.uint8)
            out, rec = pp.pad_to_square(img, size=50)
            assert np.array_equal(pp.unpad(out, rec), img)

    def test_normalize_records_scale(self):
        img = np.zeros((2048, 1024, 3), dtype=np.uint8)
        out, rec = pp.normalize(img)
        assert out.shape == (1024, 1024, 3)
        assert rec.original_height == 2048
        assert rec.scaled_height == 1024
        assert rec.scale == pytest.approx(0.5)


class TestRefineDilate:
    def test_single_pixel(self):
        m = np.zeros((5, 5), dtype=np.uint8)
        m[2, 2] = 1
        assert pp.refine_dilate(m).sum() == 9

    def test_all_zero(self):
        assert pp.refine_dilate(np.zeros((4, 4), dtype=np.uint8)).sum() == 0

    def test_extensive(self):
        rng = np.random.RandomState(2)
        m = (rng.rand(16, 16) < 0.3).astype(np.uint8)
        assert (pp.refine_dilate(m) >= m).all()


class TestProjection:
    def test_identity(self):
        m = np.eye(4, dtype=np.uint8)
        assert np.array_equal(pp.project_to_magnification(m, 1), m)

    def test_checkerboard(self):
        m = np.array([[1, 0], [0, 1]], dtype=np.uint8)
        out = pp.project_to_magnification(m, 2)
        assert out.shape == (4, 4)
        assert out[:2, :2].sum() == 4 and out[:2, 2:].sum() == 0

    def test_area_scales_squared(self):
        rng = np.random.RandomState(3)
        m = (rng.rand(8, 8) < 0.5).astype(np.uint8)
        for k in (2, 3, 5):
            assert pp.project_to_magnification(m, k).sum() == m.sum() * k * k


class TestAugment:
    def _pair(self, n=16):
        rng = np.random.RandomState(4)
        img = rng.randint(0, 256, size=(n, n, 3)).astype(np.uint8)
        mask = (rng.rand(n, n) < 0.5).astype(np.uint8)
        return img, mask

    def test_identity_spec(self):
        img, mask = self._pair()
        out_img, out_mask = pp.augment_pair(img, mask, pp.AugmentSpec())
        assert np.array_equal(out_img, img)
        assert np.array_equal(out_mask, mask)

    def test_hflip_involution(self):
        img, mask = self._pair()
        spec = pp.AugmentSpec(hflip=True)
        a_img, a_mask = pp.augment_pair(img, mask, spec)
        b_img, b_mask = pp.augment_pair(a_img, a_mask, spec)
        assert np.array_equal(b_img, img)
        assert np.array_equal(b_mask, mask)

    def test_rot90_exact_permutation(self):
        img, mask = self._pair()
        spec = pp.AugmentSpec(rotation_degrees=90.0)
        out_img, out_mask = pp.augment_pair(img, mask, spec)
        assert out_mask.sum() == mask.sum()
        assert np.array_equal(out_img, np.rot90(img))

    def test_confusion_invariant_under_joint_transform(self):
        rng = np.random.RandomState(5)
        pred = (rng.rand(32, 32) < 0.5).astype(np.uint8)
        gt = (rng.rand(32, 32) < 0.5).astype(np.uint8)
        base = ev.confusion(pred, gt)
        for spec in [
            pp.AugmentSpec(hflip=True),
            pp.AugmentSpec(vflip=True),
            pp.AugmentSpec(rotation_degrees=90.0),
            pp.AugmentSpec(rotation_degrees=180.0),
            pp.AugmentSpec(rotation_degrees=-90.0, hflip=True, vflip=True),
        ]:
            img = np.zeros((32, 32, 3), dtype=np.uint8)
            _, p2 = pp.augment_pair(img, pred, spec)
            _, g2 = pp.augment_pair(img, gt, spec)
            assert ev.confusion(p2, g2) == base

    def test_arbitrary_rotation_binary_and_sized(self):
        img, mask = self._pair(20)
        spec = pp.AugmentSpec(rotation_degrees=33.5)
        out_img, out_mask = pp.augment_pair(img, mask, spec)
        assert out_img.shape == img.shape
        assert set(np.unique(out_mask).tolist()) <= {0, 1}

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            pp.augment_pair(
                np.zeros((4, 4, 3), dtype=np.uint8),
                np.zeros((5, 5), dtype=np.uint8),
                pp.AugmentSpec(),
            )

    def test_rotation_range_validated(self):
        with pytest.raises(InvalidParamError):
            pp.AugmentSpec(rotation_degrees=181.0)

    def test_seeded_spec_deterministic(self):
        a = pp.random_augment_spec(42)
        b = pp.random_augment_spec(42)
        assert a == b
        assert -180.0 <= a.rotation_degrees <= 180.0
        assert a != pp.random_augment_spec(43)

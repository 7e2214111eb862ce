import numpy as np
import pytest

from tissuemask import evaluation as ev
from tissuemask import methods as me
from tissuemask import phantom as ph
from tissuemask.errors import InvalidParamError


def jaccard(pred, gt):
    m = ev.metrics(ev.confusion(pred, gt))
    return 0.0 if m.jaccard is None else m.jaccard


def uniform_white():
    return np.full((64, 64, 3), 255, dtype=np.uint8)


class TestParams:
    def test_handcrafted_validation(self):
        with pytest.raises(InvalidParamError):
            me.HandcraftedParams(ratio_threshold=0.0)
        with pytest.raises(InvalidParamError):
            me.HandcraftedParams(h_lower_thresh=100, h_upper_thresh=10)
        with pytest.raises(InvalidParamError):
            me.HandcraftedParams(binarization="magic")
        me.HandcraftedParams(binarization=128)

    def test_fesi_validation(self):
        with pytest.raises(InvalidParamError):
            me.FesiParams(sigma=0)

    def test_spec_mismatch(self):
        with pytest.raises(InvalidParamError):
            me.MethodSpec("otsu", me.FesiParams())
        with pytest.raises(InvalidParamError):
            me.MethodSpec("nonsense")

    def test_make_spec_unknown_param(self):
        with pytest.raises(InvalidParamError, match="bogus"):
            me.make_spec("fesi", {"bogus": "1"})

    def test_make_spec_coercion(self):
        spec = me.make_spec("fesi", {"sigma": "2.5", "min_region_area": "10"})
        assert spec.params.sigma == 2.5
        assert spec.params.min_region_area == 10


class TestHandcrafted:
    def test_uniform_white_gives_empty(self):
        assert me.handcrafted_mask(uniform_white()).sum() == 0

    def test_single_blob_exact(self):
        rgb, gt = ph.make_phantom(ph.PhantomSpec(
            width=128, height=128, blobs=[ph.Rect(20, 20, 90, 90)]))
        assert np.array_equal(me.handcrafted_mask(rgb), gt)

    def test_hole_in_window_reblackened(self):
        rgb, _ = ph.make_phantom(ph.PhantomSpec(
            width=200, height=200,
            blobs=[ph.Rect(20, 20, 180, 180)],
            holes=[ph.Rect(80, 80, 120, 120)]))  # 1600 px in (9, 2500)
        mask = me.handcrafted_mask(rgb)
        assert mask[80:120, 80:120].sum() == 0
        assert mask[30, 30] == 1

    def test_tiny_hole_filled_as_tissue(self):
        rgb, _ = ph.make_phantom(ph.PhantomSpec(
            width=128, height=128,
            blobs=[ph.Rect(20, 20, 100, 100)],
            holes=[ph.Rect(50, 50, 52, 52)]))  # 4 px < h_lower_thresh 9
        mask = me.handcrafted_mask(rgb)
        assert mask[50:52, 50:52].sum() == 4

    def test_hole_above_window_untouched(self):
        p = me.HandcraftedParams(h_upper_thresh=900)
        rgb, _ = ph.make_phantom(ph.PhantomSpec(
            width=200, height=200,
            blobs=[ph.Rect(10, 10, 190, 190)],
            holes=[ph.Rect(60, 60, 100, 100)]))  # 1600 px > 900
        mask = me.handcrafted_mask(rgb, p)
        # outside the window the hole keeps step-7 fill (tissue)
        assert mask[60:100, 60:100].all()

    def test_parents_exclude_switch(self):
        rgb, gt = ph.make_phantom(ph.PhantomSpec(
            width=128, height=128, blobs=[ph.Rect(20, 20, 90, 90)]))
        p = me.HandcraftedParams(parents="exclude")
        mask = me.handcrafted_mask(rgb, p)
        # no depth-1 children exist, so nothing gets chosen
        assert mask.sum() == 0

    def test_fixed_binarization(self):
        rgb, gt = ph.make_phantom(ph.PhantomSpec(
            width=128, height=128, blobs=[ph.Rect(20, 20, 90, 90)]))
        p = me.HandcraftedParams(binarization=128)
        assert np.array_equal(me.handcrafted_mask(rgb, p), gt)

    def test_satellite_attached_by_distance(self):
        # two holes inside a full-frame blob act as depth-1 children;
        # with parents excluded, the satellite (3600 px) fails the area
        # ratio gate but sits 10 px from the chosen big hole, so the
        # distance step picks it up
        rgb, _ = ph.make_phantom(ph.PhantomSpec(
            width=400, height=400, blobs=[ph.Rect(0, 0, 400, 400)],
            holes=[ph.Rect(50, 50, 250, 250), ph.Rect(50, 260, 110, 320)]))
        p = me.HandcraftedParams(
            parents="exclude", dist_threshold=50,
            ratio_threshold=0.5, area_threshold=5000.0,
            h_upper_thresh=3000.0)
        mask = me.handcrafted_mask(rgb, p)
        assert mask[150, 150] == 1  # big hole chosen as children[0]
        assert mask[80, 290] == 1  # satellite chosen by proximity
        # same params but satellite far away: area gate and distance
        # both fail, so it stays unchosen
        rgb2, _ = ph.make_phantom(ph.PhantomSpec(
            width=400, height=400, blobs=[ph.Rect(0, 0, 400, 400)],
            holes=[ph.Rect(50, 50, 250, 250), ph.Rect(50, 330, 110, 390)]))
        mask2 = me.handcrafted_mask(rgb2, p)
        assert mask2[80, 360] == 0

    def test_chosen_hole_still_subject_to_hole_filter(self):
        # the step-8 hole filter runs over the inverted image regardless
        # of which contours were chosen: a chosen satellite inside the
        # filter window gets re-blackened
        rgb, _ = ph.make_phantom(ph.PhantomSpec(
            width=300, height=300, blobs=[ph.Rect(0, 0, 300, 300)],
            holes=[ph.Rect(50, 50, 150, 150), ph.Rect(50, 160, 60, 170)]))
        p = me.HandcraftedParams(parents="exclude", dist_threshold=50)
        mask = me.handcrafted_mask(rgb, p)
        assert mask[100, 100] == 1  # 10000 px hole escapes the filter
        assert mask[55, 165] == 0  # 100 px in (9, 2500) -> re-blackened


class TestOtsuMask:
    def test_uniform_gives_empty(self):
        assert me.otsu_mask(uniform_white()).sum() == 0

    def test_dark_disc_on_white(self):
        rgb = np.full((64, 64, 3), 250, dtype=np.uint8)
        yy, xx = np.mgrid[:64, :64]
        disc = (yy - 32) ** 2 + (xx - 32) ** 2 <= 15**2
        rgb[disc] = 40
        mask = me.otsu_mask(rgb)
        assert np.array_equal(mask.astype(bool), disc)


class TestFesi:
    def test_uniform_white_gives_empty(self):
        assert me.fesi_mask(uniform_white()).sum() == 0

    def test_pink_blob_recovered(self):
        rgb = np.full((128, 128, 3), 255, dtype=np.uint8)
        rgb[30:100, 30:100] = (200, 120, 150)
        gt = np.zeros((128, 128), dtype=np.uint8)
        gt[30:100, 30:100] = 1
        assert jaccard(me.fesi_mask(rgb), gt) >= 0.9

    def test_min_region_filter(self):
        rgb, _ = ph.make_phantom(ph.PhantomSpec(
            width=128, height=128, blobs=[ph.Rect(20, 20, 90, 90)],
            specks=[ph.Rect(110, 110, 113, 113)]))
        mask = me.fesi_mask(rgb)
        assert mask[108:116, 108:116].sum() == 0


class TestTissueLoc:
    def test_uniform_gives_empty(self):
        assert me.tissueloc_mask(uniform_white()).sum() == 0

    def test_speck_removed_blob_kept(self):
        rgb, _ = ph.make_phantom(ph.PhantomSpec(
            width=200, height=200, blobs=[ph.Rect(20, 20, 120, 120)],
            specks=[ph.Rect(160, 160, 165, 165)]))  # 25 px < 50
        mask = me.tissueloc_mask(rgb)
        from tissuemask.imaging import connected_components

        _, areas = connected_components(mask, 8)
        assert len(areas) == 1
        assert mask[155:170, 155:170].sum() == 0


class TestHistomics:
    def test_uniform_gives_empty(self):
        assert me.histomics_like_mask(uniform_white()).sum() == 0

    def test_specks_removed(self):
        rgb, _ = ph.make_phantom(ph.PhantomSpec(
            width=200, height=200, blobs=[ph.Rect(20, 20, 140, 140)],
            specks=[ph.Rect(170, 170, 175, 175)]))
        mask = me.histomics_like_mask(rgb)
        assert mask[165:180, 165:180].sum() == 0
        assert mask[80, 80] == 1

    def test_multi_step_restriction_shrinks(self):
        rgb, gt = ph.single_blob_phantom(128, 30)
        one = me.histomics_like_mask(rgb, me.HistomicsParams(thresholding_steps=1))
        two = me.histomics_like_mask(rgb, me.HistomicsParams(thresholding_steps=2))
        assert (two <= one).all()  # later rounds only restrict
        assert two.sum() > 0


class TestSegmentDispatch:
    def test_uniform_otsu(self):
        result = me.segment(uniform_white(), me.make_spec("otsu"))
        assert result.mask.sum() == 0
        assert result.elapsed_seconds >= 0

    def test_determinism(self):
        rgb, _ = ph.single_blob_phantom(128, 30)
        for name in me.METHOD_IDS:
            a = me.segment(rgb, me.make_spec(name)).mask
            b = me.segment(rgb, me.make_spec(name)).mask
            assert np.array_equal(a, b)

    def test_output_dims(self):
        rgb, _ = ph.make_phantom(ph.PhantomSpec(
            width=90, height=50, blobs=[ph.Rect(10, 10, 40, 80)]))
        for name in me.METHOD_IDS:
            assert me.segment(rgb, me.make_spec(name)).mask.shape == (50, 90)

    def test_mismatched_params_rejected(self):
        spec = me.make_spec("fesi")
        spec.params = me.TissueLocParams()
        with pytest.raises(InvalidParamError):
            me.segment(uniform_white(), spec)

    def test_size_filter_monotone(self):
        rgb, _ = ph.make_phantom(ph.PhantomSpec(
            width=128, height=128, blobs=[ph.Rect(20, 20, 60, 60)],
            specks=[ph.Rect(100, 100, 106, 106)]))
        prev = None
        for min_size in (0, 40, 200, 2000):
            mask = me.tissueloc_mask(rgb, me.TissueLocParams(min_tissue_size=min_size))
            if prev is not None:
                assert (mask <= prev).all()
            prev = mask

    def test_all_methods_on_noise_free_blob(self):
        rgb, gt = ph.single_blob_phantom(256, 60)
        for name in me.METHOD_IDS:
            mask = me.segment(rgb, me.make_spec(name)).mask
            assert jaccard(mask, gt) >= 0.98, name

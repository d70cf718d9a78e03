from __future__ import annotations

import numpy as np
import pytest

from cardimages import make_document_image
from fieldpad_extractor import (
    AUG_TAGS,
    ExtractorError,
    augment,
    brightness,
    contrast,
    hflip,
    rotate,
    saturation,
)


@pytest.fixture
def card():
    return make_document_image(np.random.default_rng(3))


class TestVariantSet:
    def test_exactly_four_tagged_variants(self, card):
        variants = augment(card)
        assert tuple(variants) == AUG_TAGS
        assert len(variants) == 4
        for image in variants.values():
            assert image.shape == card.shape
            assert image.dtype == np.uint8

    def test_identity_is_bitwise_copy(self, card):
        variants = augment(card)
        assert np.array_equal(variants[None], card)
        assert variants[None] is not card  # private copy

    def test_deterministic(self, card):
        first = augment(card)
        second = augment(card)
        for tag in AUG_TAGS:
            assert np.array_equal(first[tag], second[tag])

    def test_variants_differ_from_original(self, card):
        variants = augment(card)
        for tag in AUG_TAGS[1:]:
            assert not np.array_equal(variants[tag], card), tag


class TestFlipContrast:
    def test_flip_is_involution(self, card):
        assert np.array_equal(hflip(hflip(card)), card)

    def test_flipping_the_variant_recovers_contrast_only(self, card):
        # variant = contrast(flip(x)); contrast is pixelwise with an
        # order-independent gray mean, so flip(variant) == contrast(x)
        variant = augment(card)["hflip_contrast"]
        assert np.array_equal(hflip(variant), contrast(card))


class TestPhotometric:
    def test_brightness_scales(self):
        image = np.full((10, 10, 3), 100, dtype=np.uint8)
        assert np.all(brightness(image) == 120)

    def test_brightness_saturates(self):
        image = np.full((10, 10, 3), 250, dtype=np.uint8)
        assert np.all(brightness(image) == 255)

    def test_contrast_fixes_gray_mean(self):
        # a uniform image equals its own gray mean: contrast is identity
        image = np.full((10, 10, 3), 77, dtype=np.uint8)
        assert np.array_equal(contrast(image), image)

    def test_contrast_spreads(self):
        image = np.zeros((2, 2, 3), dtype=np.uint8)
        image[0] = 40
        image[1] = 80  # mean 60
        out = contrast(image)
        assert np.all(out[0] == 36)  # 60 + 1.2*(40-60)
        assert np.all(out[1] == 84)

    def test_saturation_keeps_gray_pixels(self):
        image = np.full((6, 6, 3), 90, dtype=np.uint8)  # chroma-free
        assert np.array_equal(saturation(image), image)

    def test_saturation_amplifies_chroma(self):
        image = np.zeros((1, 1, 3), dtype=np.uint8)
        image[0, 0] = (200, 50, 50)  # red-ish
        out = saturation(image)[0, 0].astype(int)
        luma = 0.299 * 200 + 0.587 * 50 + 0.114 * 50
        assert out[0] == round(luma + 1.3 * (200 - luma))
        assert out[1] == round(luma + 1.3 * (50 - luma))


class TestRotate:
    def test_shape_and_dtype_preserved(self, card):
        out = rotate(card, 10.0)
        assert out.shape == card.shape
        assert out.dtype == np.uint8

    def test_zero_rotation_is_identity(self, card):
        assert np.array_equal(rotate(card, 0.0), card)

    def test_rotation_moves_content(self, card):
        assert not np.array_equal(rotate(card, 10.0), card)


class TestValidation:
    def test_rejects_float_input(self):
        with pytest.raises(ExtractorError):
            augment(np.zeros((8, 8, 3), dtype=np.float32))

    def test_rejects_gray_input(self):
        with pytest.raises(ExtractorError):
            augment(np.zeros((8, 8), dtype=np.uint8))

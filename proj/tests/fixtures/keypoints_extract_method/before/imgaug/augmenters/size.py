"""Augmenters that somehow change the size of the images."""
from __future__ import print_function, division, absolute_import

import numpy as np

from . import meta
import imgaug as ia


class CropAndPad(meta.Augmenter):
    """Crop/pad images by pixel amounts or fractions of image sizes."""

    def __init__(self, px=None, percent=None, pad_mode="constant", pad_cval=0,
                 keep_size=True, sample_independently=True,
                 name=None, deterministic=False, random_state=None):
        super(CropAndPad, self).__init__(
            name=name, deterministic=deterministic, random_state=random_state)
        self.mode, self.all_sides, self.top, self.right, self.bottom, \
            self.left = self._handle_px_and_percent_args(px, percent)
        self.pad_mode = pad_mode
        self.pad_cval = pad_cval
        self.keep_size = keep_size
        self.sample_independently = sample_independently

    def _augment_images(self, images, random_state, parents, hooks):
        result = []
        nb_images = len(images)
        rngs = random_state.duplicate(nb_images)
        for image, rng in zip(images, rngs):
            height, width = image.shape[0:2]
            crop_top, crop_right, crop_bottom, crop_left, \
                pad_top, pad_right, pad_bottom, pad_left, pad_mode, \
                pad_cval = self._draw_samples_image(rng, height, width)
            image_cr = image[crop_top:height-crop_bottom,
                             crop_left:width-crop_right]
            image_cr_pa = ia.pad(image_cr, top=pad_top, right=pad_right,
                                 bottom=pad_bottom, left=pad_left,
                                 mode=pad_mode, cval=pad_cval)
            result.append(image_cr_pa)
        return result

    def _augment_keypoints(self, keypoints_on_images, random_state, parents,
                           hooks):
        result = []
        nb_images = len(keypoints_on_images)
        rngs = random_state.duplicate(nb_images)
        for keypoints_on_image, rng in zip(keypoints_on_images, rngs):
            height, width = keypoints_on_image.shape[0:2]
            crop_top, crop_right, crop_bottom, crop_left, \
                pad_top, pad_right, pad_bottom, pad_left, _pad_mode, \
                _pad_cval = self._draw_samples_image(rng, height, width)

            shifted = keypoints_on_image.shift(
                x=-crop_left+pad_left, y=-crop_top+pad_top)
            shifted.shape = (
                height - crop_top - crop_bottom + pad_top + pad_bottom,
                width - crop_left - crop_right + pad_left + pad_right
            ) + shifted.shape[2:]
            if self.keep_size:
                result.append(shifted.on(keypoints_on_image.shape))
            else:
                result.append(shifted)

        return result

    def _draw_samples_image(self, random_state, height, width):
        top = self.top.draw_sample(random_state=random_state)
        right = self.right.draw_sample(random_state=random_state)
        bottom = self.bottom.draw_sample(random_state=random_state)
        left = self.left.draw_sample(random_state=random_state)
        crop_top = -top if top < 0 else 0
        crop_right = -right if right < 0 else 0
        crop_bottom = -bottom if bottom < 0 else 0
        crop_left = -left if left < 0 else 0
        pad_top = max(top, 0)
        pad_right = max(right, 0)
        pad_bottom = max(bottom, 0)
        pad_left = max(left, 0)
        pad_mode = self.pad_mode.draw_sample(random_state=random_state)
        pad_cval = self.pad_cval.draw_sample(random_state=random_state)
        return (crop_top, crop_right, crop_bottom, crop_left,
                pad_top, pad_right, pad_bottom, pad_left, pad_mode, pad_cval)

    def get_parameters(self):
        return [self.all_sides, self.top, self.right, self.bottom, self.left,
                self.pad_mode, self.pad_cval]

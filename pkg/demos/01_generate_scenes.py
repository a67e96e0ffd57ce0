"""Narrative demo 1: synthetic stereo scenes with exact ground truth.

Builds a couple of seeded random-dot scenes, explains what the layers and
occlusion masks mean, verifies the photometric invariant, and writes the
images plus ground-truth disparity to demos/output/scenes/.
"""

import os

import numpy as np

from stereoproxy import (
    check_photometric_consistency,
    random_dot_scene,
    write_disparity,
    write_image,
)

OUT = os.path.join(os.path.dirname(__file__), "output", "scenes")


def main():
    os.makedirs(OUT, exist_ok=True)
    print("Random-dot scenes: a background plane plus rectangular layers that")
    print("float in front of it. Each layer has an integer disparity, so the")
    print("right view is an exact integer re-shift of the same textures and")
    print("every visible pixel matches photometrically to the bit.\n")

    layers = [((60, 20, 160, 90), 12), ((110, 50, 210, 110), 24)]
    scene = random_dot_scene(256, 128, layers, seed=7, background_disparity=3)

    print(f"scene seed={scene.seed}: background disparity 3, layers at 12 and 24 px")
    print(f"  disparity histogram: "
          f"{ {int(d): int(n) for d, n in zip(*np.unique(scene.gt_disparity, return_counts=True))} }")
    occ = scene.occlusion_mask.mean()
    print(f"  occluded fraction: {occ:.3f} (band to the left of each layer +")
    print("  the left-border columns that fall outside the right view)")

    residual = check_photometric_consistency(scene)
    print(f"  max |left - right[x - d]| over visible pixels: {residual} (exact zero)\n")

    write_image(scene.left, os.path.join(OUT, "left.png"))
    write_image(scene.right, os.path.join(OUT, "right.png"))
    write_disparity(scene.gt_disparity, os.path.join(OUT, "gt.pfm"), "pfm")
    write_image(scene.occlusion_mask.astype(float), os.path.join(OUT, "occlusion.png"))
    print(f"wrote left/right/gt/occlusion to {OUT}")

    noisy = random_dot_scene(256, 128, layers, seed=7, background_disparity=3,
                             noise_sigma=0.02)
    print("with noise_sigma=0.02 the invariant degrades gracefully:")
    print(f"  residual = {check_photometric_consistency(noisy):.4f}")


if __name__ == "__main__":
    main()

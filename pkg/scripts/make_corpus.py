"""Build the desk corpus: ten 128x128 RGB crops of scikit-image sample images,
box-downsampled first so each crop holds a reasonable amount of scene.

Writes binary PPMs into data/desk_corpus.  Needs scikit-image (script only).
"""

import argparse
from pathlib import Path

import numpy as np
from skimage import data

from lapcfl.media import atomic_write, pnm_bytes

SIZE = 128

# name, loader, downsample factor, top, left
CROPS = [
    ("astronaut_face", data.astronaut, 2, 20, 80),
    ("astronaut_flag", data.astronaut, 2, 120, 10),
    ("coffee", data.coffee, 2, 50, 110),
    ("chelsea", data.chelsea, 2, 10, 40),
    ("rocket", data.rocket, 3, 10, 40),
    ("ihc", data.immunohistochemistry, 3, 20, 20),
    ("hubble", data.hubble_deep_field, 4, 60, 80),
    ("retina", data.retina, 8, 24, 24),
    ("colorwheel", data.colorwheel, 2, 28, 28),
    ("coffee_cup", data.coffee, 1, 120, 220),
]


def box_downsample(img: np.ndarray, f: int) -> np.ndarray:
    h, w = (img.shape[0] // f) * f, (img.shape[1] // f) * f
    img = img[:h, :w].astype(float)
    out = img.reshape(h // f, f, w // f, f, -1).mean(axis=(1, 3))
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path(__file__).resolve().parents[1] / "data" / "desk_corpus", type=Path)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, load, factor, top, left in CROPS:
        img = load()[..., :3]
        small = box_downsample(img, factor)
        crop = small[top:top + SIZE, left:left + SIZE]
        if crop.shape[:2] != (SIZE, SIZE):
            raise SystemExit(f"{name}: crop {crop.shape} out of bounds")
        atomic_write(args.out / f"{name}.ppm", pnm_bytes(crop))
        print(f"{name}: from {img.shape[1]}x{img.shape[0]} /{factor}")


if __name__ == "__main__":
    main()

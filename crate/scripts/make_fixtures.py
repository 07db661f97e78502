#!/usr/bin/env python3
"""Regenerate crates/core/tests/fixtures.

Each fixture is a baseline JPEG written by Pillow (libjpeg) plus a reference
raster decoded by libjpeg in the component domain:

  * grayscale files: the L plane (.pgm)
  * 4:4:4 color: the Y, Cb, Cr planes without color conversion (.ppm)
  * subsampled color: the Y plane only (.pgm), since chroma upsampling in
    libjpeg differs from nearest-neighbor replication

fixtures.json records the true width and height, the MCU width K, and the
fixture class. Periodic and constant fixtures have no vertical structure to
exploit and are expected to be estimated incorrectly.

Usage: python3 scripts/make_fixtures.py
"""

import io
import json
from pathlib import Path

import numpy as np
from PIL import Image
from skimage import data

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"

SUBSAMPLING = {"444": 0, "422": 1, "420": 2}
MCU_WIDTH = {"gray": 8, "444": 8, "422": 16, "420": 16}


def resize(arr, width, height):
    return np.asarray(Image.fromarray(arr).resize((width, height), Image.LANCZOS))


def encode(arr, layout, quality=90, **extra):
    img = Image.fromarray(arr)
    opts = {"quality": quality, "optimize": False, "progressive": False}
    if layout != "gray":
        opts["subsampling"] = SUBSAMPLING[layout]
    opts.update(extra)
    buf = io.BytesIO()
    img.save(buf, "JPEG", **opts)
    return buf.getvalue()


def reference(jpeg, layout):
    img = Image.open(io.BytesIO(jpeg))
    if layout == "gray":
        return img.convert("L"), "pgm"
    if layout == "444":
        img.draft("YCbCr", img.size)
        # relabel the planes so they can be stored as PPM unconverted
        return Image.frombytes("RGB", img.size, img.tobytes()), "ppm"
    img.draft("L", img.size)
    return img.convert("L"), "pgm"


def stripes(width, height, period, ticks=None):
    """Rows repeating every `period` pixels; optional ticks repeat every
    `ticks` pixels horizontally."""
    y = np.arange(height)[:, None]
    x = np.arange(width)[None, :]
    v = np.where(y % period == 0, 40, 215) + np.zeros_like(x)
    if ticks:
        v = np.where((x % ticks == 0) & (y % period < period // 2), 40, v)
    return v.astype(np.uint8)


def weave(width, height, period):
    y = np.arange(height)[:, None] % period
    x = np.arange(width)[None, :] % period
    over = ((x // (period // 2)) + (y // (period // 2))) % 2
    shade = 128 + 60 * np.cos(2 * np.pi * np.where(over, x, y) / period)
    return shade.astype(np.uint8)


def fixtures():
    coffee_portrait = data.coffee()[:, 150:450]
    yield "worked_example", resize(coffee_portrait, 375, 500), "420", {}, "natural"
    yield "astronaut_444", resize(data.astronaut(), 300, 300), "444", {}, "natural"
    yield "chelsea_422_rst", data.chelsea(), "422", {"restart_marker_blocks": 7}, "natural"
    yield "rocket_420", resize(data.rocket(), 331, 221), "420", {}, "natural"
    yield "coffee_444", resize(data.coffee(), 203, 135), "444", {}, "natural"
    yield "camera_gray", resize(data.camera(), 500, 400), "gray", {}, "natural"
    yield "moon_gray_rst", resize(data.moon(), 260, 180), "gray", {"restart_marker_rows": 1}, "natural"
    yield "brick_gray", data.brick()[:256, :301], "gray", {}, "natural"
    yield "grass_gray", data.grass()[:240, :256], "gray", {}, "natural"
    yield "gravel_gray", data.gravel()[:200, :333], "gray", {}, "natural"
    yield "periodic_rules", stripes(512, 512, 8, ticks=8), "gray", {}, "periodic"
    yield "periodic_weave", weave(512, 512, 8), "gray", {}, "periodic"
    yield "constant", np.full((24, 40), 100, np.uint8), "gray", {}, "constant"
    yield "constant_2mcu", np.full((8, 16), 100, np.uint8), "gray", {}, "constant"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    manifest = []
    for name, arr, layout, extra, kind in fixtures():
        jpeg = encode(arr, layout, **extra)
        ref, ext = reference(jpeg, layout)
        (OUT / f"{name}.jpg").write_bytes(jpeg)
        ref.save(OUT / f"{name}.{ext}")
        h, w = arr.shape[:2]
        manifest.append(
            {
                "file": f"{name}.jpg",
                "reference": f"{name}.{ext}",
                "layout": layout,
                "width": w,
                "height": h,
                "K": MCU_WIDTH[layout],
                "class": kind,
                "expect_correct": kind == "natural",
            }
        )
    (OUT / "fixtures.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(manifest)} fixtures to {OUT}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Convert images to and from binary RGB PPM (P6, maxval 255).

pol reads and writes PPM only. Use this to bring PNG/JPEG photos in and to
view results:

    ppm_convert.py photos/ clean/ --to ppm --size 64
    ppm_convert.py runs/sweep/ viewable/ --to png
"""
import argparse
import pathlib
import sys

from PIL import Image

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".ppm"}


def center_square(img, size):
    w, h = img.size
    side = min(w, h)
    left, top = (w - side) // 2, (h - side) // 2
    img = img.crop((left, top, left + side, top + side))
    return img.resize((size, size), Image.BICUBIC)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("src", type=pathlib.Path, help="image file or folder")
    p.add_argument("dst", type=pathlib.Path, help="output folder")
    p.add_argument("--to", choices=["ppm", "png"], default="ppm")
    p.add_argument("--size", type=int, default=0, help="center-crop and resize to a square (0 keeps the size)")
    args = p.parse_args(argv)

    files = sorted(f for f in args.src.iterdir() if f.suffix.lower() in IMAGE_SUFFIXES) if args.src.is_dir() else [args.src]
    if not files:
        print(f"no images in {args.src}", file=sys.stderr)
        return 2
    args.dst.mkdir(parents=True, exist_ok=True)
    for f in files:
        img = Image.open(f).convert("RGB")
        if args.size:
            img = center_square(img, args.size)
        out = args.dst / (f.stem + "." + args.to)
        img.save(out, format="PPM" if args.to == "ppm" else "PNG")
    print(f"converted {len(files)} images to {args.dst}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

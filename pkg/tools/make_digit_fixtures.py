"""Regenerate the hand-drawn 28x28 digit fixtures shipped in slicematch/data.

Strokes are drawn at 8x resolution with Pillow, box-filtered down to 28x28
and blurred slightly so that they resemble pen-written digits.
"""

from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFilter

S = 8
OUT = Path(__file__).resolve().parents[1] / "src" / "slicematch" / "data"


def canvas():
    im = Image.new("L", (28 * S, 28 * S), 0)
    return im, ImageDraw.Draw(im)


def finish(im):
    small = im.resize((28, 28), Image.BOX).filter(ImageFilter.GaussianBlur(0.6))
    arr = np.asarray(small, dtype=float)
    return np.rint(255 * arr / arr.max()).astype(int)


def p(x, y):
    return (x * S, y * S)


def digit_five():
    im, d = canvas()
    w = int(2.6 * S)
    d.line([p(18.5, 5.5), p(10.5, 5.8)], fill=255, width=w)
    d.line([p(10.5, 5.8), p(9.3, 13.0)], fill=255, width=w)
    d.arc([p(8.0, 11.0), p(19.5, 23.0)], start=-150, end=140, fill=255, width=w)
    return finish(im)


def digit_one():
    im, d = canvas()
    w = int(2.8 * S)
    d.line([p(15.0, 4.5), p(13.0, 23.5)], fill=255, width=w)
    d.line([p(15.0, 4.5), p(12.2, 7.5)], fill=255, width=int(2.2 * S))
    return finish(im)


def write_pgm(arr, path):
    lines = ["P2", "28 28", "255"] + [" ".join(str(v) for v in row) for row in arr]
    path.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    write_pgm(digit_five(), OUT / "digit5.pgm")
    write_pgm(digit_one(), OUT / "digit1.pgm")

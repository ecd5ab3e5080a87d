"""Raster and figure output for escape grids and dimension reports.

The PPM writer is hand-rolled: P6 is small enough that a dependency
would cost more than the sixteen lines, and hand-written bytes are
trivially deterministic.  The PNG figures go through matplotlib, which
is imported lazily so library users who never render pay nothing.
"""

from __future__ import annotations

import math

from .dimension import HIT_POLE, STAYED, UNDEFINED, DimensionReport, EscapeRaster

_STAYED_RGB = (200, 30, 30)
_POLE_RGB = (50, 70, 220)
_UNDEF_RGB = (30, 130, 70)


def code_color(code: int, n_steps: int) -> tuple[int, int, int]:
    """Color of one classification code: gray ramp by drop step, flat
    colors for the three terminal states."""
    if code == STAYED:
        return _STAYED_RGB
    if code == HIT_POLE:
        return _POLE_RGB
    if code == UNDEFINED:
        return _UNDEF_RGB
    g = 40 + round(215 * code / max(n_steps, 1))
    return (g, g, g)


def write_ppm(raster: EscapeRaster, fh) -> None:
    """Binary P6 image of the raster; top image row is the top of the window."""
    fh.write(f"P6\n{raster.nx} {raster.ny}\n255\n".encode("ascii"))
    body = bytearray()
    for iy in range(raster.ny - 1, -1, -1):
        for code in raster.codes[iy]:
            body.extend(code_color(code, raster.n_steps))
    fh.write(bytes(body))


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


_META = {"Software": "escdim"}


def save_raster_png(raster: EscapeRaster, path: str) -> None:
    plt = _pyplot()
    rows = [[code_color(code, raster.n_steps) for code in raster.codes[iy]]
            for iy in range(raster.ny)]
    fig, ax = plt.subplots(figsize=(6.4, 6.4 * raster.ny / raster.nx))
    x0, x1, y0, y1 = raster.window
    ax.imshow(rows, origin="lower", extent=(x0, x1, y0, y1), aspect="auto",
              interpolation="nearest")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(f"orbit survival through {raster.n_steps} steps, R = {raster.R:g}")
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)


def save_report_png(rep: DimensionReport, path: str) -> None:
    """Ladder plot: the measured lower bounds against the closed-form value."""
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.6, 4.2))
    if rep.mcmullen:
        xs = [math.log10(R) for R, _ in rep.mcmullen]
        ax1.plot(xs, [v for _, v in rep.mcmullen], "o-", label="area lower bound")
    ax1.axhline(rep.theoretical, color="k", ls="--",
                label=f"(m+2)/(m+4) = {rep.theoretical:.4f}")
    if rep.tail_exponent is not None:
        ax1.axhline(rep.tail_exponent, color="C2", ls=":",
                    label=f"tail exponent {rep.tail_exponent:.4f}")
    ax1.set_xlabel("log10 R")
    ax1.set_ylabel("dimension estimate")
    ax1.set_title(f"escape-radius ladder, m = {rep.m}")
    ax1.legend(fontsize=8)
    if rep.bowen:
        ax2.semilogx([size for size, _ in rep.bowen],
                     [root for _, root in rep.bowen], "s-",
                     label="pressure root")
    ax2.axhline(rep.theoretical, color="k", ls="--")
    ax2.set_xlabel("alphabet size")
    ax2.set_ylabel("Bowen root")
    title = "finite-alphabet roots"
    if rep.bowen_R is not None:
        title += f" at R = {rep.bowen_R:.3g}"
    ax2.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)

"""Minimal SVG document builder with deterministic number formatting."""

from collections.abc import Iterable, Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np

FONT = "system-ui, -apple-system, sans-serif"


def fmt(value: float) -> str:
    """Coordinates with two decimals and no negative zero."""
    text = f"{float(value):.2f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def label(value: float) -> str:
    """Tick labels with up to three significant decimals."""
    text = f"{float(value):.3g}"
    return "0" if text == "-0" else text


class LinearScale:
    """Maps a data interval onto a pixel interval."""

    def __init__(self, domain: tuple[float, float], extent: tuple[float, float]):
        low, high = domain
        if not np.isfinite(low) or not np.isfinite(high):
            low, high = 0.0, 1.0
        if high <= low:
            low, high = low - 0.5, low + 0.5
        self.domain = (float(low), float(high))
        self.extent = extent

    def __call__(self, value: float) -> float:
        low, high = self.domain
        start, stop = self.extent
        return start + (float(value) - low) / (high - low) * (stop - start)

    def ticks(self, count: int = 5) -> list[float]:
        """Round tick values spanning the domain."""
        low, high = self.domain
        raw = (high - low) / max(count, 1)
        magnitude = 10 ** np.floor(np.log10(raw))
        step = next(
            factor * magnitude for factor in (1, 2, 2.5, 5, 10) if factor * magnitude >= raw
        )
        first = np.ceil(low / step) * step
        return [float(round(value, 10)) for value in np.arange(first, high + step / 2, step)]


def padded(values: Iterable[float], include_zero: bool = True, pad: float = 0.05):
    """A domain covering the finite values (and zero), with relative padding."""
    finite = [float(value) for value in values if np.isfinite(value)]
    if include_zero:
        finite.append(0.0)
    if not finite:
        return 0.0, 1.0
    low, high = min(finite), max(finite)
    margin = (high - low) * pad or 0.5
    return low - margin, high + margin


class SvgDocument:
    """Accumulates SVG elements and renders them as one self-contained document."""

    def __init__(self, width: float, height: float, title: str | None = None):
        self.width = width
        self.height = height
        self._elements: list[str] = []
        self.rect(0, 0, width, height, fill="#ffffff")
        if title:
            self.text(width / 2, 22, title, size=15, anchor="middle", weight="600")

    @staticmethod
    def _attributes(attributes: dict) -> str:
        return " ".join(
            f"{key.replace('_', '-')}={quoteattr(str(value))}"
            for key, value in attributes.items()
            if value is not None
        )

    def _add(self, tag: str, content: str | None = None, **attributes) -> None:
        rendered = self._attributes(attributes)
        if content is None:
            self._elements.append(f"<{tag} {rendered}/>")
        else:
            self._elements.append(f"<{tag} {rendered}>{content}</{tag}>")

    def rect(self, x, y, width, height, fill="#4a90d9", stroke=None, opacity=None) -> None:
        self._add(
            "rect",
            x=fmt(x),
            y=fmt(y),
            width=fmt(max(width, 0.0)),
            height=fmt(max(height, 0.0)),
            fill=fill,
            stroke=stroke,
            fill_opacity=opacity,
        )

    def line(self, x1, y1, x2, y2, stroke="#333333", width=1.0, dash=None) -> None:
        self._add(
            "line",
            x1=fmt(x1),
            y1=fmt(y1),
            x2=fmt(x2),
            y2=fmt(y2),
            stroke=stroke,
            stroke_width=fmt(width),
            stroke_dasharray=dash,
        )

    def circle(self, cx, cy, r, fill="#333333", opacity=None, title=None) -> None:
        content = f"<title>{escape(title)}</title>" if title else None
        self._add(
            "circle", content, cx=fmt(cx), cy=fmt(cy), r=fmt(r), fill=fill, fill_opacity=opacity
        )

    def polygon(self, points: Sequence[tuple[float, float]], fill="#333333") -> None:
        self._add("polygon", points=" ".join(f"{fmt(x)},{fmt(y)}" for x, y in points), fill=fill)

    def text(
        self, x, y, content: str, size=11, anchor="start", fill="#333333", weight=None, rotate=None
    ) -> None:
        self._add(
            "text",
            escape(str(content)),
            x=fmt(x),
            y=fmt(y),
            font_size=size,
            text_anchor=anchor,
            fill=fill,
            font_weight=weight,
            transform=f"rotate({rotate}, {fmt(x)}, {fmt(y)})" if rotate is not None else None,
        )

    def x_axis(self, scale: LinearScale, y: float, caption: str | None = None) -> None:
        """Horizontal axis with ticks below ``y``."""
        self.line(scale.extent[0], y, scale.extent[1], y)
        for tick in scale.ticks():
            x = scale(tick)
            self.line(x, y, x, y + 4)
            self.text(x, y + 15, label(tick), size=9, anchor="middle", fill="#666666")
        if caption:
            self.text(sum(scale.extent) / 2, y + 30, caption, size=10, anchor="middle")

    def y_axis(self, scale: LinearScale, x: float, caption: str | None = None) -> None:
        """Vertical axis with ticks left of ``x``."""
        self.line(x, scale.extent[0], x, scale.extent[1])
        for tick in scale.ticks():
            y = scale(tick)
            self.line(x - 4, y, x, y)
            self.text(x - 6, y + 3, label(tick), size=9, anchor="end", fill="#666666")
        if caption:
            middle = sum(scale.extent) / 2
            self.text(x - 40, middle, caption, size=10, anchor="middle", rotate=-90)

    def render(self) -> str:
        """The SVG document; identical input gives byte-identical output."""
        header = (
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{fmt(self.width)}" height="{fmt(self.height)}" '
            f'viewBox="0 0 {fmt(self.width)} {fmt(self.height)}" font-family="{FONT}">'
        )
        return "\n".join([header, *self._elements, "</svg>"]) + "\n"

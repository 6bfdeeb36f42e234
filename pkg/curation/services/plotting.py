from __future__ import annotations

from collections import Counter
from typing import Dict, List, Sequence

from django.template.loader import render_to_string

from curation.services.cartography import CategoryAssignment, Region, datamap_points
from curation.services.dynamics import SampleStats, id_sort_key

REGION_COLORS = {
    Region.EASY: "#4b6d33",
    Region.AMBIGUOUS: "#e8a33d",
    Region.HARD: "#c0392b",
}

WIDTH = 640
HEIGHT = 480
PLOT = {"left": 70, "right": 600, "top": 30, "bottom": 420}
# variability of values in [0, 1] never exceeds 0.5
X_MAX = 0.5


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _x(variability: float) -> float:
    return PLOT["left"] + (PLOT["right"] - PLOT["left"]) * min(max(variability, 0.0), X_MAX) / X_MAX


def _y(confidence: float) -> float:
    return PLOT["bottom"] - (PLOT["bottom"] - PLOT["top"]) * min(max(confidence, 0.0), 1.0)


def render_datamap_svg(
    stats: Sequence[SampleStats],
    assignments: Sequence[CategoryAssignment],
    title: str = "Data map",
) -> str:
    """Variability on x, confidence on y, one marker per sample coloured by region."""
    points = datamap_points(stats, assignments)
    ordered_ids = sorted((s.sample_id for s in stats), key=id_sort_key)

    rendered: List[Dict[str, str]] = []
    for sample_id, point in zip(ordered_ids, points):
        rendered.append(
            {
                "cx": _fmt(_x(point.variability)),
                "cy": _fmt(_y(point.confidence)),
                "color": REGION_COLORS[point.region],
                "region": point.region.value,
                "title": (
                    f"{sample_id}: variability={point.variability:.4f} "
                    f"confidence={point.confidence:.4f} correctness={point.correctness:.2f}"
                ),
            }
        )

    counts = Counter(point.region for point in points)
    legend = []
    for row, region in enumerate(Region):
        y = PLOT["top"] + 4 + row * 18
        legend.append(
            {
                "x": PLOT["right"] - 150,
                "y": y,
                "text_x": PLOT["right"] - 135,
                "text_y": y + 9,
                "color": REGION_COLORS[region],
                "label": region.label,
                "count": counts.get(region, 0),
            }
        )

    x_ticks = [
        {"pos": _fmt(_x(v)), "offset": PLOT["bottom"] + 18, "label": f"{v:.1f}"}
        for v in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    ]
    y_ticks = [
        {"pos": _fmt(_y(v)), "offset": PLOT["left"] - 8, "label": f"{v:.1f}"}
        for v in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    ]

    return render_to_string(
        "curation/datamap.svg",
        {
            "title": title,
            "width": WIDTH,
            "height": HEIGHT,
            "plot": PLOT,
            "radius": 3,
            "points": rendered,
            "legend": legend,
            "x_ticks": x_ticks,
            "y_ticks": y_ticks,
            "x_label": {"x": (PLOT["left"] + PLOT["right"]) // 2, "y": HEIGHT - 20},
            "y_label": {"x": 20, "y": (PLOT["top"] + PLOT["bottom"]) // 2},
        },
    )

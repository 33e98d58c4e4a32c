"""
Plot scripts for sweep tables. Rendering only; gnuplot is run by the user.
"""

import logging
import os
from typing import List, Optional, Sequence

from jinja2 import Environment, FileSystemLoader

logger = logging.getLogger(__name__)

TEMPLATE_DIR = os.path.join(os.path.dirname(__file__), "templates")

env = Environment(loader=FileSystemLoader(TEMPLATE_DIR), keep_trailing_newline=True)


def plot_curves(methods: Sequence[str], batch_counts: Optional[Sequence[int]] = None) -> List[dict]:
    """One curve per method, or per (method, M) when the table holds several batch counts."""
    if not batch_counts:
        return [{"label": method, "condition": f'strcol(2) eq "{method}"'} for method in methods]
    return [
        {
            "label": f"{method} M={m}",
            "condition": f'strcol(2) eq "{method}" && column("n_batches") == {m}',
        }
        for method in methods
        for m in batch_counts
    ]


def render_rmse_script(
    csv_path: str,
    columns: Sequence[str],
    title: str,
    methods: Sequence[str] = ("baseline2d", "separable"),
    xlabel: str = "swept value",
    batch_counts: Optional[Sequence[int]] = None,
) -> str:
    template = env.get_template("rmse.gp.j2")
    return template.render(
        title=title,
        xlabel=xlabel,
        csv_name=os.path.basename(csv_path),
        stem=os.path.splitext(os.path.basename(csv_path))[0],
        columns=list(columns),
        curves=plot_curves(methods, batch_counts),
    )


def write_gnuplot_script(csv_path: str, columns: Sequence[str], title: str, **kwargs) -> str:
    """Write `<csv stem>.gp` next to the CSV: log-y RMSE against the swept variable, one line per curve."""
    script_path = os.path.splitext(csv_path)[0] + ".gp"
    with open(script_path, "w") as f:
        f.write(render_rmse_script(csv_path, columns, title, **kwargs))
    logger.info("Wrote plot script %s", script_path)
    return script_path

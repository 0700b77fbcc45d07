from typing import Callable as __Callable__
from typing import List as __List__
from typing import Sequence as __Sequence__

import numpy as __np__
import pandas as __pd__

NO_DATA: str = "no data"


def format_mean_std(mean: float, std: float, digits: int = 4) -> str:
    """
    Render a mean and standard deviation as ``0.8359(0.0200)``.

    :param mean: (float): Mean.
    :param std: (float): Standard deviation.
    :param digits: (int): Decimals of both numbers.
    :return: (str): Formatted cell.
    """
    return "{m:.{d}f}({s:.{d}f})".format(m=mean, s=std, d=digits)


def format_p_value(p: float) -> str:
    """
    Four decimals for ordinary p-values, scientific notation below 1e-3.
    """
    if p is None or __np__.isnan(p):
        return ""
    if p == 0.0 or p >= 1e-3:
        return "{p:.4f}".format(p=p)
    return "{p:.2E}".format(p=p)


def __cell__(value, float_format: __Callable__[[float], str]) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, __np__.floating)):
        if __np__.isnan(value):
            return ""
        return float_format(float(value))
    return str(value)


def __rows_of__(frame: __pd__.DataFrame, float_format, index: bool) -> __List__[__List__[str]]:
    rows: list = []
    for label, record in zip(frame.index, frame.itertuples(index=False)):
        cells: list = [__cell__(v, float_format) for v in record]
        rows.append(([str(label)] if index else []) + cells)
    return rows


def markdown_table(
    frame: __pd__.DataFrame,
    float_format: __Callable__[[float], str] = "{:.4f}".format,
    index: bool = False,
    index_label: str = "",
) -> str:
    """
    Render ``frame`` as a pipe table. An empty frame becomes a single "no data" row.

    :param frame: (pd.DataFrame): Table to render.
    :param float_format: (Callable): Formatter for float cells.
    :param index: (bool): Whether to render the index as the first column.
    :param index_label: (str): Header of the index column.
    :return: (str): Markdown text ending in a newline.
    """
    header: list = ([index_label] if index else []) + [str(c) for c in frame.columns]
    rows: list = __rows_of__(frame, float_format, index)
    if not rows:
        rows = [[NO_DATA] + [""] * (len(header) - 1)] if header else [[NO_DATA]]
        header = header or [""]
    lines: list = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines) + "\n"


def text_table(
    frame: __pd__.DataFrame,
    float_format: __Callable__[[float], str] = "{:.4f}".format,
    index: bool = False,
    index_label: str = "",
) -> str:
    """
    Render ``frame`` as a left-aligned plain-text block.
    """
    header: list = ([index_label] if index else []) + [str(c) for c in frame.columns]
    rows: list = __rows_of__(frame, float_format, index) or [[NO_DATA] + [""] * (len(header) - 1)]
    widths: list = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines: list = ["  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in [header] + rows]
    return "\n".join(lines) + "\n"


def bracket_groups(groups: __Sequence__[__Sequence__[str]]) -> str:
    """
    Markdown form of a rank grouping: multi-member groups in brackets.
    """
    parts: list = []
    for group in groups:
        members: str = " ".join(group)
        parts.append("[" + members + "]" if len(group) > 1 else members)
    return " ".join(parts)

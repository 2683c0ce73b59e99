"""
Utility functions for formatting terminal output
"""

from typing import Any, Dict, Iterable, List, Sequence, Tuple


def format_parameters(parameters: Dict[str, Any]) -> str:
    """
    Format experiment parameters for logging

    Args:
        parameters: Dictionary of parameter names to values

    Returns:
        Formatted string representation of the parameters
    """
    if not parameters:
        return ""
    parts = []
    for name, value in parameters.items():
        if isinstance(value, float):
            parts.append(f"{name}={value:.4f}")
        else:
            parts.append(f"{name}={value}")
    return ", ".join(parts)


def format_table(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Left-aligned plain-text table"""
    body: List[Tuple[str, ...]] = [tuple(str(cell) for cell in row) for row in rows]
    widths = [len(h) for h in headers]
    for row in body:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]

    def line(cells: Sequence[str]) -> str:
        return "  ".join(cell.ljust(w) for cell, w in zip(cells, widths)).rstrip()

    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in body)
    return "\n".join(out)


def format_truth_table(table: Sequence[Tuple[str, bool]]) -> str:
    return format_table(["point", "value"], ((x, "1" if v else "0") for x, v in table))

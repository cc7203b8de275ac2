"""Python front end for the self-healing fabric simulator."""

from fractions import Fraction

from . import _core
from ._core import (
    SelfHealError,
    campaign,
    check_property,
    golden,
    place,
    recovery_latency,
    run_scenario,
)

__all__ = [
    "SelfHealError",
    "campaign",
    "check_property",
    "golden",
    "metrics_table",
    "place",
    "recovery_latency",
    "render_truncated",
    "run_scenario",
]


def metrics_table(n, spf):
    """Comparison rows with exact Fraction values."""
    rows = []
    for r in _core.metrics_table(n, spf):
        rows.append({k: Fraction(*v) if isinstance(v, tuple) else v for k, v in r.items()})
    return rows


def render_truncated(value, digits=3):
    value = Fraction(value)
    return _core.render_truncated(value.numerator, value.denominator, digits)

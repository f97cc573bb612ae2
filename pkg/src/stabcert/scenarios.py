"""Bundled scenarios.

``example1`` is the two-state system

    x1' = x1**3 + x2**2 * u1 + x2
    x2' = u1 + w2(x, t),    w2 = 0.001 * exp(-10 t) * cos(x1 + x2)

with poles placed at -0.5 and -0.75 and the hand-derived remainder bound
``|R1(x, -Kx)| <= (max(3, ||K||) + ||K||) * |x|**3``.
"""

from importlib import resources

from .certifier import RemainderModel, remainder_bound_manual
from .io import parse_system
from .sysmodel import SystemDefinition


def example1_text() -> str:
    return resources.files("stabcert").joinpath("data/example1.json").read_text()


def example1_system() -> SystemDefinition:
    return parse_system(example1_text(), "example1.json")


def example1_manual_model(k_norm: float) -> RemainderModel:
    """Hand bound: ``6|x1||x|^2 + 4|x2||x1||u1| + 2|u1||x|^2`` halved, with ``|u1| <= ||K|| |x|``."""
    return remainder_bound_manual(max(3.0, k_norm) + k_norm, 3)

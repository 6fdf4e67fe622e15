"""Desk-scale litmus workloads shipped with the package."""

from importlib import resources

from ..workload import parse_workload

NAMES = ("sb", "w1", "w2", "single", "mp3")


def text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.wl").read_text(encoding="utf-8")


def load(name: str):
    return parse_workload(text(name))

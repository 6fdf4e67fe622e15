"""Structured run reports with deterministic text and JSON renderings."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .actions import (CacheUpd, Evict, Reconf, StoreUpd, format_action,
                      observable_key)


@dataclass
class Report:
    command: str
    inputs: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)  # name -> rows from trace_rows()
    stats: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    exit_code: int = 0

    @classmethod
    def from_json(cls, text: str) -> Report:
        return cls(**json.loads(text))


def _who(a) -> str:
    if isinstance(a, (Evict, StoreUpd)):
        return f"c{a.cache}"
    if isinstance(a, CacheUpd):
        return f"c{a.src}>c{a.dst}"
    if isinstance(a, Reconf):
        return "sys"
    return f"t{a.thread}"


def trace_rows(trace, locks_observable: bool = True) -> list:
    """``[step, thread/cache, action, cost, observable]`` rows for a report."""
    rows = []
    for step, (a, cost) in enumerate(trace):
        rows.append([step, _who(a), format_action(a), cost,
                     observable_key(a, locks_observable) is not None])
    return rows


def _table(rows) -> list:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]


def _fmt_value(v) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def format_report(r: Report, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(asdict(r), indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [f"== {r.command} =="]
    for k, v in sorted(r.inputs.items()):
        lines.append(f"{k}: {_fmt_value(v)}")
    if not (r.verdicts or r.traces or r.artifacts or r.messages):
        lines.append("no findings")
    if r.verdicts:
        lines.append("")
        lines.extend(_table([[k, _fmt_value(v)] for k, v in sorted(r.verdicts.items())]))
    for name, rows in sorted(r.traces.items()):
        lines.append("")
        lines.append(f"-- {name} ({len(rows)} steps; '~' marks unobservable) --")
        if rows:
            lines.extend(_table([[s, who, act, cost, "" if obs else "~"]
                                 for s, who, act, cost, obs in rows]))
    lts = r.artifacts.get("lts")
    if lts is not None:
        lines.append("")
        lines.extend(lts_text_lines(lts))
    for msg in r.messages:
        lines.append(f"note: {msg}")
    if r.stats:
        lines.append("")
        lines.append("stats: " + ", ".join(f"{k}={_fmt_value(v)}" for k, v in sorted(r.stats.items())))
    return "\n".join(lines) + "\n"


def lts_text_lines(d: dict) -> list:
    """The line-per-edge LTS dump from an LTS dictionary."""
    hashes = {s["id"]: s["hash"] for s in d["states"]}
    lines = [f"# {len(d['states'])} states, {len(d['edges'])} edges, "
             f"initial {hashes[d['initial']]}"]
    for s in d["states"]:
        tags = (" final" if s["final"] else "") + (" truncated" if s["truncated"] else "")
        lines.append(f"state {s['hash']} {s['text']}{tags}")
    for e in d["edges"]:
        lines.append(f"{hashes[e['src']]} {e['action']} {e['cost']} {hashes[e['dst']]}")
    return lines

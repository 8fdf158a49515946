"""Dataclass configs with command-line overrides (``--field value``)."""

from __future__ import annotations

import argparse
import dataclasses
import json
from pathlib import Path
from typing import TypeVar

T = TypeVar("T")


def _parse_tuple(text: str):
    return tuple(json.loads(f"[{text}]"))


def parse_config(cls: type[T], description: str) -> T:
    parser = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        if isinstance(default, tuple):
            kind = _parse_tuple
        elif isinstance(default, bool):
            kind = lambda s: s.lower() in ("1", "true", "yes")  # noqa: E731
        else:
            kind = type(default)
        parser.add_argument(f"--{f.name.replace('_', '-')}", type=kind, default=default)
    return cls(**vars(parser.parse_args()))


def write_outputs(out_dir: str, name: str, config, rows: list[dict], summary: dict) -> Path:
    """``<name>.csv`` with one line per row and ``<name>.json`` with config and summary."""
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    if rows:
        keys = list(rows[0])
        lines = [",".join(keys)] + [",".join(_fmt(r[k]) for k in keys) for r in rows]
        (path / f"{name}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    doc = {"config": dataclasses.asdict(config), "summary": summary}
    (path / f"{name}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _fmt(v) -> str:
    return "%.17g" % v if isinstance(v, float) else str(v)

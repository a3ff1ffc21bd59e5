"""Named environment catalog.

Ships a set of generated synthetic cities as package data and resolves
user-facing location names to them. Lookup accepts a catalog id, an alias
(city-style names map onto the synthetic layouts), or a filesystem path to
an environment JSON file. Names are case-insensitive.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .geometry import Environment, EnvironmentError_, load_environment


class UnknownLocationError(KeyError):
    def __init__(self, location: str, known: list[str]):
        super().__init__(location)
        self.location = location
        self.known = known

    def __str__(self):
        return (f"unknown location {self.location!r}; "
                f"known: {', '.join(self.known)}")


def _data_root():
    return resources.files("raymap").joinpath("data/environments")


@lru_cache(maxsize=1)
def load_catalog() -> list[dict]:
    raw = json.loads(_data_root().joinpath("catalog.json").read_text())
    return raw["environments"]


def known_locations() -> list[str]:
    out = []
    for entry in load_catalog():
        out.append(entry["id"])
        out.extend(entry.get("aliases", []))
    return out


@lru_cache(maxsize=16)
def _load_entry(entry_id: str) -> Environment:
    for entry in load_catalog():
        if entry["id"] == entry_id:
            text = _data_root().joinpath(entry["file"]).read_text()
            from .geometry import environment_from_dict
            return environment_from_dict(json.loads(text))
    raise UnknownLocationError(entry_id, known_locations())


def resolve_location(location: str) -> Environment:
    """Environment for a catalog id, an alias, or a JSON file path."""
    want = location.strip().lower()
    for entry in load_catalog():
        names = [entry["id"]] + entry.get("aliases", [])
        if want in (n.lower() for n in names):
            return _load_entry(entry["id"])
    p = Path(location)
    if p.suffix == ".json" and p.exists():
        return load_environment(p)
    raise UnknownLocationError(location, known_locations())


def list_environments() -> list[dict]:
    """Metadata for every packaged environment (for APIs and UIs)."""
    out = []
    for entry in load_catalog():
        env = _load_entry(entry["id"])
        out.append({
            "id": entry["id"],
            "aliases": entry.get("aliases", []),
            "bounds": [list(env.bounds[0]), list(env.bounds[1])],
            "building_count": len(env.buildings),
            "max_height": max((b.height for b in env.buildings), default=0.0),
        })
    return out

"""JSON instance files.

Schema::

    {
      "leader_actions": 2,
      "follower_actions": 2,
      "context_space": {"kind": "Finite", "contexts": ["c0", {"label": "c1", "vector": [0.5]}]}
                     | {"kind": "Box", "lo": [0.0], "hi": [1.0]},
      "leader_utility": <utility>,
      "types": [{"name": "alpha1", "utility": <utility>}, ...]
    }

    <utility> = {"kind": "Tabular", "tables": {"<label>" | "*": [[...A_f...], ...A rows...]}}
              | {"kind": "LinearClipped", "theta": [A][A_f][d], "context_free": false}

Tabular tables are row-major ``[A][A_f]`` arrays keyed by context label; the
``"*"`` key supplies a table for every label.
"""
from __future__ import annotations

import json
from pathlib import Path

from ._validation import InstanceFormatError
from .game import (BoxContexts, Context, FiniteContexts, GameInstance,
                   LinearClippedUtility, TabularUtility)


def utility_from_dict(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InstanceFormatError(f"utility must be an object with a 'kind', got {spec!r}")
    kind = spec["kind"]
    if kind == "Tabular":
        if "tables" not in spec:
            raise InstanceFormatError("Tabular utility requires 'tables'")
        return TabularUtility(spec["tables"])
    if kind == "LinearClipped":
        if "theta" not in spec:
            raise InstanceFormatError("LinearClipped utility requires 'theta'")
        return LinearClippedUtility(spec["theta"], context_free=spec.get("context_free", False))
    raise InstanceFormatError(f"unknown utility kind {kind!r}")


def _context_from_entry(entry):
    if isinstance(entry, str):
        return Context.labelled(entry)
    if isinstance(entry, dict):
        return Context(entry.get("vector", (0.0,)), entry.get("label"))
    raise InstanceFormatError(f"bad context entry {entry!r}")


def context_space_from_dict(spec):
    kind = spec.get("kind")
    if kind == "Finite":
        return FiniteContexts(tuple(_context_from_entry(e) for e in spec.get("contexts", [])))
    if kind == "Box":
        return BoxContexts(spec["lo"], spec["hi"])
    raise InstanceFormatError(f"unknown context space kind {kind!r}")


def context_space_to_dict(space):
    if isinstance(space, FiniteContexts):
        return {"kind": "Finite",
                "contexts": [{"label": c.label, "vector": list(c.vector)} for c in space.contexts]}
    return {"kind": "Box", "lo": list(space.lo), "hi": list(space.hi)}


def instance_from_dict(data):
    try:
        types = data["types"]
        game = GameInstance(
            n_leader_actions=int(data["leader_actions"]),
            n_follower_actions=int(data["follower_actions"]),
            leader_utility=utility_from_dict(data["leader_utility"]),
            follower_utilities=[utility_from_dict(t["utility"]) for t in types],
            context_space=context_space_from_dict(data["context_space"]),
            type_names=[t.get("name", f"type{i}") for i, t in enumerate(types)],
        )
    except KeyError as exc:
        raise InstanceFormatError(f"instance is missing field {exc}") from None
    return game


def instance_to_dict(game):
    return {
        "leader_actions": game.n_leader_actions,
        "follower_actions": game.n_follower_actions,
        "context_space": context_space_to_dict(game.context_space),
        "leader_utility": game.leader_utility.to_dict(),
        "types": [{"name": name, "utility": m.to_dict()}
                  for name, m in zip(game.type_names, game.follower_utilities)],
    }


def load_instance(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(data)


def save_instance(game, path):
    Path(path).write_text(json.dumps(instance_to_dict(game), indent=2) + "\n")

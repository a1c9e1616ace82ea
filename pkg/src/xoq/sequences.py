"""JSON sequence files and the bundled published sequences.

Format::

    {"configuration": "A",
     "jmax_fraction_fixed": 0.5,
     "steps": [{"wait": 0.5},
               {"pulses": [{"pair": "b1b3", "duration": 0.866, "strength": 1.0}]}]}

``strength`` defaults to 1. ``configuration`` is ``A``, ``B`` or the
all-controllable toy variants ``A-free`` / ``B-free``.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

from .dynamics import Configuration, Pulse, PulseSequence, PulseStep, get_configuration


class SequenceFormatError(ValueError):
    """Raised for malformed or invalid sequence documents."""


def _step_from_dict(d: Any, k: int) -> PulseStep:
    if not isinstance(d, dict):
        raise SequenceFormatError(f"step {k}: expected an object, got {type(d).__name__}")
    if "wait" in d:
        if set(d) - {"wait"}:
            raise SequenceFormatError(f"step {k}: a wait step takes no other keys")
        return PulseStep.waiting(float(d["wait"]))
    pulses = d.get("pulses")
    if not isinstance(pulses, list) or not pulses:
        raise SequenceFormatError(f"step {k}: needs a nonempty 'pulses' list or a 'wait'")
    out = []
    for p in pulses:
        try:
            out.append(Pulse(p["pair"], float(p["duration"]), float(p.get("strength", 1.0))))
        except (KeyError, TypeError) as exc:
            raise SequenceFormatError(f"step {k}: bad pulse {p!r}") from exc
    return PulseStep(tuple(out))


def sequence_from_dict(doc: Any, configuration: Configuration | str | None = None) -> PulseSequence:
    if not isinstance(doc, dict):
        raise SequenceFormatError("sequence document must be a JSON object")
    try:
        config = configuration or doc["configuration"]
        if isinstance(config, str):
            config = get_configuration(config)
        steps = tuple(_step_from_dict(s, k) for k, s in enumerate(doc.get("steps", []), start=1))
        return PulseSequence(config, steps, float(doc.get("jmax_fraction_fixed", 0.5)))
    except SequenceFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SequenceFormatError(str(exc)) from exc


def sequence_to_dict(seq: PulseSequence) -> dict:
    steps = []
    for step in seq.steps:
        if step.is_wait:
            steps.append({"wait": step.wait})
        else:
            steps.append(
                {"pulses": [{"pair": p.name, "duration": p.duration, "strength": p.strength} for p in step.pulses]}
            )
    return {
        "configuration": seq.configuration.name,
        "jmax_fraction_fixed": seq.jmax_fraction_fixed,
        "steps": steps,
    }


def load_sequence(path) -> PulseSequence:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SequenceFormatError(f"{path}: invalid JSON ({exc})") from exc
    return sequence_from_dict(doc)


def dump_sequence(seq: PulseSequence, path) -> None:
    Path(path).write_text(json.dumps(sequence_to_dict(seq), indent=2) + "\n")


BUNDLED = ("table1_configA.json", "table2_configB.json", "table3_wrappers.json")


def bundled_path(name: str) -> Path:
    if name not in BUNDLED:
        raise ValueError(f"no bundled file {name!r}; choose from {BUNDLED}")
    return Path(str(resources.files("xoq") / "data" / name))


def table1() -> PulseSequence:
    """Published fixed-J12 CNOT sequence for configuration A."""
    return load_sequence(bundled_path("table1_configA.json"))


def table2() -> PulseSequence:
    """Published fixed-J12 CNOT sequence for configuration B."""
    return load_sequence(bundled_path("table2_configB.json"))


def table3_wrappers() -> tuple[PulseSequence, PulseSequence]:
    """Single-qubit operations ``(before, after)`` for the all-controllable model."""
    doc = json.loads(bundled_path("table3_wrappers.json").read_text())
    config = get_configuration(doc["configuration"])
    return sequence_from_dict(doc["before"], config), sequence_from_dict(doc["after"], config)

import hashlib
import json

import pytest

from xoq.dynamics import CONFIG_A, CONFIG_B, PulseSequence, PulseStep, is_intra_qubit
from xoq.sequences import (
    BUNDLED,
    SequenceFormatError,
    bundled_path,
    dump_sequence,
    load_sequence,
    sequence_from_dict,
    sequence_to_dict,
    table1,
    table2,
    table3_wrappers,
)

# transcriptions reviewed by hand; any edit to the data files must update these
CHECKSUMS = {
    "table1_configA.json": "efd09121cb39a5f0e76026be2b4ba316c85d9f0dd995fc4b01ebefb9d1d57a55",
    "table2_configB.json": "f856f30009ec6f436ce70f9c01b0cc8c81ffecc6c451be9c2a8068bd08fec888",
    "table3_wrappers.json": "c62f2ed57508f21bf007f9d321851f2a2b7cd96cef63d5d2a7c5f5ca75c339b3",
}


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_checksums(name):
    assert hashlib.sha256(bundled_path(name).read_bytes()).hexdigest() == CHECKSUMS[name]


def test_table1_shape():
    seq = table1()
    assert seq.configuration == CONFIG_A
    assert len(seq) == 29
    assert seq.steps[0].is_wait and seq.steps[0].wait == 0.5
    assert seq.steps[1].pulses[0].name == "b1b3" and seq.steps[1].pulses[0].duration == 0.866
    assert seq.total_time("simultaneous") == pytest.approx(12.131)


def test_table2_shape():
    seq = table2()
    assert seq.configuration == CONFIG_B
    assert len(seq) == 31
    assert seq.steps[5].is_wait and seq.steps[5].wait == 1.999
    assert max(p.duration for s in seq.steps for p in s.pulses) == 1.994
    assert [p.name for p in seq.steps[2].pulses] == ["a1a3", "b1b3", "a2b2"]
    assert seq.total_time("simultaneous") == pytest.approx(16.137)


def test_table3_wrappers_are_local():
    before, after = table3_wrappers()
    assert before.configuration.name == "B-free"
    for seq in (before, after):
        assert len(seq) == 6
        assert all(is_intra_qubit(p.pair) for s in seq.steps for p in s.pulses)


def test_unknown_bundled_name():
    with pytest.raises(ValueError):
        bundled_path("table9.json")


@pytest.mark.parametrize("seq", [table1(), table2()])
def test_round_trip(tmp_path, seq):
    path = tmp_path / "s.json"
    dump_sequence(seq, path)
    assert load_sequence(path) == seq
    assert sequence_from_dict(json.loads(json.dumps(sequence_to_dict(seq)))) == seq


def test_strength_defaults_to_one():
    seq = sequence_from_dict({"configuration": "B", "steps": [{"pulses": [{"pair": "a1b1", "duration": 0.3}]}]})
    assert seq.steps[0].pulses[0].strength == 1.0
    assert seq.jmax_fraction_fixed == 0.5


@pytest.mark.parametrize(
    "doc,match",
    [
        ([], "object"),
        ({"steps": []}, "configuration"),
        ({"configuration": "C", "steps": []}, "C"),
        ({"configuration": "A", "steps": [{"pulses": [{"pair": "a1b1", "duration": 1}]}]}, "a1b1"),
        ({"configuration": "A", "steps": [{"pulses": []}]}, "pulses"),
        ({"configuration": "A", "steps": [{"wait": 0.5, "pulses": []}]}, "wait"),
        ({"configuration": "A", "steps": [{"pulses": [{"pair": "a1a3"}]}]}, "bad pulse"),
        ({"configuration": "A", "steps": [{"pulses": [{"pair": "a1a3", "duration": -1}]}]}, "duration"),
        ({"configuration": "A", "steps": ["wait"]}, "object"),
    ],
)
def test_invalid_documents(doc, match):
    with pytest.raises(SequenceFormatError, match=match):
        sequence_from_dict(doc)


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SequenceFormatError):
        load_sequence(path)


def test_explicit_configuration_overrides_document():
    doc = {"configuration": "A", "steps": [{"wait": 1.0}]}
    assert sequence_from_dict(doc, CONFIG_B).configuration == CONFIG_B
    assert sequence_from_dict(doc, "B-free").configuration.name == "B-free"


def test_empty_sequence():
    assert sequence_from_dict({"configuration": "A"}) == PulseSequence(CONFIG_A)
    assert PulseStep.waiting(0.0).duration() == 0.0

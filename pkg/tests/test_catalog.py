import json

import pytest

from malab.catalog import (SCHEMA_VERSION, CatalogEntry, catalog, check_entry, export_catalog,
                           literal_dimension_mismatches, load_catalog,
                           rows_without_quadric_counterpart)


def test_row_counts_and_order():
    entries = catalog()
    assert [e.source_row for e in entries[:8]] == ["I1", "I2", "II", "III", "IV1", "IV2", "V1", "V2"]
    assert [e.source_row for e in entries[8:]] == [f"MN-{c}" for c in "abcde"]


def test_all_invariants_hold():
    for e in catalog():
        assert check_entry(e) == [], e.source_row


def test_fiber_dimensions():
    dims = {e.source_row: e.fiber_dim for e in catalog() if e.family == "MixedType"}
    assert dims == {"I1": 2, "I2": 2, "II": 3, "III": 5, "IV1": 7, "IV2": 7, "V1": 9, "V2": 9}


def test_rows_without_quadric_counterpart():
    assert rows_without_quadric_counterpart() == ["II", "III"]


def test_check_entry_flags_bad_rows():
    bad = CatalogEntry("MixedType", "X", "CP^4", "SO_5", 4, "Z")
    assert any("outside" in p for p in check_entry(bad))
    wrong = CatalogEntry("MixedType", "X", "Q^3", "SO_4", 5, "Z")
    assert any("dimension" in p for p in check_entry(wrong))
    assert check_entry(CatalogEntry("Other", "X", "CP^2", "SO_3", 2, "Z"))


def test_annotated_typos():
    notes = {e.source_row: e.note for e in catalog() if e.note}
    assert set(notes) == {"MN-a", "MN-b", "MN-c", "MN-d"}
    # the quaternionic row only matches once its CROSS dimension is corrected
    assert literal_dimension_mismatches() == ["MN-d"]


def test_export_roundtrip(tmp_path):
    path = tmp_path / "cat.json"
    text = export_catalog(path)
    data = json.loads(path.read_text())
    assert data["schema_version"] == SCHEMA_VERSION
    assert load_catalog(text) == catalog()


def test_load_rejects_other_schema():
    data = json.loads(export_catalog())
    data["schema_version"] = 99
    with pytest.raises(ValueError):
        load_catalog(json.dumps(data))

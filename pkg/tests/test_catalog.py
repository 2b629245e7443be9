import json
import time

import pytest

from pta.catalog import (
    CatalogError,
    Coverage,
    NotFoundError,
    builtin_catalog_document,
    controls_for_threat,
    export_catalog,
    load_catalog,
    threats_for,
    toolchain_for,
)
from pta.model import PipelineStage, Severity, SlsaLevel, StrideCategory, ThreatKey

K = ThreatKey
SRC, BLD, DEP, MON = PipelineStage.SOURCE, PipelineStage.BUILD, PipelineStage.DEPLOYMENT, PipelineStage.MONITORING

# Expected SLSA vs STRIDE coverage, L1..L4.
COVERAGE_TABLE = {
    "Spoofing": ("None", "None", "Full", "Partial"),
    "Tampering": ("Partial", "Full", "Full", "Full"),
    "Repudiation": ("Partial", "Full", "Full", "Full"),
    "InformationDisclosure": ("None", "Partial", "Full", "Full"),
    "DenialOfService": ("None", "None", "None", "None"),
    "ElevationOfPrivilege": ("None", "None", "None", "Partial"),
}

SLSA_ENTRIES = {
    K("T5", SRC): {"L3", "L4"},
    K("T3", BLD): {"L4"},
    K("T14", BLD): {"L2", "L3"},
    K("T7", BLD): {"L4"},
    K("T12", BLD): {"L3", "L4"},
    K("T10", DEP): {"L4"},
}


def _doc():
    return builtin_catalog_document()


def _errors(doc):
    with pytest.raises(CatalogError) as info:
        load_catalog(doc)
    return info.value.diagnostics


class TestBuiltinContent:
    def test_counts(self, catalog):
        assert len(catalog.assets) == 11
        assert len(catalog.agents) == 7
        assert len(catalog.entries) == 15
        assert catalog.summary() == "15 threats, 11 assets, 7 agents"

    def test_stage_distribution(self, catalog):
        assert [len(threats_for(s, catalog)) for s in (SRC, BLD, DEP, MON)] == [4, 7, 3, 1]

    def test_stage_order(self, catalog):
        assert [e.threat_id for e in threats_for(SRC, catalog)] == ["T1", "T5", "T4", "T11"]
        assert [e.threat_id for e in threats_for(MON, catalog)] == ["T6"]
        assert threats_for(BLD, catalog)[0].threat_id == "T3"

    def test_stride_points(self, catalog):
        S, T, R, I, D, E = list(StrideCategory)
        assert catalog.entry(K("T1", SRC)).stride == {S, I, E}
        assert catalog.entry(K("T14", BLD)).stride == {T, R, I, D, E}
        assert catalog.entry(K("T13", DEP)).stride == {T}

    def test_every_category_appears(self, catalog):
        union = frozenset().union(*(e.stride for e in catalog.entries))
        assert union == frozenset(StrideCategory)

    def test_dos_only_via_t14_build(self, catalog):
        holders = [e.key for e in catalog.entries if StrideCategory.DENIAL_OF_SERVICE in e.stride]
        assert holders == [K("T14", BLD)]

    @pytest.mark.parametrize("cat", list(StrideCategory))
    def test_coverage_rows(self, catalog, cat):
        assert tuple(v.value for v in catalog.coverage.row(cat)) == COVERAGE_TABLE[cat.value]

    def test_coverage_l0_is_none(self, catalog):
        assert all(catalog.coverage.at(c, SlsaLevel.L0) == Coverage.NONE for c in StrideCategory)

    def test_dos_l4(self, catalog):
        assert catalog.coverage.at(StrideCategory.DENIAL_OF_SERVICE, SlsaLevel.L4) == Coverage.NONE

    def test_slsa_level_entries(self, catalog):
        found = {e.key: {str(lv) for lv in e.slsa_levels} for e in catalog.entries if e.slsa_levels}
        assert found == SLSA_ENTRIES

    def test_ssdf_groups_closed(self, catalog):
        for e in catalog.entries:
            assert {s.group for s in e.ssdf} <= {"PO", "PS", "PW", "RV"}

    def test_ssdf_duplicate_dropped(self, catalog):
        codes = [s.code for s in catalog.entry(K("T14", BLD)).ssdf]
        assert codes.count("PS.3.1") == 1
        assert any(d.code == "duplicate-ssdf" and d.severity == Severity.INFO for d in catalog.diagnostics)

    def test_spoofing_drop_is_reported(self, catalog):
        (w,) = [d for d in catalog.diagnostics if d.severity == Severity.WARNING]
        assert w.code == "non-monotone-coverage"
        assert w.path == "/coverage/matrix/Spoofing/L4"

    def test_t14_keys_distinct(self, catalog):
        a, b = catalog.entry(K("T14", BLD)), catalog.entry(K("T14", DEP))
        assert a.description != b.description

    def test_devops_insider_note(self, catalog):
        entry = catalog.entry(K("T13", DEP))
        assert entry.agent_label("TA2") == "TA2 (DevOps Insider)"

    def test_every_control_referenced(self, catalog):
        used = {c for e in catalog.entries for c in e.controls}
        assert used == {c.id for c in catalog.controls}
        assert len(catalog.controls) == 45

    def test_controls_are_editorial(self, catalog):
        assert {c.classification for c in catalog.controls} == {"editorial"}

    def test_applicability_rows(self, catalog):
        labels = [r.stage_label for r in catalog.applicability]
        assert labels == ["Source Code", "CI Configuration", "Build & Artifact Creation", "Image Deployment"]
        build = catalog.applicability[2]
        assert str(build.slsa_applies) == "Yes (L2-L4)"

    def test_heuristics_target_catalog(self, catalog):
        assert all(h.suggests in catalog.entry_index for h in catalog.heuristics)

    def test_load_under_a_second(self):
        doc = _doc()
        t0 = time.perf_counter()
        load_catalog(doc)
        assert time.perf_counter() - t0 < 1.0


class TestQueries:
    def test_t1_controls(self, catalog):
        ctrls = controls_for_threat(K("T1", SRC), catalog)
        assert len(ctrls) == 4
        assert ctrls[0].text.startswith("MFA")

    def test_t13_controls(self, catalog):
        ctrls = controls_for_threat(K("T13", DEP), catalog)
        assert len(ctrls) == 3
        assert any("drift" in c.text.lower() for c in ctrls)

    def test_missing_key(self, catalog):
        with pytest.raises(NotFoundError):
            controls_for_threat(K("T99", SRC), catalog)

    @pytest.mark.parametrize("tid, rows", [("T9", 4), ("T14", 4), ("T1", 1), ("T99", 0)])
    def test_toolchain_rows(self, catalog, tid, rows):
        assert len(toolchain_for(tid, catalog)) == rows

    def test_toolchain_covers_t1_to_t14(self, catalog):
        for n in range(1, 15):
            assert toolchain_for(f"T{n}", catalog), f"T{n}"


class TestLoader:
    def test_round_trip(self, catalog):
        assert load_catalog(export_catalog(catalog)) == catalog

    def test_round_trip_via_text(self, catalog):
        text = json.dumps(export_catalog(catalog))
        assert load_catalog(text) == catalog

    def test_dangling_control(self):
        doc = _doc()
        doc["entries"][0]["controls"].append("nonexistent-control")
        diags = _errors(doc)
        assert any(d.path.startswith("/entries/0") and "nonexistent-control" in d.message for d in diags)

    def test_missing_coverage_cell(self):
        doc = _doc()
        del doc["coverage"]["matrix"]["DenialOfService"]["L2"]
        diags = _errors(doc)
        assert any(d.code == "missing-cell" for d in diags)

    def test_duplicate_key(self):
        doc = _doc()
        doc["entries"].append(dict(doc["entries"][0]))
        assert any(d.code == "duplicate-key" for d in _errors(doc))

    def test_bad_stride(self):
        doc = _doc()
        doc["entries"][2]["stride"] = "YNQYNY"
        (d,) = [d for d in _errors(doc) if d.path.startswith("/entries/2")]
        assert "position 2" in d.message

    def test_empty_stride(self):
        doc = _doc()
        doc["entries"][2]["stride"] = "NNNNNN"
        assert any(d.code == "empty-stride" for d in _errors(doc))

    def test_dangling_asset(self):
        doc = _doc()
        doc["entries"][0]["assets"].append("AS42")
        assert any(d.code == "dangling-asset" for d in _errors(doc))

    def test_unreferenced_control(self):
        doc = _doc()
        doc["controls"].append({"id": "orphan", "text": "Orphan", "control_type": "preventive"})
        assert any(d.code == "unreferenced-control" for d in _errors(doc))

    def test_schema_error_has_pointer(self):
        doc = _doc()
        doc["entries"][1]["assets"] = "AS1"
        diags = _errors(doc)
        assert any(d.path == "/entries/1/assets" for d in diags)

    def test_missing_top_level(self):
        doc = _doc()
        del doc["toolchain"]
        assert _errors(doc)

    def test_truncated_text(self):
        text = json.dumps(_doc())[:500]
        assert [d.code for d in _errors(text)] == ["syntax"]

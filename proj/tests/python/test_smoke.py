"""Smoke tests for the python module: the main operations round-trip
through the bindings and reproduce the pinned values."""

import pytest

try:
    import canvasscheck as cc
except ImportError:  # running against the bare extension in the build tree
    import _canvasscheck as cc

CVR_CSV = """cvr_id,scanner,batch,image_seq,mode,precinct,contest,selection,write_in_text
C1,801,43,1,advance,RW01,PRES,BIDEN,
C2,801,43,2,advance,RW01,PRES,TRUMP,
C3,801,43,3,advance,RW01,PRES,WRITE_IN,WILLIE NELSON
"""

ABBS_CSV = """source_page,location_or_scanner,batch_label,mode,trump,biden,jorgensen,write_in,undervote_blank,overvote
4 at 162,3,48,absentee_by_mail,4,93,2,0,0,0
3 at 270,Chastain,114,advance,613,605,24,?,4,0
"""

ROWS_CSV = """county,batch_name,trump,biden,jorgensen
Fulton,Scanner 3 Batch 48,4,93,2
Fulton,Scanner 1 Batch 9,10,20,0
"""


def test_image_ref_round_trip():
    ref = cc.ImageRef.parse("05162_00234_000096")
    assert ref.scanner_id == 5162
    assert ref.batch_id == 234
    assert ref.image_seq == 96
    assert str(ref) == "05162_00234_000096"


def test_parse_and_tally_cvrs():
    cvrs = cc.parse_cvr_export(CVR_CSV)
    assert len(cvrs) == 3
    assert cvrs[0].precinct == "RW01"
    tally = cc.tally_cvrs(cvrs, "PRES")
    assert tally == {"BIDEN": 1, "TRUMP": 1, "WRITE_IN": 1}


def test_parse_errors_carry_position():
    with pytest.raises(ValueError):
        cc.parse_cvr_export("not,a,valid,header\n")


def test_batch_sheet_unknowns():
    sheets = cc.parse_batch_sheets(ABBS_CSV)
    assert sheets[1].tally.write_in is None
    assert sheets[1].tally.trump == 613
    impact = cc.omission_impact(sheets)
    assert impact.total_known() == 4 + 93 + 2 + 613 + 605 + 24
    assert impact.write_in.has_unknown


def test_match_sheets():
    sheets = cc.parse_batch_sheets(ABBS_CSV)
    rows = cc.parse_audit_spreadsheet(ROWS_CSV)
    result = cc.match_sheets(sheets, rows)
    assert len(result.matched) == 1
    assert len(result.missing_sheets) == 1
    assert result.missing_sheets[0].batch_label == "114"
    assert len(result.unmatched_rows) == 1


def test_discrepancy_rate():
    assert cc.format_percent(cc.discrepancy_rate(634, 524659), 2) == "0.12%"
    with pytest.raises(ValueError):
        cc.discrepancy_rate(1, 0)


def test_hypergeometric_lcb():
    assert cc.hypergeometric_lcb(10, 5, 5, 0.95).lower_bound == 7
    assert cc.hypergeometric_lcb(916, 100, 98, 0.95).lower_bound == 862
    assert cc.hypergeometric_lcb(916, 100, 100, 0.95).lower_bound == 891


def test_sample_verification_deterministic():
    a = cc.sample_verification(916, 100, 7)
    b = cc.sample_verification(916, 100, 7)
    assert a.indices == b.indices
    assert len(set(a.indices)) == 100


def test_detect_sequence_runs():
    lines = ["cvr_id,scanner,batch,image_seq,mode,precinct,contest,selection,write_in_text"]
    # Batch 1 holds twelve distinct selections; batch 2 repeats them in order.
    for batch in (1, 2):
        for seq in range(1, 13):
            lines.append(f"B{batch}S{seq},9,{batch},{seq},advance,P1,PRES,CAND{seq},")
    cvrs = cc.parse_cvr_export("\n".join(lines) + "\n")
    scan = cc.detect_sequence_runs(cvrs, min_run=10)
    assert len(scan.runs) == 1
    assert scan.runs[0].length == 12
    assert scan.runs[0].orientation == cc.RunOrientation.SAME
    assert len(scan.groups) == 12  # each signature occurs exactly twice


def test_generate_fixture_and_account(tmp_path):
    cc.generate_fixture("no-anomaly", tmp_path)
    assert (tmp_path / "ground_truth.json").exists()
    cvrs = {
        cc.Phase.ORIGINAL: cc.load_cvr_export(str(tmp_path / "cvr_original.csv")),
        cc.Phase.RECOUNT: cc.load_cvr_export(str(tmp_path / "cvr_recount.csv")),
    }
    images = {
        cc.Phase.ORIGINAL: cc.load_image_inventory(str(tmp_path / "images_original.txt")),
        cc.Phase.RECOUNT: cc.load_image_inventory(str(tmp_path / "images_recount.txt")),
    }
    manifest = cc.load_manifest(str(tmp_path / "manifest.csv"))
    pollbook = cc.load_pollbook(str(tmp_path / "pollbook.csv"))
    ledger = cc.count_reconciliation(cvrs, images, manifest, pollbook)
    assert cc.ledger_findings(ledger) == []

    sheets = cc.load_batch_sheets(str(tmp_path / "abbs.csv"))
    rows = cc.load_audit_spreadsheet(str(tmp_path / "audit_rows.csv"))
    result = cc.match_sheets(sheets, rows)
    assert len(result.missing_sheets) == 0
    assert cc.duplicate_row_census(rows).duplicate_row_count == 0

import hashlib
import json
from dataclasses import replace

import numpy as np
import pytest

from uncerseg import (
    BackendError,
    DecodeError,
    DomainError,
    EvalRecord,
    EvalRunError,
    OracleSegmenter,
    RefineConfig,
    gen_synthetic,
    load_dataset,
    parse_setting,
    parse_settings,
    report,
    run_eval,
    write_csv,
    write_json,
)
from uncerseg.harness import CSV_HEADER, csv_bytes
from uncerseg.segmenter import Segmenter


class TestParseSetting:
    def test_boxes_only(self):
        s = parse_setting("3B:0.5")
        assert (s.n_boxes, s.ratio, s.m_points, s.k_override) == (3, 0.5, 0, None)
        assert s.label == "3B(0.5)"

    def test_points_and_boxes(self):
        s = parse_setting("5P&3B:0.75")
        assert (s.n_boxes, s.ratio, s.m_points) == (3, 0.75, 5)
        assert s.label == "5P&3B(0.75)"

    def test_k_override(self):
        s = parse_setting("3B:0.5:k0")
        assert s.k_override == 0
        assert s.label == "3B(0.5):k0"

    def test_ratio_one(self):
        assert parse_setting("1B:1.0").ratio == 1.0

    @pytest.mark.parametrize("bad", [
        "3B", "B:0.5", "3B:", "3B:0.5:k", "0B:0.5", "3B:0", "3B:1.5",
        "P&3B:0.5", "3b:0.5", "", "3B:0.5:j2",
    ])
    def test_rejects_malformed(self, bad):
        with pytest.raises(DomainError):
            parse_setting(bad)

    def test_parse_settings_list(self):
        out = parse_settings("3B:0.5, 5P&2B:0.75 ,1B:1.0:k3")
        assert [s.label for s in out] == ["3B(0.5)", "5P&2B(0.75)", "1B(1):k3"]

    def test_parse_settings_empty(self):
        with pytest.raises(DomainError):
            parse_settings("")


class TestGenSynthetic:
    def test_deterministic_bytes(self, tmp_path):
        m1 = gen_synthetic(tmp_path / "a", 4, 5, (48, 48))
        m2 = gen_synthetic(tmp_path / "b", 4, 5, (48, 48))

        def digest(root):
            h = hashlib.sha256()
            for p in sorted(root.rglob("*.png")):
                h.update(p.name.encode())
                h.update(p.read_bytes())
            return h.hexdigest()

        assert digest(tmp_path / "a") == digest(tmp_path / "b")
        assert (tmp_path / "a" / "manifest.json").read_bytes() == \
            (tmp_path / "b" / "manifest.json").read_bytes()
        assert m1 != m2  # distinct paths, same content

    def test_seed_changes_content(self, tmp_path):
        gen_synthetic(tmp_path / "a", 2, 1, (48, 48))
        gen_synthetic(tmp_path / "b", 2, 2, (48, 48))
        a = (tmp_path / "a" / "masks" / "syn0000.png").read_bytes()
        b = (tmp_path / "b" / "masks" / "syn0000.png").read_bytes()
        assert a != b

    def test_corpus_properties(self, tiny_corpus):
        _, dataset = tiny_corpus
        assert len(dataset.entries) == 8
        for e in dataset.entries:
            assert e.image.width == 64 and e.image.height == 64
            frac = float(e.mask.values.mean())
            assert 0.02 <= frac <= 0.45

    def test_count_validated(self, tmp_path):
        with pytest.raises(DomainError):
            gen_synthetic(tmp_path / "x", 0, 0, (32, 32))


class TestLoadDataset:
    def test_round_trip(self, tiny_corpus):
        manifest, dataset = tiny_corpus
        again = load_dataset(manifest)
        assert [e.id for e in again.entries] == [e.id for e in dataset.entries]
        np.testing.assert_array_equal(again.entries[0].mask.values,
                                      dataset.entries[0].mask.values)

    def test_missing_file_names_the_entry(self, tmp_path):
        manifest = tmp_path / "manifest.json"
        manifest.write_text(json.dumps({
            "entries": [{"id": "ghost", "image_path": "img.png",
                         "mask_path": "msk.png"}]}))
        with pytest.raises(DecodeError, match="ghost"):
            load_dataset(manifest)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DecodeError):
            load_dataset(tmp_path / "none.json")


def _oracle_factory(entry):
    return OracleSegmenter(entry.mask)


class _ExplodingFactory:
    """Fails for chosen entry ids, delegates to the oracle otherwise."""

    def __init__(self, bad_ids):
        self.bad_ids = set(bad_ids)

    def __call__(self, entry):
        if entry.id in self.bad_ids:
            return _FailingSegmenter()
        return OracleSegmenter(entry.mask)


class _FailingSegmenter(Segmenter):
    def segment_one(self, image, box, points):
        raise BackendError("scripted backend failure")


@pytest.fixture(scope="module")
def corpus10(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus10")
    return load_dataset(gen_synthetic(out, 10, 6, (48, 48)))


class TestRunEval:
    CFG = RefineConfig(seed=5)

    def test_records_cover_the_grid(self, tiny_corpus):
        _, dataset = tiny_corpus
        settings = parse_settings("3B:0.5,2B:0.75")
        records = run_eval(dataset, settings, self.CFG, _oracle_factory)
        assert len(records) == 16
        labels = [r.setting for r in records]
        # request order, then id order within each setting
        assert labels == ["3B(0.5)"] * 8 + ["2B(0.75)"] * 8
        ids = [r.id for r in records[:8]]
        assert ids == sorted(ids)

    def test_accepts_a_single_shared_backend(self, tiny_corpus):
        _, dataset = tiny_corpus
        one = dataset.entries[0]
        sub = replace(dataset, entries=(one,))
        backend = OracleSegmenter(one.mask)
        records = run_eval(sub, parse_settings("3B:0.5"), self.CFG, backend)
        assert len(records) == 1 and not records[0].error

    def test_acceptance_implies_uncertainty_drop(self, tiny_corpus):
        _, dataset = tiny_corpus
        records = run_eval(dataset, parse_settings("3B:0.5"), self.CFG,
                           _oracle_factory)
        for r in records:
            if r.accepted:
                assert r.u_after < r.u_before
            else:
                assert r.u_after == r.u_before

    def test_error_rows_recorded_at_the_budget_boundary(self, corpus10):
        # 1 bad entry of 10 is exactly the tolerated failure fraction
        bad = _ExplodingFactory({corpus10.entries[0].id})
        records = run_eval(corpus10, parse_settings("3B:0.5"), self.CFG, bad)
        errs = [r for r in records if r.error]
        assert len(errs) == 1
        assert "BackendError" in errs[0].error
        assert errs[0].id == corpus10.entries[0].id
        assert len(records) == 10

    def test_too_many_failures_abort(self, corpus10):
        bad = _ExplodingFactory({e.id for e in corpus10.entries[:2]})
        with pytest.raises(EvalRunError):
            run_eval(corpus10, parse_settings("3B:0.5"), self.CFG, bad)


class TestEvalRecordValidation:
    GOOD = dict(id="x", setting="3B(0.5)", dice_before=0.5, iou_before=0.4,
                dice_after=0.6, iou_after=0.5, accepted=True,
                u_before=0.3, u_after=0.2, wall_ms=0.0)

    def test_accepted_requires_strict_drop(self):
        EvalRecord(**self.GOOD)
        bad = dict(self.GOOD, u_after=0.3)
        with pytest.raises(DomainError):
            EvalRecord(**bad)

    def test_error_rows_skip_validation(self):
        EvalRecord(**dict(self.GOOD, u_after=0.9, error="BackendError: x"))


class TestReports:
    def _records(self):
        base = dict(dice_before=0.5, iou_before=0.4, accepted=True,
                    u_before=0.3, u_after=0.2, wall_ms=0.0)
        return [
            EvalRecord(id="a", setting="3B(0.5)", dice_after=0.7, iou_after=0.6, **base),
            EvalRecord(id="b", setting="3B(0.5)", dice_after=0.9, iou_after=0.8, **base),
            EvalRecord(id="c", setting="3B(0.5)", dice_before=0.0, iou_before=0.0,
                       dice_after=0.0, iou_after=0.0, accepted=False,
                       u_before=0.0, u_after=0.0, wall_ms=0.0,
                       error="BackendError: boom"),
        ]

    def test_aggregates(self):
        sweep = report(self._records())
        assert len(sweep.rows) == 1
        row = sweep.rows[0]
        assert row.count == 3 and row.failures == 1
        assert row.dice_after_mean == pytest.approx(0.8)
        assert row.dice_after_std == pytest.approx(0.1)
        assert row.acceptance_rate == 1.0

    def test_csv_shape(self, tmp_path):
        out = tmp_path / "r.csv"
        write_csv(self._records(), out)
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[0] == ("id,setting,dice_before,iou_before,dice_after,"
                            "iou_after,accepted,u_before,u_after,wall_ms")
        assert lines[1].startswith("a,3B(0.5),0.5,0.4,0.7,0.6,true,")
        # error rows keep the id and setting, blank the metrics
        assert lines[3] == "c,3B(0.5),,,,,error,,,0"
        assert out.read_text().endswith("\n")

    def test_csv_float_format_is_12g(self, tmp_path):
        rec = EvalRecord(id="a", setting="s", dice_before=1 / 3, iou_before=0.25,
                         dice_after=0.5, iou_after=1 / 3, accepted=False,
                         u_before=0.1, u_after=0.1, wall_ms=0.0)
        out = tmp_path / "r.csv"
        write_csv([rec], out)
        assert "0.333333333333" in out.read_text()

    def test_csv_bytes_deterministic(self, tiny_corpus):
        _, dataset = tiny_corpus
        cfg = RefineConfig(seed=5)
        r1 = run_eval(dataset, parse_settings("3B:0.5"), cfg, _oracle_factory)
        r2 = run_eval(dataset, parse_settings("3B:0.5"), cfg, _oracle_factory)
        assert csv_bytes(r1) == csv_bytes(r2)

    def test_json_report(self, tmp_path):
        records = self._records()
        out = tmp_path / "r.json"
        write_json(records, report(records), out)
        doc = json.loads(out.read_text())
        assert len(doc["records"]) == 3
        assert doc["settings"][0]["setting"] == "3B(0.5)"
        assert doc["records"][2]["error"].startswith("BackendError")

    def test_report_needs_records(self):
        with pytest.raises(DomainError):
            report([])

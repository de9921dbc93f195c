import json
import logging

import numpy as np
import pytest

from sigverify.datasets import (
    SignerRecord,
    SynthParams,
    format_csv,
    format_svc2004,
    generate_synthetic,
    load_dataset,
    parse_csv_text,
    parse_svc2004_file,
    parse_svc2004_text,
    scan_csv_dir,
    scan_svc2004_dir,
    split,
    write_corpus,
)
from sigverify.errors import (
    BadColumnCount,
    EmptyDataset,
    HeaderMismatch,
    NonNumericField,
    NotEnoughSamples,
    UnparsableFile,
)
from sigverify.signals import Label, validate

MINIMAL = "2\n0 0 0 1 0 0 100\n5 5 10 1 0 0 120\n"


def svc_text(n, seed, columns=7):
    rng = np.random.default_rng(seed)
    rows = [str(n)]
    for k in range(n):
        x, y = rng.integers(0, 5000, 2)
        row = [x, y, 10 * k, 1]
        if columns == 7:
            row += [rng.integers(0, 3600), rng.integers(0, 900), rng.integers(1, 1024)]
        rows.append(" ".join(str(int(v)) for v in row))
    return "\n".join(rows) + "\n"


class TestSvcParse:
    def test_minimal(self):
        sig = parse_svc2004_text(MINIMAL)
        assert len(sig.points) == 2
        np.testing.assert_array_equal(sig.column("pressure"), [100.0, 120.0])
        assert sig.points[1].x == 5.0 and sig.points[1].t == 10.0
        assert all(p.pen_down for p in sig.points)

    def test_header_mismatch(self):
        with pytest.raises(HeaderMismatch) as exc:
            parse_svc2004_text("3\n0 0 0 1 0 0 100\n5 5 10 1 0 0 120\n")
        assert exc.value.line == 1

    def test_four_columns_zero_fill(self):
        sig = parse_svc2004_text("2\n0 0 0 1\n5 5 10 0\n")
        for name in ("pressure", "azimuth", "altitude"):
            np.testing.assert_array_equal(sig.column(name), [0.0, 0.0])
        assert sig.points[0].pen_down and not sig.points[1].pen_down

    def test_bad_column_count_line(self):
        with pytest.raises(BadColumnCount) as exc:
            parse_svc2004_text("3\n0 0 0 1 0 0 1\n1 1 10 1 0 0\n2 2 20 1 0 0 1\n")
        assert exc.value.line == 3

    def test_non_numeric_line(self):
        with pytest.raises(NonNumericField) as exc:
            parse_svc2004_text("2\n0 0 0 1 0 0 1\n1 1 x 1 0 0 1\n")
        assert exc.value.line == 3

    def test_constant_timestamps_get_10ms(self):
        sig = parse_svc2004_text("3\n0 0 5 1\n1 1 5 1\n2 2 5 1\n")
        np.testing.assert_array_equal(sig.column("t"), [0.0, 10.0, 20.0])

    @pytest.mark.parametrize("columns", [4, 7])
    @pytest.mark.parametrize("seed", range(3))
    def test_round_trip(self, columns, seed):
        text = svc_text(25, seed, columns)
        a = parse_svc2004_text(text)
        b = parse_svc2004_text(format_svc2004(a, columns))
        assert a.points == b.points
        assert format_svc2004(a, columns) == text

    def test_parsed_is_valid(self):
        validate(parse_svc2004_text(svc_text(30, 9)))

    def test_file_name_convention(self, tmp_path):
        p = tmp_path / "U7S23.TXT"
        p.write_text(MINIMAL)
        sig = parse_svc2004_file(p)
        assert sig.signer_id == "7" and sig.sample_index == 23


class TestSvcScan:
    def test_forty_files(self, tmp_path):
        for s in range(1, 41):
            (tmp_path / f"U1S{s}.TXT").write_text(svc_text(20, s))
        ds = scan_svc2004_dir(tmp_path)
        rec = ds.signer("1")
        assert len(rec.genuine) == 20 and len(rec.forgeries) == 20
        assert [s.sample_index for s in rec.genuine] == list(range(1, 21))
        assert all(s.label is Label.FORGERY for s in rec.forgeries)

    def test_configurable_split_index(self, tmp_path):
        for s in range(1, 11):
            (tmp_path / f"u2s{s}.txt").write_text(svc_text(12, s))
        rec = scan_svc2004_dir(tmp_path, genuine_per_user=4).signer("2")
        assert (len(rec.genuine), len(rec.forgeries)) == (4, 6)

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyDataset):
            scan_svc2004_dir(tmp_path)

    def test_ignores_other_names(self, tmp_path, caplog):
        (tmp_path / "U1S1.TXT").write_text(MINIMAL)
        (tmp_path / "readme.md").write_text("hello")
        with caplog.at_level(logging.WARNING):
            ds = scan_svc2004_dir(tmp_path)
        assert len(ds.signers) == 1
        assert "readme.md" in caplog.text

    def test_unparsable_listed_and_skipped(self, tmp_path):
        (tmp_path / "U1S1.TXT").write_text(MINIMAL)
        (tmp_path / "U2S1.TXT").write_text("5\n1 2 3 4\n")
        ds = scan_svc2004_dir(tmp_path)
        assert [s.signer_id for s in ds.signers] == ["1"]
        assert len(ds.skipped) == 1 and "U2S1.TXT" in ds.skipped[0][0]

    def test_all_unparsable(self, tmp_path):
        (tmp_path / "U2S1.TXT").write_text("5\n1 2 3 4\n")
        with pytest.raises(UnparsableFile) as exc:
            scan_svc2004_dir(tmp_path)
        assert len(exc.value.offenders) == 1


class TestCsv:
    def test_round_trip(self, synth_small):
        sig = synth_small.signers[0].forgeries[2]
        again = parse_csv_text(format_csv(sig), signer_id=sig.signer_id, sample_index=sig.sample_index, label=sig.label)
        assert again.points == sig.points

    def test_missing_column(self):
        with pytest.raises(HeaderMismatch):
            parse_csv_text("x,y,t\n0,0,0\n1,1,1\n")

    def test_scan_round_trip(self, tmp_path, synth_small):
        n = write_corpus(synth_small, tmp_path)
        assert n == 3 * 12
        ds = scan_csv_dir(tmp_path)
        assert [s.signer_id for s in ds.signers] == [s.signer_id for s in synth_small.signers]
        for a, b in zip(ds.signers, synth_small.signers):
            assert [s.points for s in a.genuine] == [s.points for s in b.genuine]
            assert [s.points for s in a.forgeries] == [s.points for s in b.forgeries]
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert len(manifest["signers"]) == 3

    def test_load_dataset_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            load_dataset(tmp_path, "mcyt-binary")

    def test_empty_csv_dir(self, tmp_path):
        with pytest.raises(EmptyDataset):
            scan_csv_dir(tmp_path)


class TestSynthetic:
    def test_deterministic(self):
        p = SynthParams(seed=3, n_signers=2, n_genuine=3, n_forgery=3, n_points=50)
        a, b = generate_synthetic(p), generate_synthetic(p)
        assert a == b

    def test_seed_changes_corpus(self):
        a = generate_synthetic(SynthParams(seed=1, n_signers=1, n_genuine=1, n_forgery=1))
        b = generate_synthetic(SynthParams(seed=2, n_signers=1, n_genuine=1, n_forgery=1))
        assert a.signers[0].genuine[0].points != b.signers[0].genuine[0].points

    def test_shape_and_validity(self):
        ds = generate_synthetic(SynthParams(seed=5, n_signers=3, n_genuine=4, n_forgery=2, n_points=80))
        assert [s.signer_id for s in ds.signers] == ["s01", "s02", "s03"]
        for rec in ds.signers:
            assert len(rec.genuine) == 4 and len(rec.forgeries) == 2
            for sig in rec.genuine + rec.forgeries:
                assert len(sig.points) == 80
                validate(sig)
                assert np.all(sig.column("pressure") >= 0)

    @pytest.mark.parametrize("kw", [{"n_signers": 0}, {"distortion": 1.5}, {"distortion": -0.1}, {"n_points": 1}])
    def test_bad_params(self, kw):
        with pytest.raises(ValueError):
            SynthParams(**kw)

    @pytest.mark.parametrize("seed", range(1, 11))
    def test_forgeries_farther_than_genuine(self, seed):
        ds = generate_synthetic(SynthParams(seed=seed, n_signers=3, n_genuine=8, n_forgery=8, distortion=0.3))

        def vec(sig):
            t = sig.column("t")
            grid = np.linspace(t[0], t[-1], 100)
            return np.concatenate([np.interp(grid, t, sig.column(c)) for c in ("x", "y", "pressure")])

        for rec in ds.signers:
            G = [vec(s) for s in rec.genuine]
            F = [vec(s) for s in rec.forgeries]
            within = np.mean([np.linalg.norm(a - b) for i, a in enumerate(G) for b in G[i + 1:]])
            across = np.mean([np.linalg.norm(a - b) for a in G for b in F])
            assert within < across


class TestSplit:
    def _rec(self, ng=20, nf=20):
        ds = generate_synthetic(SynthParams(seed=1, n_signers=1, n_genuine=ng, n_forgery=nf, n_points=20))
        return ds.signers[0]

    def test_ten_ten(self):
        s = split(self._rec(), 10, 10, seed=0)
        assert len(s.train_genuine) == len(s.test_genuine) == 10
        ids = {x.sample_index for x in s.train_genuine}
        assert ids.isdisjoint({x.sample_index for x in s.test_genuine})
        assert ids | {x.sample_index for x in s.test_genuine} == set(range(1, 21))

    def test_too_many(self):
        with pytest.raises(NotEnoughSamples):
            split(self._rec(), 21, 5)
        # taking all 20 would leave no genuine test sample
        with pytest.raises(NotEnoughSamples):
            split(self._rec(), 20, 5)

    def test_deterministic_and_seeded(self):
        rec = self._rec()
        a, b = split(rec, 10, 10, 4), split(rec, 10, 10, 4)
        assert a == b
        assert split(rec, 10, 10, 5).train_genuine != a.train_genuine

    def test_no_forgeries(self):
        rec = SignerRecord("z", self._rec().genuine)
        s = split(rec, 5, 0)
        assert s.test_forgery == () and len(s.test_genuine) == 15
        with pytest.raises(NotEnoughSamples):
            split(rec, 5, 1)

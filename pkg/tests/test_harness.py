import json
from dataclasses import replace

import numpy as np
import pytest

from eqsim.channel import PRESETS, realize_state_space, simulate, snr_to_noise_var
from eqsim.cli import ConfigError, main, parse_snr
from eqsim.equalizer import hard_decide, lmmse_equalize
from eqsim.harness import (
    CSV_FIELDS,
    BerRecord,
    ExperimentConfig,
    ber_confidence_interval,
    block_rng,
    read_results,
    run_ber_experiment,
    verify,
    write_results,
)

SMALL = dict(block_length=128, min_bits=2048, min_errors=1, max_bits=4096)


def record(**kw):
    base = dict(snr_db=10.0, scheme="lmmse", iters=1.0, bits=1000, errors=12, ber=0.012,
                negvar_count=0, clamp_count=0, wall_time_ms=3.25, seed=42)
    base.update(kw)
    return BerRecord(**base)


class TestRecords:
    def test_bits_positive(self):
        with pytest.raises(ValueError):
            record(bits=0)

    def test_confidence_interval(self):
        lo, hi = ber_confidence_interval(12, 1000)
        assert lo < 0.012 < hi
        # exact interval for 0 errors: upper limit 1 - 0.025**(1/n)
        lo0, hi0 = ber_confidence_interval(0, 1000)
        assert lo0 == 0.0 and hi0 == pytest.approx(1 - 0.025 ** (1 / 1000), rel=1e-9)

    def test_block_rng_independent_streams(self):
        a = block_rng(42, 0, 0).standard_normal(4)
        np.testing.assert_array_equal(a, block_rng(42, 0, 0).standard_normal(4))
        assert not np.array_equal(a, block_rng(42, 0, 1).standard_normal(4))
        assert not np.array_equal(a, block_rng(42, 1, 0).standard_normal(4))


class TestResultFiles:
    def test_empty_is_header_only(self, tmp_path):
        p = tmp_path / "r.csv"
        write_results([], p)
        assert p.read_text() == ",".join(CSV_FIELDS) + "\n"

    @pytest.mark.parametrize("suffix", [".csv", ".jsonl"])
    def test_round_trip(self, tmp_path, suffix):
        p = tmp_path / f"r{suffix}"
        r = record(iters=13.5, ber=0.0123456789)
        write_results([r], p)
        back = read_results(p)
        assert back == [replace(r, ber=0.0123457)]

    def test_six_significant_digits(self, tmp_path):
        p = tmp_path / "r.csv"
        write_results([record(ber=1 / 3, snr_db=9.99999999)], p)
        row = p.read_text().splitlines()[1].split(",")
        assert row[0] == "10" and row[5] == "0.333333"

    def test_jsonl_numbers(self, tmp_path):
        p = tmp_path / "r.jsonl"
        write_results([record()], p)
        row = json.loads(p.read_text())
        assert list(row) == list(CSV_FIELDS)
        assert row["ber"] == 0.012 and row["bits"] == 1000

    def test_timing_suppressed(self, tmp_path):
        p = tmp_path / "r.csv"
        write_results([record()], p, timing=False)
        assert read_results(p)[0].wall_time_ms == 0.0

    def test_io_error_has_path(self, tmp_path):
        bad = tmp_path / "missing" / "r.csv"
        with pytest.raises(OSError, match="missing"):
            write_results([record()], bad)


class TestExperiment:
    def test_noiseless_zero_ber(self):
        cfg = ExperimentConfig(snr_db=(80.0,), schemes=("lmmse", "minka_A", "minka_B", "bcjr"), **SMALL)
        records = run_ber_experiment(cfg)
        assert [r.errors for r in records] == [0, 0, 0, 0]
        assert all(r.bits == 4096 for r in records)

    def test_noiseless_coded(self):
        cfg = ExperimentConfig(snr_db=(80.0,), schemes=("coded_std", "coded_minka"), info_block_length=128,
                               min_bits=256, min_errors=1, max_bits=256, outer_iters=1, coded_inner_iters=2)
        assert [r.errors for r in run_ber_experiment(cfg)] == [0, 0]

    def test_deterministic(self):
        cfg = ExperimentConfig(snr_db=(8.0,), schemes=("lmmse", "minka_B"), **SMALL)
        a, b = run_ber_experiment(cfg), run_ber_experiment(cfg)
        strip = [replace(r, wall_time_ms=0.0) for r in a]
        assert strip == [replace(r, wall_time_ms=0.0) for r in b]

    def test_stopping_rule(self):
        cfg = ExperimentConfig(snr_db=(8.0,), schemes=("lmmse",), block_length=100, min_bits=250,
                               min_errors=1, max_bits=10**6)
        assert run_ber_experiment(cfg)[0].bits == 300
        cfg = replace(cfg, min_errors=10**9, max_bits=1000)
        assert run_ber_experiment(cfg)[0].bits == 1000

    def test_block_independence(self):
        # the record equals the sum over independently regenerated blocks
        cfg = ExperimentConfig(snr_db=(6.0, 9.0), schemes=("lmmse",), block_length=64, min_bits=320,
                               min_errors=0, max_bits=320)
        model = realize_state_space(cfg.channel)
        records = run_ber_experiment(cfg)
        for i, snr in enumerate(cfg.snr_db):
            nv = snr_to_noise_var(snr, cfg.channel)
            errors = 0
            for blk in range(5):
                rng = block_rng(cfg.base_seed, i, blk)
                x = rng.choice(np.array([1.0, -1.0]), size=64)
                obs = simulate(model, x, nv, rng)
                errors += int(np.sum(hard_decide(lmmse_equalize(model, obs)) != x))
            assert records.get("lmmse", snr).errors == errors

    def test_bcjr_skipped_on_iir(self):
        cfg = ExperimentConfig(channel=PRESETS["iir09"], snr_db=(10.0,), schemes=("lmmse", "bcjr"), **SMALL)
        records = run_ber_experiment(cfg)
        assert [r.scheme for r in records] == ["lmmse"]
        assert records.skipped[0][:2] == (10.0, "bcjr")

    @pytest.mark.parametrize("kw", [dict(schemes=("viterbi",)), dict(block_length=0), dict(min_bits=0)])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)

    @pytest.mark.slow
    def test_lmmse_decreasing_in_snr(self):
        cfg = ExperimentConfig(snr_db=(10.0, 13.0, 16.0), schemes=("lmmse",), min_bits=200_000, min_errors=100)
        bers = [r.ber for r in run_ber_experiment(cfg)]
        assert bers[0] > bers[1] > bers[2]


class TestVerify:
    def test_default_passes(self):
        lines = []
        assert verify(trials=10, out=lines.append) == 0
        assert len(lines) == 4 and all(line.startswith("PASS") for line in lines)

    def test_perturbation_detected(self):
        lines = []
        assert verify(trials=10, perturb=1e-3, out=lines.append) == 1
        assert any(line.startswith("FAIL") for line in lines)

    def test_trial_count(self):
        lines = []
        verify(trials=20, out=lines.append)
        assert "(20 trials)" in lines[0] and "(2000 trials)" in lines[3]


class TestCli:
    def test_parse_snr(self):
        assert parse_snr("6:12:2") == (6.0, 8.0, 10.0, 12.0)
        assert parse_snr("0:1:0.1")[-1] == 1.0
        assert parse_snr("7,9.5") == (7.0, 9.5)
        for bad in ("1:0:1", "0:1:0", "a,b", "1:2"):
            with pytest.raises(ConfigError):
                parse_snr(bad)

    def test_run_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        argv = ["run", "--snr", "8", "--schemes", "lmmse,minka_B", "--block", "128", "--min-bits", "1024",
                "--min-errors", "1", "--out", str(out)]
        assert main(argv) == 0
        rows = read_results(out)
        assert [r.scheme for r in rows] == ["lmmse", "minka_B"]
        assert all(r.wall_time_ms == 0.0 for r in rows)
        assert "lmmse" in capsys.readouterr().out

    def test_timing_flag(self, tmp_path):
        out = tmp_path / "r.csv"
        main(["run", "--snr", "8", "--schemes", "lmmse", "--block", "128", "--min-bits", "1024", "--timing",
              "--out", str(out)])
        assert read_results(out)[0].wall_time_ms > 0

    @pytest.mark.parametrize(
        "extra",
        [
            ["--channel", "bogus"],
            ["--channel", "iir:1/1,-1.5"],
            ["--snr", "3:1:1"],
            ["--schemes", "viterbi"],
            ["--alpha", "geo:2,1.2"],
            ["--code", "9,171"],
            ["--iters", "0"],
        ],
    )
    def test_config_errors(self, extra, tmp_path, capsys):
        assert main(["run", "--out", str(tmp_path / "r.csv"), *extra]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_argparse_error_exit_code(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--schedule", "C"])
        assert exc.value.code == 2

    def test_unwritable_output(self, tmp_path):
        argv = ["run", "--snr", "8", "--schemes", "lmmse", "--block", "64", "--min-bits", "64",
                "--out", str(tmp_path / "no" / "r.csv")]
        assert main(argv) == 2

    def test_verify_exit_codes(self, capsys):
        assert main(["verify", "--trials", "4"]) == 0
        assert main(["verify", "--trials", "4", "--perturb", "1e-3"]) == 1
        assert main(["verify", "--trials", "0"]) == 2
        assert "FAIL" in capsys.readouterr().out

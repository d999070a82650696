"""CLI surface: exit codes, formats, roundtrips, stream discipline."""

import json
import os

import pytest

from densediv import experiments
from densediv.cli import (
    main,
    omega_profile_to_csv,
    omega_profile_to_json,
    parse_omega_profile_csv,
    parse_omega_profile_json,
    parse_scan_result_csv,
    parse_scan_result_json,
    parse_theta_profile_csv,
    parse_theta_profile_json,
    scan_result_to_csv,
    scan_result_to_json,
    theta_profile_to_csv,
    theta_profile_to_json,
)


@pytest.fixture(scope="module")
def sample_results():
    return [
        experiments.scan_density(300, 2, None, "phi"),
        experiments.scan_density(300, "3/2", (2, "1/2"), "both"),
        experiments.count_B(200, 3, 9),
        experiments.landau_scan(200, 3),
        experiments.phi_prime_gap_scan(300, "1/20", "1/4"),
        experiments.shifted_prime_scan(200, 2, 4),
        experiments.phi_ratio_small(200, "1/2"),
        experiments.nondense_scan(300, "1/4"),
        experiments.scan_full_range_density(200, 2),
    ]


def test_scan_result_json_roundtrip(sample_results):
    for r in sample_results:
        assert parse_scan_result_json(scan_result_to_json(r)) == r


def test_scan_result_csv_roundtrip(sample_results):
    for r in sample_results:
        assert parse_scan_result_csv(scan_result_to_csv(r)) == r


def test_theta_profile_roundtrips():
    prof = experiments.theta_profile(300, ["1/2", "3/5"])
    assert parse_theta_profile_json(theta_profile_to_json(prof)) == prof
    assert parse_theta_profile_csv(theta_profile_to_csv(prof)) == prof


def test_omega_profile_roundtrips():
    prof = experiments.omega_phi_profile(300)
    assert parse_omega_profile_json(omega_profile_to_json(prof)) == prof
    assert parse_omega_profile_csv(omega_profile_to_csv(prof)) == prof


def test_cli_scan_density_json(capsys):
    assert main(["scan-density", "--x", "500", "--u", "2", "--target", "phi"]) == 0
    out, err = capsys.readouterr()
    doc = json.loads(out)
    assert doc["type"] == "scan_result"
    assert doc["x"] == 500
    r = experiments.scan_density(500, 2, None, "phi")
    assert doc["hits"] == r.hits


def test_cli_progress_stays_on_stderr(capsys):
    code = main(["scan-density", "--x", "2000", "--u", "2", "--target", "phi",
                 "--segment-length", "256", "--progress"])
    assert code == 0
    out, err = capsys.readouterr()
    json.loads(out)  # stdout is exactly one parseable document
    assert "progress" in err


def test_cli_output_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code = main(["count-b", "--x", "100", "--y", "2", "--z", "4",
                 "--format", "csv", "--output", str(path)])
    assert code == 0
    out, _ = capsys.readouterr()
    assert out == ""
    parsed = parse_scan_result_csv(path.read_text())
    assert (parsed.x, parsed.hits) == (100, experiments.count_B(100, 2, 4).hits)


def test_cli_usage_errors(capsys):
    # --h without --c
    assert main(["scan-density", "--x", "10", "--u", "2", "--h", "1"]) == 2
    # domain error: u below 1
    assert main(["scan-density", "--x", "10", "--u", "1/2"]) == 2
    # bad rational literal is an argparse error
    with pytest.raises(SystemExit) as exc:
        main(["scan-density", "--x", "10", "--u", "abc"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main([])
    capsys.readouterr()


def test_cli_capacity_is_runtime_error(capsys):
    assert main(["scan-density", "--x", str(2**32), "--u", "2"]) == 1
    _, err = capsys.readouterr()
    assert "error" in err


def test_cli_selftests_pass(capsys):
    cases = [
        ["phi", "--n", "12", "--selftest"],
        ["scan-density", "--x", "99999", "--u", "2", "--selftest"],
        ["scan-density", "--x", "99999", "--u", "3/2", "--h", "2", "--c", "1/2", "--selftest"],
        ["full-range", "--x", "99999", "--h", "1", "--selftest"],
        ["count-b", "--x", "99999", "--y", "4", "--z", "8", "--selftest"],
        ["nondense", "--x", "99999", "--c", "1/4", "--selftest"],
        ["prime-gap", "--x", "99999", "--g", "1/20", "--eps", "1/4", "--selftest"],
        ["shifted-prime", "--w", "99999", "--a", "2", "--b", "4", "--selftest"],
        ["landau", "--x", "99999", "--d", "3", "--selftest"],
        ["phi-ratio", "--x", "99999", "--eps", "1/2", "--selftest"],
        ["theta-profile", "--x", "99999", "--grid", "1/2,3/5", "--selftest"],
        ["omega-profile", "--x", "99999", "--selftest"],
        ["sieve", "--limit", "99999", "--selftest"],
    ]
    for argv in cases:
        assert main(argv) == 0, argv
        out, err = capsys.readouterr()
        assert "selftest ok" in err, argv
        assert out.strip(), argv


def test_cli_cache_dir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DENSE_CACHE_DIR", str(tmp_path))
    assert main(["scan-density", "--x", "5000", "--u", "2",
                 "--segment-length", "1024"]) == 0
    capsys.readouterr()
    files = [f for f in os.listdir(tmp_path) if f.endswith(".tdsv")]
    assert len(files) == 5
    # explicit flag beats the environment
    other = tmp_path / "explicit"
    other.mkdir()
    assert main(["scan-density", "--x", "5000", "--u", "2",
                 "--segment-length", "1024", "--cache-dir", str(other)]) == 0
    capsys.readouterr()
    assert any(f.endswith(".tdsv") for f in os.listdir(other))


def test_cli_sieve_summary(capsys):
    assert main(["sieve", "--limit", "50000", "--segment-length", "16384"]) == 0
    out, _ = capsys.readouterr()
    doc = json.loads(out)
    assert doc["type"] == "sieve_summary"
    assert doc["segment_count"] == 4
    assert doc["built"] == 4


def test_cli_phi_info(capsys):
    assert main(["phi", "--n", "12"]) == 0
    out, _ = capsys.readouterr()
    doc = json.loads(out)
    assert doc["phi"] == 4 and doc["lambda"] == 2
    assert doc["divisors"] == [1, 2, 3, 4, 6, 12]
    assert doc["max_divisor_ratio"] == "2"

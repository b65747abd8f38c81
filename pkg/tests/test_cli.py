import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weaksym import cli
from weaksym.cli import ConfigError, RunConfig, main, parse_config_text
from weaksym.verification import CSV_COLUMNS

configs = st.builds(
    RunConfig,
    command=st.sampled_from(["certify", "sequences", "identities"]),
    dim=st.sampled_from([None, 2, 3]),
    levels=st.one_of(st.none(), st.integers(3, 8)),
    mu=st.floats(0.01, 100),
    lam=st.floats(0, 0.9),
    compliance=st.sampled_from(["planar", "dim-aware"]),
    out=st.one_of(st.none(), st.from_regex(r"[a-z]{1,8}\.txt", fullmatch=True)),
    format=st.sampled_from(["pretty", "csv"]),
    timestamp=st.booleans(),
)


@settings(max_examples=60, deadline=None)
@given(configs)
def test_config_roundtrip(cfg):
    assert RunConfig.from_text(cfg.to_text()) == cfg


def test_config_parsing_errors():
    assert parse_config_text("# comment\nlambda = 2.5\n\nmu=1 # trailing\n") == {"lam": 2.5, "mu": 1.0}
    for bad in ("dim", "colour=red", "dim=two", "timestamp=maybe"):
        with pytest.raises(ConfigError):
            parse_config_text(bad)
    for kwargs in ({"command": "plot"}, {"command": "certify", "dim": 4},
                   {"command": "converge"}, {"command": "converge", "family": "3d", "dim": 2},
                   {"command": "certify", "mu": -1.0}, {"command": "certify", "levels": 2}):
        with pytest.raises(ConfigError):
            RunConfig(**kwargs)


def test_certify_exit_zero(capsys):
    assert main(["certify", "--dim", "2", "--no-timestamp", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    rows = {tuple(line.split(",")[:2]) for line in out.splitlines()[1:]}
    assert ("BDM1_ROW_STRESS", "2") in rows and ("SIGMA_SIMPLIFIED", "2") in rows
    assert "no" not in [line.split(",")[-1] for line in out.splitlines()[1:]]


def test_sequences_3d(capsys):
    assert main(["sequences", "--dim", "3", "--no-timestamp", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) > 1
    for line in lines[1:]:
        defects = line.split(",")[3].split()
        assert set(defects) == {"0"}


def test_converge_csv_is_reproducible(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        code = main(["converge", "--family", "2d-bdm", "--levels", "3", "--format", "csv",
                     "--no-timestamp", "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].decode().splitlines()[0].split(",") == list(CSV_COLUMNS)
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")]


def test_timestamp_header(capsys):
    assert main(["sequences", "--dim", "2"]) == 0
    assert capsys.readouterr().out.startswith("# generated ")


def test_config_file_and_flag_override(tmp_path, capsys):
    conf = tmp_path / "run.cfg"
    conf.write_text("family = 2d-simplified\nlevels = 5\nformat = csv\ntimestamp = false\n")
    cfg = cli.config_from_args(["converge", "--config", str(conf), "--levels", "3"])
    assert (cfg.family, cfg.levels, cfg.format, cfg.timestamp) == ("2d-simplified", 3, "csv", False)
    assert main(["converge", "--config", str(tmp_path / "missing.cfg")]) == 2
    conf.write_text("family = q9\n")
    assert main(["converge", "--config", str(conf)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_failed_check_exits_one(monkeypatch, capsys):
    monkeypatch.setitem(cli.RATE_BANDS, "2d-bdm", (5.0, 6.0))
    assert main(["converge", "--family", "2d-bdm", "--levels", "3", "--no-timestamp"]) == 1
    assert "outside [5.0, 6.0]" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "weaksym", "sequences", "--dim", "2", "--no-timestamp"],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0 and "defects" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "weaksym", "converge", "--family", "nope"],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 2

import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from arcsine_stein.harness import (
    CSV_COLUMNS,
    RateReport,
    RateRow,
    emit_report,
    format_report,
    main,
    parse_report,
    run_odd_time_check,
    run_rate_experiment,
)


class TestRateExperiment:
    def test_m1(self):
        rep = run_rate_experiment([1])
        assert abs(rep.rows[0].d_w - (0.5 - 1 / math.pi)) <= 1e-12
        assert rep.rows[0].mode == "exact"

    def test_m2(self):
        assert abs(run_rate_experiment([2]).rows[0].d_w - 0.105152) <= 1e-5

    def test_default_grid_checks(self):
        rep = run_rate_experiment()
        assert [r.m for r in rep.rows] == [2**k for k in range(1, 13)]
        assert all(rep.checks().values())
        assert rep.c_hat == max(r.m_times_dw for r in rep.rows)
        assert {r.mode for r in rep.rows} == {"exact", "float"}

    def test_exact_float_agree(self):
        grid = [1, 2, 7, 64, 500, 1999]
        ex = run_rate_experiment(grid, "exact")
        fl = run_rate_experiment(grid, "float")
        for a, b in zip(ex.rows, fl.rows):
            assert abs(a.d_w - b.d_w) <= 1e-9

    def test_threads_same_values(self):
        a = run_rate_experiment([3, 9, 27], threads=3)
        b = run_rate_experiment([3, 9, 27])
        assert [r.d_w for r in a.rows] == [r.d_w for r in b.rows]

    def test_mc_estimate_attached(self):
        rep = run_rate_experiment([4], mc_paths=20000, seed=3)
        assert rep.rows[0].mc_estimate == pytest.approx(rep.rows[0].d_w, abs=0.02)

    @pytest.mark.parametrize("grid,mode", [([], "auto"), ([4, 2], "auto"), ([0, 1], "auto"),
                                           ([10, 3000], "exact"), ([2], "fancy")])
    def test_errors(self, grid, mode):
        with pytest.raises(ValueError):
            run_rate_experiment(grid, mode)

    def test_report_rejects_unsorted(self):
        with pytest.raises(ValueError):
            RateReport((RateRow(2, 0.1, 0.2, "exact", 1.0), RateRow(1, 0.2, 0.2, "exact", 1.0)))


class TestOddTime:
    def test_m0_rejected(self):
        with pytest.raises(ValueError):
            run_odd_time_check([0])

    def test_small(self):
        rows = run_odd_time_check([1, 3], n_paths=20000, seed=1)
        assert all(r.within for r in rows)
        assert rows[0].path_bound == pytest.approx(2 / 3)
        assert rows[0].max_path_gap <= 2 / 3

    def test_m64_million_paths(self):
        (row,) = run_odd_time_check([64], n_paths=10**6, seed=5, threads=2)
        assert row.within and row.d_w_odd_mc <= row.envelope


def _report(rows):
    return RateReport(tuple(RateRow(*r) for r in rows), {"m_grid": [r[0] for r in rows]})


class TestEmit:
    def test_header_only(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report(_report([]), "csv", path)
        assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"

    def test_two_rows(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report(_report([(1, 0.18, 0.18, "exact", 1.5), (2, 0.1, 0.2, "exact", 2.0)]), "csv", path)
        assert len(path.read_text().splitlines()) == 3

    def test_deterministic_bytes(self):
        rep = _report([(1, 0.18, 0.18, "exact", 1.5)])
        for fmt in ("csv", "json"):
            assert format_report(rep, fmt) == format_report(rep, fmt)

    def test_json_fields(self):
        rep = run_rate_experiment([1, 2])
        data = json.loads(format_report(rep, "json"))
        assert set(data) == {"version", "config", "c_hat", "rows"}
        assert data["rows"][0]["m"] == 1

    def test_io_error_names_path(self, tmp_path):
        bad = tmp_path / "missing" / "r.csv"
        with pytest.raises(OSError, match="missing"):
            emit_report(_report([]), "csv", bad)

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            format_report(_report([]), "xml")


row_st = st.tuples(st.floats(1e-12, 1.0), st.floats(0.0, 1e4), st.sampled_from(["exact", "float"]))


@settings(max_examples=60, deadline=None)
@given(st.lists(row_st, max_size=8), st.sampled_from(["csv", "json"]))
def test_round_trip(rows, fmt):
    full = [(2**i, d, 2**i * d, mode, t) for i, (d, t, mode) in enumerate(rows)]
    rep = _report(full)
    back = parse_report(format_report(rep, fmt), fmt)
    assert back.rows == rep.rows
    if fmt == "json":
        assert back == rep


class TestCli:
    def test_pmf_csv(self, capsys):
        assert main(["pmf", "--m", "2"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out == ["k,p_exact,p_float", "0,3/8,0.375", "1,1/4,0.25", "2,3/8,0.375"]

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["pmf", "--m", "0"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["nonsense"])
        assert exc.value.code == 2

    def test_value_error_is_usage(self, capsys):
        assert main(["rate", "--grid", "4,2"]) == 2

    def test_simulate_out_file(self, tmp_path):
        out = tmp_path / "h.csv"
        assert main(["simulate", "--m", "3", "--paths", "5000", "--seed", "1", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "k,count,empirical_prob,exact_prob" and len(lines) == 5
        assert sum(int(l.split(",")[1]) for l in lines[1:]) == 5000

    def test_env_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ARCSINE_STEIN_OUT_DIR", str(tmp_path / "o"))
        assert main(["wasserstein", "--m", "1", "--format", "json"]) == 0
        data = json.loads((tmp_path / "o" / "wasserstein.json").read_text())
        assert data["d_w"] == pytest.approx(0.5 - 1 / math.pi, abs=1e-12)

    def test_wasserstein_oracle(self, capsys):
        assert main(["wasserstein", "--m", "2", "--oracle-nodes", "100000", "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["lower_bound"] <= data["d_w"] + 1e-10

    def test_rate(self, tmp_path):
        out = tmp_path / "rate.json"
        assert main(["rate", "--format", "json", "--out", str(out), "--threads", "2"]) == 0
        assert parse_report(out.read_text(), "json").rows[-1].m == 4096

    def test_rate_violation_exit_code(self):
        # an impossible plateau tolerance turns the run into an invariant failure
        assert main(["rate", "--grid", "1,2,4,8", "--plateau-tol", "0", "--out", "-"]) == 1

    def test_stein_check(self, capsys):
        assert main(["stein-check", "--m-max", "5", "--family-size", "4"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["all_pass"] and len(data["discrete"]) == 5

    def test_odd_time(self, capsys):
        assert main(["odd-time", "--grid", "1,2", "--paths", "2000"]) == 0

    def test_io_failure(self, tmp_path):
        assert main(["pmf", "--m", "2", "--out", str(tmp_path / "no" / "x.csv")]) == 1

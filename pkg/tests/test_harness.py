import io
import math

import numpy as np
import pytest

from fracheat.cli import main as cli_main
from fracheat.study import (
    ErrorRecord,
    RateEstimate,
    StudyConfig,
    StudyResult,
    _snapped_mesh,
    emit_csv,
    fit_rates,
    read_csv,
    run_consistency_study,
    run_study,
)


def _records(s, errs, hs, problem="example1"):
    return [
        ErrorRecord(problem=problem, s=s, alpha=1.0, h=h, dt=1e-3, error=e)
        for h, e in zip(hs, errs)
    ]


class TestStudyConfig:
    def test_defaults_valid(self):
        cfg = StudyConfig()
        assert cfg.problem == "example1"
        assert cfg.h_values[0] > cfg.h_values[-1]

    def test_rejects_nondecreasing_h(self):
        with pytest.raises(ValueError):
            StudyConfig(h_values=(0.1, 0.2))

    def test_rejects_window_outside_domain(self):
        with pytest.raises(ValueError):
            StudyConfig(domain=(-10.0, 10.0), window=(-20.0, 5.0))

    def test_rejects_bad_workers(self):
        with pytest.raises(ValueError):
            StudyConfig(workers=0)


class TestSnappedMesh:
    def test_never_widens(self):
        mesh = _snapped_mesh(0.3, -10.05, 10.05)
        assert mesh.a >= -10.05 and mesh.b <= 10.05

    def test_exact_multiple_unchanged(self):
        mesh = _snapped_mesh(0.5, -10.0, 10.0)
        assert mesh.a == -10.0 and mesh.b == 10.0

    def test_nodes_on_lattice(self):
        mesh = _snapped_mesh(0.4, -3.1, 7.7)
        assert abs(mesh.a / 0.4 - round(mesh.a / 0.4)) < 1e-12


class TestFitRates:
    def test_recovers_planted_slope(self):
        hs = (0.8, 0.4, 0.2, 0.1)
        errs = [0.5 * h ** 1.3 for h in hs]
        rates = fit_rates(_records(0.4, errs, hs))
        assert len(rates) == 1
        assert rates[0].order == pytest.approx(1.3, abs=1e-12)
        assert rates[0].residual < 1e-12

    def test_needs_three_points(self):
        assert fit_rates(_records(0.4, [0.1, 0.05], (0.4, 0.2))) == []

    def test_floor_exclusion(self):
        hs = (0.8, 0.4, 0.2, 0.1)
        errs = [0.5 * h ** 2 for h in hs[:-1]] + [4e-3]  # finest stuck at floor
        rates = fit_rates(_records(0.5, errs, hs), dt_floor={0.5: 1e-3})
        assert rates[0].n_used == 3
        assert rates[0].order == pytest.approx(2.0, abs=1e-10)

    def test_multiple_s_grouped(self):
        hs = (0.8, 0.4, 0.2)
        recs = _records(0.3, [h ** 1.0 for h in hs], hs) + \
            _records(0.7, [h ** 2.0 for h in hs], hs)
        rates = fit_rates(recs)
        assert [r.s for r in rates] == [0.3, 0.7]
        assert rates[0].order == pytest.approx(1.0, abs=1e-12)
        assert rates[1].order == pytest.approx(2.0, abs=1e-12)


class TestEmitCsv:
    def test_header_and_roundtrip(self):
        res = StudyResult(records=_records(0.4, [0.1, 0.04, 0.01], (0.4, 0.2, 0.1)))
        buf = io.StringIO()
        emit_csv(res, buf)
        text = buf.getvalue()
        assert text.splitlines()[0] == "problem,s,alpha,h,dt,error,rate,wall_ms"
        back = read_csv(io.StringIO(text))
        assert [(r.s, r.h, r.error) for r in back] == \
            [(r.s, r.h, r.error) for r in sorted(res.records, key=lambda r: -r.h)]

    def test_rate_column(self):
        res = StudyResult(records=_records(0.4, [0.1, 0.025], (0.4, 0.2)))
        buf = io.StringIO()
        emit_csv(res, buf)
        lines = buf.getvalue().splitlines()
        first_rate = lines[1].split(",")[6]
        second_rate = float(lines[2].split(",")[6])
        assert first_rate == ""
        assert second_rate == pytest.approx(2.0, abs=1e-12)

    def test_byte_identical_rerun(self):
        res = StudyResult(records=_records(0.6, [0.2, 0.05, 0.0125], (0.4, 0.2, 0.1)))
        a, b = io.StringIO(), io.StringIO()
        emit_csv(res, a)
        emit_csv(res, b)
        assert a.getvalue() == b.getvalue()

    def test_timings_zeroed_by_default(self):
        rec = ErrorRecord(problem="example1", s=0.4, alpha=1.0, h=0.4,
                          dt=1e-3, error=0.1, wall_ms=123.4)
        buf = io.StringIO()
        emit_csv(StudyResult(records=[rec]), buf)
        assert buf.getvalue().splitlines()[1].endswith(",0")

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            emit_csv(StudyResult(), io.StringIO())


class TestConsistencyStudy:
    def test_small_sweep_decreasing(self):
        res = run_consistency_study(
            s_values=(0.5,), h_values=(0.4, 0.2, 0.1),
            window=(-1.0, 1.0), domain=(-15.0, 15.0), tol=1e-7,
        )
        assert not res.failures
        errs = [r.error for r in res.records]
        assert errs[0] > errs[1] > errs[2]

    def test_unknown_profile_rejected(self):
        with pytest.raises(ValueError):
            run_consistency_study((0.5,), (0.4,), profile="bump")


class TestRunStudy:
    def test_tiny_example2_sweep(self):
        cfg = StudyConfig(
            problem="example2", s_values=(0.5,), h_values=(0.2, 0.1),
            dt=0.02, t_horizon=0.1, domain=(-1.0, 1.0), window=(-0.5, 0.5),
        )
        res = run_study(cfg)
        assert not res.failures
        assert len(res.records) == 2
        assert res.records[0].error > res.records[1].error

    def test_cell_isolation(self):
        # s = 0.5 is invalid for example1; the cell fails, the study survives
        cfg = StudyConfig(
            problem="example1", s_values=(0.5,), h_values=(1.0, 0.5, 0.25),
            dt=0.05, t_horizon=0.1, domain=(-20.0, 20.0), window=(-5.0, 5.0),
        )
        res = run_study(cfg)
        assert len(res.failures) == 3
        assert res.records == []


class TestCli:
    def test_consistency_missing_args_exit_2(self, capsys):
        assert cli_main(["consistency"]) == 2

    def test_consistency_stdout_csv(self, capsys):
        rc = cli_main([
            "consistency", "--s", "0.5", "--h", "0.4,0.2,0.1",
            "--window=-1,1", "--domain=-15,15", "--tol", "1e-7",
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "problem,s,alpha,h,dt,error,rate,wall_ms"
        assert len(out.splitlines()) == 4

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text(
            "problem = example2\ns = 0.7\nh = 0.2,0.1\n"
            "dt = 0.02\nT = 0.1\ndomain = -1,1\nwindow = -0.5,0.5\n"
        )
        out_path = tmp_path / "study.csv"
        rc = cli_main(["study", "--config", str(cfgfile),
                       "--s", "0.5", "--out", str(out_path)])
        assert rc == 0
        recs = read_csv(str(out_path))
        assert {r.s for r in recs} == {0.5}  # flag overrode config file
        assert {r.problem for r in recs} == {"example2"}

    def test_study_failure_exit_1(self, capsys):
        rc = cli_main([
            "study", "--problem", "example1", "--s", "0.5",
            "--h", "1.0,0.5", "--dt", "0.05", "--T", "0.1",
            "--domain=-20,20", "--window=-5,5",
        ])
        assert rc == 1

import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from ccresm_sim.harness import (
    CSV_HEADER,
    SCHEMES,
    CellResult,
    SweepConfig,
    SweepResult,
    aggregate,
    draw_trials,
    run_sweep,
    run_trial,
    snr_at_target,
    wilson_halfwidth,
)
from ccresm_sim.plotting import emit_plot
from ccresm_sim.ra_codec import ConfigError

SMALL = dict(N=32, q=3, m=2, n_inner=10, batch_size=7)


def test_noiseless_cell_has_no_errors():
    cfg = SweepConfig(snr_db=(math.inf,), deltas=(0.3,), packets=10, **SMALL)
    res = run_sweep(cfg)
    assert len(res.cells) == len(SCHEMES)
    assert all(c.bit_errors == 0 and c.pkt_errors == 0 for c in res.cells)


def test_run_trial_is_deterministic():
    cfg = SweepConfig(**SMALL)
    for scheme in SCHEMES:
        a = run_trial(scheme, -6.0, 0.3, cfg, 17)
        b = run_trial(scheme, -6.0, 0.3, cfg, 17)
        assert a == b
        assert all(0 <= e <= cfg.N for e in a.bit_errors)


def test_run_trial_rejects_unknown_scheme():
    with pytest.raises(ConfigError):
        run_trial("mmse", 0.0, 0.5, SweepConfig(**SMALL), 0)


def test_single_user_beats_two_user_decoding():
    cfg = SweepConfig(schemes=("ccresm", "single_user"), snr_db=(-11.0,), deltas=(0.1,),
                      packets=60, **SMALL)
    res = run_sweep(cfg)
    assert res.cell("single_user", 0.1, -11.0).ber < res.cell("ccresm", 0.1, -11.0).ber


def test_single_packet_sweep_matches_trial_record():
    cfg = SweepConfig(schemes=("turbo_sic",), snr_db=(-9.0,), deltas=(0.5,), packets=1, **SMALL)
    res = run_sweep(cfg, keep_records=True)
    assert len(res.cells) == 1 and len(res.records) == 1
    rec = run_trial("turbo_sic", -9.0, 0.5, cfg, 0)
    assert res.records[0] == rec
    cell = res.cells[0]
    assert cell.bit_errors == sum(rec.bit_errors)
    assert cell.pkt_errors == sum(rec.packet_errors)
    assert cell.bits == 2 * cfg.N and cell.pkts == 2
    assert cell.mean_iters == rec.iterations


def test_schemes_share_draws():
    cfg = SweepConfig(schemes=("ccresm", "independent"), snr_db=(-5.0,), deltas=(0.3,),
                      packets=4, **SMALL)
    _, alone = draw_trials(cfg, 0.3, -5.0, [2])
    _, batch = draw_trials(cfg, 0.3, -5.0, [0, 1, 2, 3])
    assert np.array_equal(alone.sA[0], batch.sA[2])
    assert np.array_equal(alone.piB[0], batch.piB[2])
    assert np.array_equal(alone.noise[0][0], batch.noise[0][2])
    # the scheme is not part of the key, so a one-scheme config draws the same
    solo = SweepConfig(schemes=("turbo_sic",), **SMALL)
    _, other = draw_trials(solo, 0.3, -5.0, [2])
    assert np.array_equal(other.sB[0], alone.sB[0])
    assert np.array_equal(other.noise[1][0], alone.noise[1][0])


def test_different_cells_draw_differently():
    cfg = SweepConfig(**SMALL)
    _, a = draw_trials(cfg, 0.3, -5.0, [0])
    _, b = draw_trials(cfg, 0.3, -4.5, [0])
    _, c = draw_trials(cfg, 0.1, -5.0, [0])
    assert not np.array_equal(a.noise[0], b.noise[0])
    assert not np.array_equal(a.noise[0], c.noise[0])


def test_ber_per_invariants():
    cfg = SweepConfig(snr_db=(-10.0, -8.0), deltas=(0.1, 0.5), packets=15, **SMALL)
    for c in run_sweep(cfg).cells:
        assert 0 <= c.ber <= 1
        assert c.per >= c.ber


def test_csv_rows_sorted_and_header_exact(tmp_path):
    cfg = SweepConfig(schemes=("turbo_sic", "ccresm"), snr_db=(-6.0, -8.0), deltas=(0.5, 0.1),
                      packets=2, out=str(tmp_path / "r.csv"), **SMALL)
    run_sweep(cfg)
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    keys = [(r.split(",")[0], float(r.split(",")[1]), float(r.split(",")[2])) for r in lines[1:]]
    assert keys == sorted(keys)
    assert len(keys) == 8


def test_csv_identical_across_batching_and_workers():
    base = dict(schemes=("ccresm", "turbo_sic", "single_user"), snr_db=(-9.0, -7.0),
                deltas=(0.3,), packets=12, N=32, q=3, m=2, n_inner=10)
    ref = run_sweep(SweepConfig(batch_size=12, workers=1, **base)).to_csv()
    assert run_sweep(SweepConfig(batch_size=5, workers=1, **base)).to_csv() == ref
    assert run_sweep(SweepConfig(batch_size=4, workers=2, **base)).to_csv() == ref


def test_csv_round_trip(tmp_path):
    cfg = SweepConfig(schemes=("independent",), snr_db=(-6.0,), deltas=(0.3,), packets=3, **SMALL)
    res = run_sweep(cfg)
    path = tmp_path / "r.csv"
    res.to_csv(path)
    back = SweepResult.from_csv(path)
    assert back.to_csv() == res.to_csv()


def test_csv_io_errors_name_the_path(tmp_path):
    with pytest.raises(OSError, match="nope"):
        SweepResult.from_csv(tmp_path / "nope.csv")
    res = SweepResult([CellResult("ccresm", 0.5, 0.0, 1, 0, 10, 0, 2, 1.0)])
    with pytest.raises(OSError, match="missing"):
        res.to_csv(tmp_path / "missing" / "r.csv")


def test_confidence_width_scales_as_inverse_sqrt():
    p = 0.02
    for n in (2000 * 512, 20_000):
        w1 = wilson_halfwidth(round(p * n), n)
        w2 = wilson_halfwidth(round(p * 2 * n), 2 * n)
        w4 = wilson_halfwidth(round(p * 4 * n), 4 * n)
        assert w2 / w1 == pytest.approx(1 / math.sqrt(2), rel=0.1)
        assert w4 / w1 == pytest.approx(0.5, rel=0.1)


def test_wilson_matches_scipy_reference():
    stats = pytest.importorskip("scipy.stats")
    res = stats.binomtest(37, 1000).proportion_ci(0.95, method="wilson")
    assert wilson_halfwidth(37, 1000) == pytest.approx((res.high - res.low) / 2, rel=1e-12)


def test_aggregate_counts_both_users():
    cfg = SweepConfig(schemes=("ccresm", "single_user"), snr_db=(-11.0,), deltas=(0.1,),
                      packets=5, **SMALL)
    res = run_sweep(cfg, keep_records=True)
    cells = {c.scheme: c for c in aggregate(res.records, cfg.N)}
    assert cells["ccresm"].bits == 2 * cfg.N * 5
    assert cells["single_user"].bits == cfg.N * 5


@pytest.mark.parametrize("kwargs", [
    dict(packets=0), dict(deltas=(0.0,)), dict(deltas=(1.0,)), dict(schemes=("cdma",)),
    dict(schemes=()), dict(m=0), dict(snr_db=()),
])
def test_invalid_sweep_configs_rejected(kwargs):
    with pytest.raises(ConfigError):
        SweepConfig(**kwargs)


def test_budget_is_shared_by_all_schemes():
    assert SweepConfig(m=3, n_inner=7).total_iterations == 21


def test_snr_at_target_interpolates_log_linearly():
    snr = [0.0, 1.0, 2.0]
    ber = [1e-1, 1e-2, 1e-4]
    assert snr_at_target(snr, ber, 1e-3, 1e-7) == pytest.approx(1.5)
    assert snr_at_target(snr, ber, 1e-2, 1e-7) == pytest.approx(1.0)
    assert math.isnan(snr_at_target(snr, ber, 1e-5, 1e-7))
    assert snr_at_target(snr, ber, 0.5, 1e-7) == -math.inf
    # zero count floored at 1e-6: log10 falls from -2 to -6 over 1 dB
    assert snr_at_target(snr, [1e-1, 1e-2, 0.0], 1e-3, 1e-6) == pytest.approx(1.25)


def _curve_points(svg_path, gid):
    ns = {"svg": "http://www.w3.org/2000/svg"}
    root = ET.parse(svg_path).getroot()
    for g in root.iter("{http://www.w3.org/2000/svg}g"):
        if g.get("id") == gid:
            return len(g.findall(".//svg:use", ns))
    raise AssertionError(f"no curve {gid}")


def test_plot_one_cell_one_point(tmp_path):
    res = SweepResult([CellResult("ccresm", 0.1, -10.0, 10, 7, 1000, 3, 20, 12.0)])
    out = tmp_path / "f.svg"
    emit_plot(res, "ber", out)
    assert out.read_text().startswith("<?xml")
    assert _curve_points(out, "curve-ccresm-0.1") == 1


def test_plot_one_curve_per_scheme_and_delta(tmp_path):
    cells = [CellResult(s, d, snr, 10, 5, 1000, 2, 20, 10.0)
             for s in ("ccresm", "turbo_sic") for d in (0.1, 0.5) for snr in (-10.0, -9.0, -8.0)]
    out = tmp_path / "f.svg"
    emit_plot(SweepResult(cells), "per", out)
    for s in ("ccresm", "turbo_sic"):
        for d in ("0.1", "0.5"):
            assert _curve_points(out, f"curve-{s}-{d}") == 3


def test_plot_errors(tmp_path):
    with pytest.raises(ConfigError):
        emit_plot(SweepResult([]), "ber", tmp_path / "f.svg")
    ber_only = SweepResult([CellResult("ccresm", 0.1, -10.0, 10, 7, 1000, 0, 0, 12.0, has_per=False)])
    with pytest.raises(ConfigError):
        emit_plot(ber_only, "per", tmp_path / "f.svg")
    emit_plot(ber_only, "ber", tmp_path / "f.svg")


def test_ber_only_csv_loads_without_per(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("scheme,delta,snr_db,packets,bit_errors,bits,ber,ber_ci95\n"
                    "ccresm,0.1,-10.0,10,7,1000,0.007,0.005\n")
    res = SweepResult.from_csv(path)
    assert not res.cells[0].has_per and res.cells[0].per is None
    assert res.cells[0].ber == pytest.approx(0.007)

import math
import warnings

import pytest

from feketedyn.dynatomic import periodic_points
from feketedyn.fekete import (CSV_COLUMNS, EnergyReport, RateRow, SamplerConfig,
                              baker_check, check_quasi_fekete, config_energy,
                              discrepancy, rate_table, thread_budget)
from feketedyn.equilibrium import get_observable

LOG2 = math.log(2.0)
LOG3 = math.log(3.0)


class TestConfigEnergy:
    def test_fixed_points_of_square_have_zero_energy(self, evaluators,
                                                     perpts_cache):
        # pair kernel values for {0, 1, inf} cancel exactly
        rep = config_energy(evaluators["z2"], perpts_cache("z2", 1))
        assert abs(rep.pair_energy_sum) <= 1e-12
        assert rep.config_size == 3

    def test_period_two_of_square_energy_log3(self, evaluators, perpts_cache):
        # the two primitive period-2 points sit at distance sqrt(3)/2 with
        # potential -log(2)/2 each, so the ordered pair sum is log 3
        rep = config_energy(evaluators["z2"], perpts_cache("z2", 2))
        assert abs(rep.pair_energy_sum - LOG3) <= 1e-10
        assert abs(rep.min_pair_distance - math.sqrt(3) / 2) <= 1e-10

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_square_energies_stay_below_nlogn(self, evaluators, perpts_cache, n):
        rep = config_energy(evaluators["z2"], perpts_cache("z2", n))
        assert 0.0 < rep.baker_ratio <= 1.05
        assert rep.quasi_fekete_constant == 0.0

    def test_parabolic_coincidence_flags_minus_infinity(self, maps, evaluators):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cfg = periodic_points(maps["z2p14"], 1)
        ev = evaluators["z2p14"]
        rep = config_energy(ev, cfg)
        assert rep.pair_energy_sum == -math.inf
        assert "coincident_points" in rep.flags
        assert rep.min_pair_distance == 0.0

    def test_single_point_raises(self, evaluators, perpts_cache):
        cfg = perpts_cache("z2", 1)
        from feketedyn.dynatomic import Configuration
        solo = Configuration(points=cfg.points[:1], multiplicities=[1],
                             provenance=cfg.provenance, residuals=[0.0])
        with pytest.raises(ValueError):
            config_energy(evaluators["z2"], solo)


class TestQuasiFeketeAndBaker:
    def test_check_accepts_positive_energy(self):
        rep = EnergyReport(config_size=6, pair_energy_sum=2.0,
                           quasi_fekete_constant=0.0, baker_ratio=0.2,
                           min_pair_distance=0.5)
        assert check_quasi_fekete(rep, 0.1)

    def test_check_rejects_too_negative_energy(self):
        rep = EnergyReport(config_size=6, pair_energy_sum=-100.0,
                           quasi_fekete_constant=9.3, baker_ratio=-9.3,
                           min_pair_distance=0.5)
        assert not check_quasi_fekete(rep, 1.0)
        assert check_quasi_fekete(rep, 10.0)

    def test_baker_check_shape(self, evaluators, perpts_cache):
        out = baker_check(evaluators["z2"], perpts_cache("z2", 3))
        assert abs(out["rhs_shape"] - 6 * math.log(6)) <= 1e-12
        assert abs(out["ratio"] - out["lhs"] / out["rhs_shape"]) <= 1e-12


class TestDiscrepancy:
    CFG = SamplerConfig(seed=0, samples=2000, holder_samples=1000)

    def test_row_fields_for_square(self, maps, evaluators, perpts_cache):
        row = discrepancy(maps["z2"], 2, get_observable("re_chordal"),
                          self.CFG, ev=evaluators["z2"],
                          periodic=perpts_cache("z2", 2))
        assert row.n == 2 and row.d_n == 2
        assert row.observable == "re_chordal"
        assert abs(row.bound_theorem_A - math.sqrt(2.0 / 4.0)) <= 1e-15
        assert row.discrepancy >= 0.0
        assert math.isfinite(row.bound_prop) and row.bound_prop > 0
        assert abs(row.ratio - row.discrepancy / row.bound_theorem_A) <= 1e-12

    def test_period_one_bound(self, maps, evaluators, perpts_cache):
        row = discrepancy(maps["z2"], 1, get_observable("im_chordal"),
                          self.CFG, ev=evaluators["z2"],
                          periodic=perpts_cache("z2", 1))
        assert abs(row.bound_theorem_A - math.sqrt(1.0 / 2.0)) <= 1e-15

    def test_discrepancy_matches_root_sum_identity(
            self, maps, evaluators, perpts_cache):
        # Per_3 of z -> z^2 is the six primitive 7th roots of unity, whose
        # sum is -1; re_chordal averages to -1/12 while the equilibrium
        # integral is 0, so the discrepancy is 1/12 up to MC error
        obs = get_observable("re_chordal")
        row = discrepancy(maps["z2"], 3, obs, self.CFG, ev=evaluators["z2"],
                          periodic=perpts_cache("z2", 3))
        assert abs(row.discrepancy - 1.0 / 12.0) <= 6.0 * row.mc_stderr

    def test_dpow_normalization_changes_average(self, maps, evaluators,
                                                perpts_cache):
        cfg2 = SamplerConfig(seed=0, samples=2000, holder_samples=1000,
                             normalization="dpow")
        obs = get_observable("dist_to(0)")
        a = discrepancy(maps["z2"], 3, obs, self.CFG, ev=evaluators["z2"],
                        periodic=perpts_cache("z2", 3))
        b = discrepancy(maps["z2"], 3, obs, cfg2, ev=evaluators["z2"],
                        periodic=perpts_cache("z2", 3))
        # d_3 = 6 < 2^3 = 8, so the two averages differ by the factor 6/8
        assert a.discrepancy != b.discrepancy


class TestRateTable:
    def test_shape_and_csv(self, maps, evaluators):
        cfg = SamplerConfig(seed=1, samples=1500, holder_samples=1000)
        table = rate_table(maps["z2m1"], 3, ["re_chordal", "im_chordal"],
                           cfg, ev=evaluators["z2m1"])
        assert len(table.rows) == 6
        assert not table.failures
        assert set(table.fitted_C) == {"re_chordal", "im_chordal"}
        text = table.to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 7
        # rows sorted by (n, observable)
        ns = [int(line.split(",")[0]) for line in lines[1:]]
        assert ns == sorted(ns)

    def test_fitted_constant_uses_high_periods_only(self, maps, evaluators):
        cfg = SamplerConfig(seed=2, samples=1500, holder_samples=1000)
        table = rate_table(maps["z2"], 4, ["dist_to(0)"], cfg,
                           ev=evaluators["z2"])
        rows = [r for r in table.rows if r.n >= 3 and r.discrepancy > 0]
        logs = [math.log(r.ratio) for r in rows]
        expect = math.exp(sum(logs) / len(logs))
        assert abs(table.fitted_C["dist_to(0)"] - expect) <= 1e-12

    def test_thread_budget_env(self, monkeypatch):
        monkeypatch.setenv("FEKETE_DYN_THREADS", "3")
        assert thread_budget() == 3
        monkeypatch.setenv("FEKETE_DYN_THREADS", "junk")
        assert thread_budget() >= 1

import json

import pytest

from evtwin.config import PolicySet
from evtwin.experiments import (
    ResultsStore,
    apply_candidate,
    find_grid_best,
    grid_base_config,
    grid_campaign,
    make_sim_evaluator,
    optimizer_campaign,
    policy_sweep_config,
    policy_case,
    policy_sweep,
    sweep_wilcoxon,
)
from evtwin.optimize import Candidate, Dimension, SearchSpace, space_3d, space_5d

from conftest import make_config


class TestPolicyCases:
    def test_case0_all_off(self):
        p = policy_case(0)
        assert not (p.ban_gasoline or p.idle_fee or p.relocate_full or p.notification)

    def test_case5_all_on(self):
        p = policy_case(5)
        assert p.ban_gasoline and p.idle_fee and p.relocate_full and p.notification

    def test_case4_notification_without_relocation(self):
        p = policy_case(4)
        assert p.ban_gasoline and p.idle_fee and p.notification
        assert not p.relocate_full

    def test_incremental_structure(self):
        assert policy_case(1).ban_gasoline and not policy_case(1).idle_fee
        assert policy_case(2).idle_fee and not policy_case(2).relocate_full
        assert policy_case(3).relocate_full and not policy_case(3).notification

    def test_bad_case(self):
        with pytest.raises(ValueError):
            policy_case(6)

    def test_preserves_rates_from_base(self):
        base = PolicySet(idle_fee_rate_vnd_per_min=2000, idle_grace_minutes=15)
        p = policy_case(5, base)
        assert p.idle_fee_rate_vnd_per_min == 2000
        assert p.idle_grace_minutes == 15


class TestResultsStore:
    def test_duplicate_key_is_noop(self, tmp_path):
        store = ResultsStore(tmp_path)
        rec = {"experiment": "x", "scenario_hash": "abc", "seed": 1, "v": 1}
        assert store.append(dict(rec))
        assert not store.append(dict(rec, v=2))
        assert len(store.records()) == 1
        assert store.records()[0]["v"] == 1

    def test_reopen_preserves_keys(self, tmp_path):
        store = ResultsStore(tmp_path)
        store.append({"experiment": "x", "scenario_hash": "abc", "seed": 1})
        again = ResultsStore(tmp_path)
        assert again.has("x", "abc", 1)
        assert not again.append({"experiment": "x", "scenario_hash": "abc", "seed": 1})

    def test_records_carry_schema_version(self, tmp_path):
        store = ResultsStore(tmp_path)
        store.append({"experiment": "x", "scenario_hash": "h", "seed": 0})
        assert store.records()[0]["schema_version"] == 1


SMALL_SPACE = SearchSpace(
    (
        Dimension("n11_C", 4, 8, 2),
        Dimension("n30_C", 0, 2, 2),
        Dimension("solar", 50, 100, 50),
    )
)


class TestApplyCandidate:
    def test_maps_dimensions_to_config(self):
        base = grid_base_config(space_5d())
        cfg = apply_candidate(base, space_5d(), (25, 6, 700, 18, 4))
        areas = {a.area_id: a for a in cfg.areas}
        assert areas["C-Parking"].n_ports_11kw == 25
        assert areas["C-Parking"].n_ports_30kw == 6
        assert areas["J-Parking"].n_ports_11kw == 18
        assert areas["J-Parking"].n_ports_30kw == 4
        assert cfg.energy.pv.nb_solar == 700

    def test_3d_base_has_only_c_parking(self):
        base = grid_base_config(space_3d())
        assert [a.area_id for a in base.areas] == ["C-Parking"]

    def test_unknown_dimension_rejected(self):
        sp = SearchSpace((Dimension("mystery", 0, 1, 1),))
        with pytest.raises(ValueError, match="no config mapping"):
            apply_candidate(grid_base_config(sp), sp, (0,))


class TestPolicySweep:
    def test_cardinality_one_seed(self, tmp_path):
        base = make_config(nb_electrical=35, nb_gasoline=5)
        store = ResultsStore(tmp_path)
        cells = policy_sweep(
            base, ev_levels=[35, 40], cases=[0, 2, 5], seeds=[0], store=store
        )
        assert len(cells) == 6
        assert len(store.records("policy_sweep")) == 6

    def test_resume_produces_identical_set(self, tmp_path):
        base = make_config(nb_electrical=35, nb_gasoline=5)
        store = ResultsStore(tmp_path)
        policy_sweep(base, ev_levels=[35], cases=[0, 5], seeds=[0, 1], store=store)
        first = (tmp_path / "records.jsonl").read_bytes()
        # rerun over a superset: existing records unchanged, new ones appended
        store2 = ResultsStore(tmp_path)
        cells = policy_sweep(
            base, ev_levels=[35], cases=[0, 5], seeds=[0, 1, 2], store=store2
        )
        combined = (tmp_path / "records.jsonl").read_bytes()
        assert combined.startswith(first)
        assert len(store2.records("policy_sweep")) == 6
        assert all(len(c.satisfactions) == 3 for c in cells.values())

    def test_no_hash_collisions_across_cells(self, tmp_path):
        base = make_config(nb_electrical=35, nb_gasoline=5)
        store = ResultsStore(tmp_path)
        policy_sweep(base, ev_levels=[35, 45], cases=[0, 1], seeds=[0], store=store)
        hashes = [r["scenario_hash"] for r in store.records("policy_sweep")]
        assert len(set(hashes)) == len(hashes)

    def test_wilcoxon_pairing(self, tmp_path):
        base = make_config(nb_electrical=60, nb_gasoline=20)
        cells = policy_sweep(base, ev_levels=[60], cases=[0, 5], seeds=range(8))
        res = sweep_wilcoxon(cells, 60, 5, 0)
        assert res.n_effective <= 8


class TestGridCampaign:
    def test_tiny_grid_counts_and_summary(self, tmp_path):
        base = grid_base_config(SMALL_SPACE, nb_electrical=20, nb_gasoline=5)
        store = ResultsStore(tmp_path)
        results = grid_campaign(base, SMALL_SPACE, ev_level=20, store=store)
        assert len(results) == SMALL_SPACE.cardinality() == 3 * 2 * 2
        evals = store.records("grid")
        assert len(evals) == 12
        best = find_grid_best(store, SMALL_SPACE, 20)
        assert best is not None
        assert best[0].values == results[0].candidate.values

    def test_degenerate_single_point_summary(self, tmp_path):
        sp = SearchSpace((Dimension("solar", 100, 100, 100),))
        base = grid_base_config(sp, nb_electrical=20, nb_gasoline=0)
        store = ResultsStore(tmp_path)
        results = grid_campaign(base, sp, ev_level=20, store=store)
        assert len(results) == 1
        best = find_grid_best(store, sp, 20)
        assert best[0].values == (100.0,)

    def test_evaluator_metrics_consistent_with_direct_run(self):
        from evtwin.experiments import run_scenario
        from dataclasses import replace

        base = grid_base_config(SMALL_SPACE, nb_electrical=20, nb_gasoline=5)
        fn = make_sim_evaluator(base, SMALL_SPACE)
        obj, metrics = fn((6, 2, 100), 3)
        cfg = replace(apply_candidate(base, SMALL_SPACE, (6, 2, 100)), rng_seed=3)
        _, direct = run_scenario(cfg)
        assert obj == direct.objective
        assert metrics.as_dict() == direct.as_dict()


class TestOptimizerCampaign:
    def test_requires_completed_grid(self, tmp_path):
        base = grid_base_config(SMALL_SPACE, nb_electrical=20)
        store = ResultsStore(tmp_path)
        with pytest.raises(ValueError, match="full grid"):
            optimizer_campaign(
                base, SMALL_SPACE, 20, ["hill_climbing"], budget=6, store=store
            )

    def test_rows_against_grid_best(self, tmp_path):
        base = grid_base_config(SMALL_SPACE, nb_electrical=20, nb_gasoline=5)
        store = ResultsStore(tmp_path)
        grid_campaign(base, SMALL_SPACE, ev_level=20, store=store)
        rows, reports = optimizer_campaign(
            base, SMALL_SPACE, 20, ["hill_climbing", "tabu"], budget=8,
            seeds=[0, 1], store=store,
        )
        assert len(rows) == 4
        for row in rows:
            assert row.evaluations_used <= 8
            assert row.ned_to_grid_best >= 0.0
        assert len(store.records("optimizer")) == 4

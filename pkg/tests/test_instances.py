import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xorbench import instances as xi


def naive_ising_energy(ising, s):
    e = 0
    for i in range(ising.n):
        e += int(ising.h[i]) * int(s[i])
    for (a, b), val in ising.j.items():
        e += val * int(s[a]) * int(s[b])
    return e


class TestSampler:
    def test_regularity_small(self):
        for seed in range(10):
            g = xi.sample_3regular(4, seed)
            counts = np.bincount(g.clauses.ravel(), minlength=4)
            assert np.all(counts == 3)
            for row in g.clauses:
                assert len(set(row.tolist())) == 3

    def test_deterministic(self):
        a = xi.sample_3regular(64, rng_seed=1)
        b = xi.sample_3regular(64, rng_seed=1)
        assert np.array_equal(a.clauses, b.clauses)
        assert a.rejected_matchings == b.rejected_matchings

    def test_rejections_observed(self):
        total = sum(xi.sample_3regular(64, seed).rejected_matchings for seed in range(100))
        assert total > 0

    def test_small_m_rejected(self):
        with pytest.raises(ValueError):
            xi.sample_3regular(3, 0)


class TestGenerateInstance:
    def test_plant_is_gf2_solution(self):
        from xorbench.gf2 import gf2_eliminate, rows_from_clauses

        inst = xi.generate_instance(4, 3)
        rows = rows_from_clauses(inst.clauses, 4)
        rank, x = gf2_eliminate(rows, [c[3] for c in inst.clauses], 4)
        assert rank == 4
        assert tuple(x) == inst.planted

    def test_all_full_rank(self):
        for seed in range(100):
            inst = xi.generate_instance(32, seed)
            from xorbench.gf2 import gf2_rank, rows_from_clauses

            assert gf2_rank(rows_from_clauses(inst.clauses, 32), 32) == 32

    def test_unique_by_enumeration(self):
        inst = xi.generate_instance(8, 5)
        sols = xi.brute_force_unique_solutions(inst)
        assert len(sols) == 1
        assert tuple(sols[0]) == inst.planted

    def test_deterministic_serialization(self):
        a = xi.instance_to_json(xi.generate_instance(16, 9))
        b = xi.instance_to_json(xi.generate_instance(16, 9))
        assert a == b

    def test_roundtrip(self):
        inst = xi.generate_instance(8, 1)
        back = xi.instance_from_dict(xi.instance_to_dict(inst))
        assert back == inst


class TestGadget:
    def test_sign0_examples(self):
        assert xi.gadget_energy(0, 1, 1, 1, -1) == -4
        assert xi.gadget_energy(0, 1, -1, -1, 1) == -4
        best_violating = min(xi.gadget_energy(0, 1, 1, -1, sa) for sa in (1, -1))
        assert best_violating == -2

    @pytest.mark.parametrize("sign", [0, 1])
    def test_exactly_four_minima_at_minus_4(self, sign):
        best, argmin = xi.gadget_minima(sign)
        assert best == -4
        assert len(argmin) == 4
        want = 1 if sign == 0 else -1
        assert {cfg[:3] for cfg in argmin} == {
            t for t in itertools.product((1, -1), repeat=3) if t[0] * t[1] * t[2] == want
        }

    @pytest.mark.parametrize("sign", [0, 1])
    def test_violating_triples_cost_at_least_minus_2(self, sign):
        want = 1 if sign == 0 else -1
        for t in itertools.product((1, -1), repeat=3):
            if t[0] * t[1] * t[2] != want:
                assert min(xi.gadget_energy(sign, *t, sa) for sa in (1, -1)) >= -2

    def test_invalid_sign(self):
        with pytest.raises(ValueError):
            xi.clause_gadget(2)


class TestIsing:
    def test_shape_and_ground(self):
        inst = xi.generate_instance(8, 2)
        ising = xi.to_ising(inst)
        assert ising.n == 16
        assert ising.ground_energy == -32
        assert ising.aux_map == tuple(range(8, 16))

    def test_brute_force_ground(self):
        inst = xi.generate_instance(6, 4)
        ising = xi.to_ising(inst)
        best = min(
            naive_ising_energy(ising, [1 - 2 * ((v >> i) & 1) for i in range(12)])
            for v in range(1 << 12)
        )
        assert best == ising.ground_energy

    def test_planted_config_attains_ground(self):
        for seed in range(5):
            inst = xi.generate_instance(16, seed)
            ising = xi.to_ising(inst)
            assert xi.ising_energy(ising, xi.planted_spin_config(inst)) == ising.ground_energy

    def test_logical_field_bound(self):
        inst = xi.generate_instance(32, 0)
        ising = xi.to_ising(inst)
        assert np.all(np.abs(ising.h[:32]) <= 3)
        assert np.all(ising.h[32:] == -6) or np.all(np.abs(ising.h[32:]) <= 6)


class TestQubo:
    def test_single_coupling_identity(self):
        ising = xi.IsingInstance(n=2, h=np.zeros(2, dtype=np.int64), j={(0, 1): 1},
                                 ground_energy=-1, aux_map=())
        qubo = xi.ising_to_qubo(ising)
        assert qubo.q == {(0, 1): 4, (0, 0): -2, (1, 1): -2}
        assert qubo.offset == 1

    def test_random_roundtrip(self):
        inst = xi.generate_instance(16, 11)
        ising = xi.to_ising(inst)
        qubo = xi.ising_to_qubo(ising)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            x = rng.integers(0, 2, 32)
            assert xi.qubo_value(qubo, x) + qubo.offset == xi.ising_energy(ising, 1 - 2 * x)

    def test_ensemble_coefficient_range(self):
        for seed in range(20):
            qubo = xi.ising_to_qubo(xi.to_ising(xi.generate_instance(32, seed)))
            assert all(-30 <= v <= 16 for v in qubo.q.values())

    @given(st.integers(0, 1000))
    @settings(max_examples=30, deadline=None)
    def test_qubo_equivalence_property(self, config_seed):
        inst = xi.generate_instance(8, 42)
        ising = xi.to_ising(inst)
        qubo = xi.ising_to_qubo(ising)
        x = np.random.default_rng(config_seed).integers(0, 2, 16)
        assert xi.qubo_value(qubo, x) + qubo.offset == xi.ising_energy(ising, 1 - 2 * x)


class TestEnergy:
    def test_all_zero_bits(self):
        qubo = xi.ising_to_qubo(xi.to_ising(xi.generate_instance(8, 0)))
        assert xi.qubo_value(qubo, np.zeros(16, dtype=int)) == 0

    def test_matches_naive_evaluator(self):
        inst = xi.generate_instance(6, 8)
        ising = xi.to_ising(inst)
        rng = np.random.default_rng(1)
        for _ in range(50):
            s = rng.choice([-1, 1], 12)
            assert xi.ising_energy(ising, s) == naive_ising_energy(ising, s)

    def test_single_flip_consistency(self):
        inst = xi.generate_instance(8, 0)
        ising = xi.to_ising(inst)
        rng = np.random.default_rng(2)
        s = rng.choice([-1, 1], 16)
        for i in range(16):
            phi = int(ising.h[i])
            for (a, b), val in ising.j.items():
                if a == i:
                    phi += val * int(s[b])
                elif b == i:
                    phi += val * int(s[a])
            flipped = s.copy()
            flipped[i] = -flipped[i]
            assert xi.ising_energy(ising, flipped) - xi.ising_energy(ising, s) == -2 * int(s[i]) * phi

    def test_domain_errors(self):
        inst = xi.generate_instance(4, 0)
        ising = xi.to_ising(inst)
        with pytest.raises(ValueError):
            xi.ising_energy(ising, np.zeros(8, dtype=int))
        with pytest.raises(ValueError):
            xi.ising_energy(ising, np.ones(5, dtype=int))

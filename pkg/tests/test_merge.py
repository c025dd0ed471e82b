# encoding: utf-8
import os
import sys
import unittest

import numpy as np

pyaud_basedir = os.path.abspath(os.path.dirname(os.path.dirname(os.path.realpath(__file__))))
if pyaud_basedir not in sys.path:
    sys.path.insert(0, pyaud_basedir)

import support
from pyaud.errors import ConfigError, TargetExceedsKinds
from pyaud.hmm.gmm import GaussianMixture
from pyaud.hmm.inventoryio import dumps_inventory
from pyaud.hmm.unit import OFFSET, ONSET, RHYME, SILENCE, SILENCE_LABEL, HmmUnit, UnitInventory
from pyaud.pipeline.config import PipelineConfig
from pyaud.pipeline.merge import merge_units, split_target, unit_embedding


def make_unit(label, kind, mean, occupancy=10, n_states=3):
    g = GaussianMixture([1.0], [mean], [np.ones(len(mean))])
    return HmmUnit(label, kind, [g] * n_states, occupancy=[occupancy] * n_states)


def prototype_rhymes(seed=0):
    """Six rhymes, even ones near (0, 0), odd ones near (10, 10)."""
    rng = np.random.default_rng(seed)
    units = []
    for i in range(6):
        center = 0.0 if i % 2 == 0 else 10.0
        units.append(make_unit("RH_%d" % i, RHYME, center + rng.normal(0, 0.1, 2)))
    units.append(make_unit(SILENCE_LABEL, SILENCE, [-5.0, -5.0]))
    return UnitInventory(units, 2, 1e-3)


def cvc_inventory(seed=1, n_templates=4):
    rng = np.random.default_rng(seed)
    units = []
    for i in range(n_templates):
        for prefix, kind in (("OS", ONSET), ("RH", RHYME), ("OF", OFFSET)):
            units.append(make_unit("%s_%d" % (prefix, i), kind, rng.normal(0, 3, 2)))
    units.append(make_unit(SILENCE_LABEL, SILENCE, [0.0, 0.0]))
    return UnitInventory(units, 2, 1e-3)


class TestSplitTarget(unittest.TestCase):
    def test_proportional(self):
        self.assertEqual(split_target(3, [6, 3]), [2, 1])
        self.assertEqual(split_target(40, [60, 30]), [27, 13])

    def test_at_least_one(self):
        self.assertEqual(split_target(2, [20, 1]), [1, 1])
        self.assertEqual(sum(split_target(7, [5, 4, 3])), 7)


class TestMergeUnits(unittest.TestCase):
    def setUp(self):
        self.cfg = PipelineConfig()

    def test_identity(self):
        inv = cvc_inventory()
        merged, label_map = merge_units(inv, 12, self.cfg)
        self.assertIs(merged, inv)
        self.assertEqual(list(label_map.items()), [(k, k) for k in inv.labels()])
        merged, _ = merge_units(inv, 50, self.cfg)
        self.assertIs(merged, inv)

    def test_prototypes(self):
        inv = prototype_rhymes()
        merged, label_map = merge_units(inv, 2, self.cfg)
        self.assertEqual(merged.labels(), ["RH_0", "RH_1", SILENCE_LABEL])
        for i in range(6):
            self.assertEqual(label_map["RH_%d" % i], "RH_%d" % (i % 2))
        self.assertEqual(label_map[SILENCE_LABEL], SILENCE_LABEL)
        self.assertEqual(merged.meta["merge"]["target"], 2)

    def test_stratified(self):
        inv = cvc_inventory()
        merged, label_map = merge_units(inv, 5, self.cfg)
        self.assertEqual(len(merged.labels_of_kind(ONSET, OFFSET, RHYME, "transient")), 5)
        for old, new in label_map.items():
            if old.startswith("RH_"):
                self.assertTrue(new.startswith("RH_"))
            elif old != SILENCE_LABEL:
                self.assertFalse(new.startswith("RH_"))
        # every merged label is reached
        self.assertEqual(set(label_map.values()), set(merged.labels()))

    def test_target_below_kinds(self):
        self.assertRaises(TargetExceedsKinds, merge_units, cvc_inventory(), 1, self.cfg)
        self.assertRaises(ConfigError, merge_units, cvc_inventory(), 0, self.cfg)

    def test_unstratified(self):
        cfg = self.cfg.replace(**{"training.merge_stratified": False})
        merged, label_map = merge_units(cvc_inventory(), 1, cfg)
        self.assertEqual(len(merged), 2)
        self.assertEqual(len(set(label_map.values())), 2)

    def test_moments(self):
        units = [
            HmmUnit("RH_0", RHYME, [GaussianMixture([1.0], [[0.0]], [[1.0]])], occupancy=[10]),
            HmmUnit("RH_1", RHYME, [GaussianMixture([1.0], [[2.0]], [[1.0]])], occupancy=[30]),
        ]
        merged, _ = merge_units(UnitInventory(units, 1, 1e-3), 1, self.cfg)
        g = merged["RH_0"].states[0]
        self.assertAlmostEqual(g.means[0, 0], 1.5)
        self.assertAlmostEqual(g.variances[0, 0], 1.75)
        self.assertEqual(list(merged["RH_0"].occupancy), [40])

    def test_deterministic(self):
        a, _ = merge_units(cvc_inventory(), 5, self.cfg)
        b, _ = merge_units(cvc_inventory(), 5, self.cfg)
        self.assertEqual(dumps_inventory(a), dumps_inventory(b))

    def test_embedding(self):
        unit = make_unit("RH_0", RHYME, [1.0, 2.0])
        np.testing.assert_allclose(unit_embedding(unit), [1.0, 2.0] * 3)
        self.assertEqual(len(unit_embedding(support.kinds_inventory()["OS_0"])), 1)


if __name__ == "__main__":
    unittest.main()

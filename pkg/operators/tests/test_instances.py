import json
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from wcond_modules.errors import InstanceError
from wcond_modules.instances import (
    canonical_instance,
    dump_instance,
    fingerprint,
    instance_to_dict,
    load_instance,
    matrix_to_json,
    parse_instance,
    random_instance,
    scenario_instances,
)

CANONICAL = {
    "mass": [0.25, 0.25, 0.25, 0.25],
    "atoms": [[0, 1], [2, 3]],
    "u": {"re": [1, 1, 2, 2], "im": [0, 0, 0, 0]},
    "w": {"re": [1, 3, 1, 1]},
}


class ParseInstanceTests(SimpleTestCase):
    def test_canonical(self):
        T = parse_instance(CANONICAL)
        assert_allclose(T.u, [1, 1, 2, 2])
        assert_allclose(T.w, [1, 3, 1, 1])
        self.assertEqual(T.part.atoms, ((0, 1), (2, 3)))
        self.assertEqual(fingerprint(T), fingerprint(canonical_instance()))

    def test_plain_real_lists(self):
        T = parse_instance(dict(CANONICAL, u=[1, 1, 2, 2], w=[1, 3, 1, 1]))
        self.assertEqual(T.u.dtype, complex)

    def test_errors_name_the_field(self):
        cases = [
            ([1, 2], None, "instance must be a JSON object"),
            ({k: v for k, v in CANONICAL.items() if k != "mass"}, "mass", "mass is required"),
            (dict(CANONICAL, mass=[0.5, 0.5, 0, 0.5]), "mass", "mass must be positive"),
            (dict(CANONICAL, atoms=[0, 1, 2, 3]), "atoms", "atoms must be a list of index lists"),
            (dict(CANONICAL, atoms=[[0, 1], [1, 2, 3]]), "atoms", "disjoint"),
            ({k: v for k, v in CANONICAL.items() if k != "u"}, "u", "u is required"),
            (dict(CANONICAL, u={"re": [1, 2]}), "u.re", "u.re must have 4 values"),
            (dict(CANONICAL, w={"im": [0, 0, 0, 0]}), "w.re", "w.re is required"),
            (dict(CANONICAL, w=["a", 1, 1, 1]), "w", "w must contain only numbers"),
        ]
        for data, field, message in cases:
            with self.subTest(message=message):
                with self.assertRaises(InstanceError) as ctx:
                    parse_instance(data)
                self.assertEqual(ctx.exception.field, field)
                self.assertIn(message, str(ctx.exception))


class FileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_dump_and_load(self):
        path = os.path.join(self.tmp.name, "canonical.json")
        dump_instance(canonical_instance(), path)
        self.assertEqual(instance_to_dict(load_instance(path)), instance_to_dict(canonical_instance()))

    def test_missing_file(self):
        with self.assertRaises(InstanceError) as ctx:
            load_instance(os.path.join(self.tmp.name, "missing.json"))
        self.assertEqual(ctx.exception.field, "path")

    def test_invalid_json(self):
        path = os.path.join(self.tmp.name, "broken.json")
        with open(path, "w") as handle:
            handle.write("{not json")
        with self.assertRaisesMessage(InstanceError, "invalid JSON"):
            load_instance(path)


class CodecTests(SimpleTestCase):
    def test_matrix(self):
        A = np.array([[1, 2j], [3, 4 - 1j]])
        data = matrix_to_json(A)
        self.assertEqual(data["re"], [1.0, 0.0, 3.0, 4.0])
        self.assertEqual(data["im"], [0.0, 2.0, 0.0, -1.0])
        self.assertEqual((data["rows"], data["cols"]), (2, 2))

    def test_fingerprint_is_stable(self):
        data = json.loads(json.dumps(instance_to_dict(canonical_instance())))
        self.assertEqual(fingerprint(parse_instance(data)), fingerprint(canonical_instance()))
        self.assertNotEqual(fingerprint(parse_instance(dict(CANONICAL, w=[1, 3, 1, 2]))), fingerprint(canonical_instance()))


class RandomInstanceTests(SimpleTestCase):
    def test_seeded(self):
        a = random_instance(np.random.default_rng(7))
        b = random_instance(np.random.default_rng(7))
        self.assertEqual(fingerprint(a), fingerprint(b))

    def test_ranges(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            T = random_instance(rng, max_points=6, max_atoms=3)
            self.assertTrue(2 <= T.n <= 6)
            self.assertTrue(1 <= T.part.count <= 3)
            self.assertTrue(np.all(T.space.mass >= 0.1))
            self.assertTrue(np.all(np.abs(T.u.real) <= 2))


class ScenarioListTests(SimpleTestCase):
    def test_names_are_unique(self):
        names = [s.name for s in scenario_instances()]
        self.assertEqual(len(names), len(set(names)))
        self.assertIn("canonical", names)
        self.assertTrue(any(s.fixed_point for s in scenario_instances()))

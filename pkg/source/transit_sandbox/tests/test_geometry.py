import unittest

from transit_sandbox.core.geometry import (
    KM_PER_MILE,
    Direction,
    Metric,
    Point,
    backward_km,
    distance,
    km_to_miles,
    leg_foot,
    move_toward,
    walk_time,
)


class TestGeometry(unittest.TestCase):
    def test_distances(self):
        p, q = Point(0.0, 0.0), Point(3.0, 4.0)
        self.assertAlmostEqual(distance(p, q), 7.0)
        self.assertAlmostEqual(distance(p, q, Metric.EUCLIDEAN), 5.0)

    def test_walk_time(self):
        self.assertAlmostEqual(walk_time(Point(0.0, 0.0), Point(1.0, 0.0), 5.0), 720.0)

    def test_move_toward_covers_x_then_y(self):
        start, target = Point(0.0, 0.0), Point(1.0, 1.0)
        self.assertEqual(move_toward(start, target, 0.5), Point(0.5, 0.0))
        moved = move_toward(start, target, 1.2)
        self.assertAlmostEqual(moved.x, 1.0)
        self.assertAlmostEqual(moved.y, 0.2)
        self.assertEqual(move_toward(start, target, 2.0), target)

    def test_leg_foot_is_clipped_to_the_run(self):
        start, end = Point(0.0, 0.8), Point(5.0, 0.8)
        self.assertEqual(leg_foot(start, end, Point(2.0, 1.5)), Point(2.0, 0.8))
        self.assertEqual(leg_foot(start, end, Point(7.0, 0.1)), Point(5.0, 0.8))

    def test_leg_foot_reaches_the_vertical_run(self):
        start, end = Point(0.0, 0.0), Point(2.0, 1.0)
        # beside the climb at x=2, far from both ends
        self.assertEqual(leg_foot(start, end, Point(2.3, 0.6)), Point(2.0, 0.6))
        self.assertEqual(leg_foot(start, end, Point(1.0, 0.1)), Point(1.0, 0.0))
        # equally close to both runs
        self.assertEqual(leg_foot(start, end, Point(1.5, 0.5)), Point(1.5, 0.0))
        foot = leg_foot(start, end, Point(2.3, 0.6))
        self.assertAlmostEqual(distance(start, foot) + distance(foot, end), distance(start, end))

    def test_backward_km(self):
        a, b = Point(5.0, 0.0), Point(3.0, 0.0)
        self.assertAlmostEqual(backward_km(a, b, Direction.FORWARD), 2.0)
        self.assertEqual(backward_km(a, b, Direction.BACKWARD), 0.0)
        self.assertEqual(backward_km(a, b, None), 0.0)
        self.assertIs(Direction.FORWARD.reverse, Direction.BACKWARD)

    def test_region_membership(self):
        self.assertTrue(Point(13.12, 1.6).inside(13.12, 1.6))
        self.assertFalse(Point(13.2, 0.5).inside(13.12, 1.6))

    def test_miles(self):
        self.assertAlmostEqual(km_to_miles(KM_PER_MILE), 1.0)


if __name__ == "__main__":
    unittest.main()

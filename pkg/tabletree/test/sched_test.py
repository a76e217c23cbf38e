from __future__ import absolute_import, division, print_function

import unittest

from tabletree.wire.sched import Scheduler, SchedulerStuck, exploreSchedules


def _stepper(sched, log, name, steps):
    def run():
        log.append(name)
        for _ in range(steps):
            sched.step()
            log.append(name)
        return name
    return run


class SchedulerTest(unittest.TestCase):
    def testRunsAllActors(self):
        sched = Scheduler(seed=3)
        log = []
        results, errors = sched.run({
            "a": _stepper(sched, log, "a", 2),
            "b": _stepper(sched, log, "b", 2),
        })
        self.assertEqual({"a": "a", "b": "b"}, results)
        self.assertEqual({}, errors)
        self.assertEqual(3, log.count("a"))
        self.assertEqual(3, log.count("b"))

    def testSameChoicesReplay(self):
        def once(seed):
            sched = Scheduler(seed=seed)
            log = []
            sched.run({name: _stepper(sched, log, name, 3) for name in "abc"})
            return log, sched.trace

        self.assertEqual(once(42), once(42))

    def testExplicitChoices(self):
        sched = Scheduler(choices=[1, 0, 0])
        log = []
        sched.run({"a": _stepper(sched, log, "a", 1),
                   "b": _stepper(sched, log, "b", 1)})
        self.assertEqual(["b", "a", "a", "b"], log)

    def testDefaultPicksLowestName(self):
        sched = Scheduler()
        log = []
        sched.run({"b": _stepper(sched, log, "b", 1),
                   "a": _stepper(sched, log, "a", 1)})
        self.assertEqual(["a", "a", "b", "b"], log)

    def testErrorsCollected(self):
        sched = Scheduler()

        def boom():
            raise ValueError("boom")

        results, errors = sched.run({"ok": lambda: 1, "bad": boom})
        self.assertEqual({"ok": 1}, results)
        self.assertIsInstance(errors["bad"], ValueError)

    def testStepOutsideActorIsNoop(self):
        Scheduler().step()

    def testStuckActor(self):
        sched = Scheduler(timeout=0.2)
        release = []

        def spin():
            while not release:
                pass

        try:
            with self.assertRaises(SchedulerStuck):
                sched.run({"a": lambda: sched.step(), "spin": spin})
        finally:
            release.append(True)


class ExploreTest(unittest.TestCase):
    @staticmethod
    def interleavings(stepsA, stepsB):
        seen = set()

        def runOnce(sched):
            log = []
            sched.run({"a": _stepper(sched, log, "a", stepsA),
                       "b": _stepper(sched, log, "b", stepsB)})
            seen.add(tuple(log))

        return exploreSchedules(runOnce), seen

    def testCountsEveryInterleaving(self):
        # k steps make k + 1 segments; m and n segments interleave C(m + n, m) ways
        runs, seen = self.interleavings(1, 1)
        self.assertEqual(6, runs)
        self.assertEqual(6, len(seen))
        runs, seen = self.interleavings(2, 1)
        self.assertEqual(10, runs)
        self.assertEqual(10, len(seen))

    def testMaxRuns(self):
        self.assertEqual(3, exploreSchedules(
            lambda sched: sched.run({"a": lambda: sched.step(),
                                     "b": lambda: sched.step()}),
            maxRuns=3))

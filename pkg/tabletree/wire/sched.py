"""
Deterministic step scheduler for in-process clusters.

Each actor runs in its own thread, but only one actor runs at a time: an
actor gives up its turn whenever it reaches a step point (every loopback
request is one), and the scheduler picks which waiting actor goes next.
The choice comes from an explicit list, then a seeded RNG, then the
lowest-named actor, so a (choices, seed) pair replays one interleaving
exactly. exploreSchedules() enumerates every interleaving by depth-first
search over the recorded choice points.
"""
import logging
import random
import threading

LOG = logging.getLogger(__name__)


class SchedulerStuck(Exception):
    pass


class Scheduler(object):
    # pylint: disable=too-many-instance-attributes
    def __init__(self, seed=None, choices=None, timeout=60.0):
        self._cond = threading.Condition()
        self._live = set()
        self._waiting = set()
        self._running = None
        self._local = threading.local()
        self._rng = random.Random(seed) if seed is not None else None
        self._choices = list(choices or [])
        self._timeout = timeout
        self.trace = []

    def currentActor(self):
        return getattr(self._local, "name", None)

    def step(self):
        name = self.currentActor()
        if name is None:
            return
        with self._cond:
            self._waiting.add(name)
            self._running = None
            self._cond.notify_all()
            while self._running != name:
                self._cond.wait()

    def _choose(self, options):
        if self._choices:
            return min(self._choices.pop(0), options - 1)
        if self._rng is not None:
            return self._rng.randrange(options)
        return 0

    def _actorMain(self, name, func, results, errors):
        self._local.name = name
        try:
            self.step()
            results[name] = func()
        except BaseException as err:  # pylint: disable=broad-except
            LOG.debug("actor %s raised", name, exc_info=True)
            errors[name] = err
        finally:
            with self._cond:
                self._live.discard(name)
                self._running = None
                self._cond.notify_all()

    def _quiescent(self):
        return self._running is None and self._live <= self._waiting

    def run(self, actors):
        """
        Runs {name: callable} to completion. Returns (results, errors), both
        keyed by actor name.
        """
        results, errors = {}, {}
        with self._cond:
            self._live = set(actors)
        threads = [
            threading.Thread(target=self._actorMain,
                             args=(name, func, results, errors),
                             name="actor-" + name, daemon=True)
            for name, func in sorted(actors.items())]
        for thread in threads:
            thread.start()
        with self._cond:
            while True:
                if not self._cond.wait_for(self._quiescent, self._timeout):
                    raise SchedulerStuck("actors {} never reached a step".format(
                        sorted(self._live - self._waiting)))
                if not self._live:
                    break
                runnable = sorted(self._live)
                index = self._choose(len(runnable))
                self.trace.append((len(runnable), index))
                chosen = runnable[index]
                self._waiting.discard(chosen)
                self._running = chosen
                self._cond.notify_all()
        for thread in threads:
            thread.join()
        return results, errors


def exploreSchedules(runOnce, maxRuns=None):
    """
    Calls runOnce(scheduler) once per distinct interleaving of the actors
    runOnce starts on that scheduler. Returns the number of runs.
    """
    stack = [[]]
    runs = 0
    while stack:
        prefix = stack.pop()
        sched = Scheduler(choices=prefix)
        runOnce(sched)
        runs += 1
        if maxRuns is not None and runs >= maxRuns:
            break
        taken = [chosen for _, chosen in sched.trace]
        for depth in range(len(prefix), len(sched.trace)):
            options, chosen = sched.trace[depth]
            for alt in range(chosen + 1, options):
                stack.append(taken[:depth] + [alt])
    return runs

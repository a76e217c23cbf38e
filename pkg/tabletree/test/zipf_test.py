from __future__ import absolute_import, division, print_function

import collections
import random

import pytest

from tabletree.tools.zipf import UniformGenerator, ZipfGenerator, keyChooser


def sample(gen, count):
    return collections.Counter(gen.next() for _ in range(count))


def testZipfSkew():
    counts = sample(ZipfGenerator(1000, rng=random.Random(3)), 200000)
    assert min(counts) >= 0 and max(counts) < 1000
    assert counts.most_common(1)[0][0] == 0
    assert 1.8 < counts[0] / counts[1] < 2.2
    assert counts[0] > counts[9] > counts[99]


def testZipfDeterministic():
    first = [ZipfGenerator(50, rng=random.Random(9)).next() for _ in range(3)]
    again = [ZipfGenerator(50, rng=random.Random(9)).next() for _ in range(3)]
    assert first == again


def testSingleKey():
    gen = ZipfGenerator(1, rng=random.Random(1))
    assert {gen.next() for _ in range(100)} == {0}


def testUniform():
    counts = sample(UniformGenerator(10, random.Random(4)), 10000)
    assert set(counts) == set(range(10))
    assert max(counts.values()) < 2 * min(counts.values())


@pytest.mark.parametrize(("args", "kind"), [
    (("uniform", 5), UniformGenerator),
    (("zipfian", 5), ZipfGenerator),
    (("zipfian", 5, 0.5), ZipfGenerator),
])
def testKeyChooser(args, kind):
    assert isinstance(keyChooser(*args), kind)


@pytest.mark.parametrize("call", [
    lambda: keyChooser("hotspot", 5),
    lambda: UniformGenerator(0),
    lambda: ZipfGenerator(0),
    lambda: ZipfGenerator(10, theta=0),
])
def testBadArguments(call):
    with pytest.raises(ValueError):
        call()

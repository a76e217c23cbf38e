from __future__ import absolute_import, division, print_function

import unittest

from tabletree.service import service
from tabletree.service.registry import registerServices
from tabletree.wire.loopback import LoopbackTransport
from tabletree.wire.transport import SocketTransport


class SvcBase(object):
    @staticmethod
    def new():
        raise NotImplementedError

    def api(self, arg):
        raise NotImplementedError


class Svc1(SvcBase):
    @staticmethod
    def new():
        return Svc1()

    def api(self, arg):
        return 'service1:{}'.format(arg)


class Svc2(SvcBase):
    @staticmethod
    def new():
        return Svc2()

    def api(self, arg):
        return 'service2:{}'.format(arg)


class ServiceTest(unittest.TestCase):
    def setUp(self):
        service().clear(thisIsATest=True)

    def tearDown(self):
        service().clear(thisIsATest=True)

    def testSingle(self):
        service().register('service', Svc1)
        svc = service().service.new()
        self.assertEqual('service1:foo', svc.api('foo'))

    def testRegisterTwice(self):
        service().register('service', Svc1)
        service().register('service', Svc1)
        with self.assertRaises(AssertionError):
            service().register('service', Svc2)
        service().register('service', Svc2, replace=True)
        self.assertEqual('service2:x', service().service.new().api('x'))

    def testScopedLookup(self):
        service().register('net.s1', Svc1)
        service().register('net.s2', Svc2)
        self.assertEqual('service1:foo', service().lookup('net.s1').new().api('foo'))
        self.assertEqual('service2:foo', service().net.s2.new().api('foo'))
        with self.assertRaises(AttributeError):
            service().lookup('net.s3')

    def testRealTransport(self):
        registerServices()
        registerServices()
        self.assertIs(SocketTransport, service().lookup('net.transport'))

    def testTestingTransport(self):
        registerServices()
        registerServices(testing=True)
        self.assertIs(LoopbackTransport, service().lookup('net.transport'))

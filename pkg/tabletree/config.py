from __future__ import absolute_import, division, print_function

import os

import six

from .dbt import MAX_FANOUT

RC_FILE_HELP = """\
Sample rcfile:
    [client]
    timeout = 5           # seconds before a request fails
    retries = 5           # conflict retries per autocommit statement
    backoff = 0.005       # first retry delay in seconds, doubled each retry
    fanout = 64           # maximum entries per tree node
    max writes = 10000    # write-set limit per transaction
    [server]
    lease = 30            # seconds a prepared lock survives its coordinator
    oracle block = 1000   # timestamps reserved per oracle disk write
    sync = none|flush|fsync # default=flush
"""

CLUSTER_ENV = "TABLETREE_CLUSTER"


class ConfigEnum(object):
    __slots__ = (
        "defaultName",
        "_enumVals",
    )

    def __init__(self, default, **enumVals):
        self._enumVals = enumVals
        assert default in enumVals
        self.defaultName = default
        for enumName in enumVals:
            assert enumName not in self.__slots__

    def names(self):
        return six.iterkeys(self._enumVals)

    def values(self):
        return six.itervalues(self._enumVals)

    @property
    def defaultVal(self):
        return self._enumVals[self.defaultName]

    def __getattr__(self, attr):
        assert attr != "_enumVals"
        if attr in self._enumVals:
            return self._enumVals[attr]
        else:
            return object.__getattribute__(self, attr)


LOG_SYNC = ConfigEnum(
    "FLUSH",  # default
    NONE="none",
    FLUSH="flush",
    FSYNC="fsync",
)


class ConfigError(Exception):
    pass


def _getConfig(cfgParser, section, option, defaultValue=None):
    if not cfgParser.has_section(section):
        return defaultValue
    if not cfgParser.has_option(section, option):
        return defaultValue
    return cfgParser.get(section, option)


def _getEnumConfig(cfgParser, section, option, enum):
    optionVal = _getConfig(
        cfgParser, section, option, enum.defaultVal)
    if optionVal not in list(enum.values()):
        raise ConfigError(
            "RC file has invalid \"{section}.{option}\" setting {optionVal}.  Valid "
            "options: {allowedVals}".format(
                section=section,
                option=option,
                optionVal=optionVal,
                allowedVals=", ".join(list(enum.values()))))

    return optionVal


def _getNumberConfig(cfgParser, section, option, default, kind=float):
    val = _getConfig(cfgParser, section, option, None)
    if val is None:
        return default
    try:
        num = kind(val)
    except ValueError:
        num = None
    if num is None or num <= 0:
        raise ConfigError(
            "RC file has invalid \"{section}.{option}\" setting {optionVal}.  Valid "
            "options: a positive {kind}".format(
                section=section,
                option=option,
                optionVal=val,
                kind="integer" if kind is int else "number"))
    return num


def parseHostPort(text):
    host, sep, port = text.strip().rpartition(":")
    if not sep or not host:
        raise ConfigError("expected host:port, got {!r}".format(text))
    try:
        portNum = int(port)
    except ValueError as err:
        raise ConfigError("bad port in {!r}".format(text)) from err
    if not 0 <= portNum < 65536:
        raise ConfigError("port out of range in {!r}".format(text))
    return host, portNum


def loadCluster(filename):
    """
    Reads a cluster membership file: one host:port per line, the line's
    position (ignoring blanks and comments) being the ServerId.
    """
    members = []
    try:
        with open(os.path.expanduser(filename), encoding="utf-8") as clusterFile:
            for line in clusterFile:
                line = line.split("#", 1)[0].strip()
                if line:
                    members.append(parseHostPort(line))
    except IOError as err:
        raise ConfigError("cannot read cluster file {}: {}".format(
            filename, err)) from err
    if not members:
        raise ConfigError("cluster file {} lists no servers".format(filename))
    return members


def writeCluster(filename, members):
    with open(filename, "w", encoding="utf-8") as clusterFile:
        for host, port in members:
            clusterFile.write("{}:{}\n".format(host, port))


class Config(object):
    # pylint: disable=too-many-instance-attributes
    validConfig = {
        "client": {"timeout", "retries", "backoff", "fanout", "max writes"},
        "server": {"lease", "oracle block", "sync"},
    }

    def _validateConfigParser(self, cfgParser):
        cfgSections = set(cfgParser.sections())
        unknownSections = cfgSections - set(self.validConfig.keys())
        if unknownSections:
            raise ConfigError(
                "RC file has unknown configuration sections: {}".format(
                    ", ".join(sorted(unknownSections))))
        for section in cfgSections:
            cfgValues = set(cfgParser.options(section))
            unknownOptions = cfgValues - self.validConfig[section]
            if unknownOptions:
                raise ConfigError(
                    "RC file has unknown configuration options in "
                    "section \"{}\": {}".format(
                        section, ", ".join(sorted(unknownOptions))))

    def __init__(self, options):
        self.options = options
        self._clusterFile = getattr(options, "cluster", None)
        self._cluster = None
        self._logDir = os.path.expanduser(
            getattr(options, "logDir", None) or "~/.local/share/tabletree/log")

        rcFile = os.path.expanduser(options.rcFile)
        cfgParser = six.moves.configparser.RawConfigParser(
            inline_comment_prefixes=("#",))
        cfgParser.read(rcFile)
        self._validateConfigParser(cfgParser)

        self._timeout = _getNumberConfig(cfgParser, "client", "timeout", 5.0)
        self._retries = _getNumberConfig(cfgParser, "client", "retries", 5, int)
        self._backoff = _getNumberConfig(cfgParser, "client", "backoff", 0.005)
        self._fanout = _getNumberConfig(cfgParser, "client", "fanout", 64, int)
        if not 4 <= self._fanout <= MAX_FANOUT:
            raise ConfigError(
                "RC file has invalid \"client.fanout\" setting {}.  Valid "
                "options: an integer from 4 to {}".format(self._fanout, MAX_FANOUT))
        self._maxWrites = _getNumberConfig(
            cfgParser, "client", "max writes", 10000, int)
        self._lease = _getNumberConfig(cfgParser, "server", "lease", 30.0)
        self._oracleBlock = _getNumberConfig(
            cfgParser, "server", "oracle block", 1000, int)
        self._sync = _getEnumConfig(cfgParser, "server", "sync", LOG_SYNC)

    @property
    def verbose(self):
        return getattr(self.options, "verbose", None)

    @staticmethod
    def checkDir(dirName):
        if not os.access(dirName, os.W_OK | os.X_OK | os.R_OK):
            os.makedirs(dirName)
        return dirName

    @property
    def logDir(self):
        return self._logDir

    @property
    def clusterFile(self):
        return self._clusterFile

    @property
    def cluster(self):
        if self._cluster is None:
            if not self._clusterFile:
                raise ConfigError(
                    "no cluster file: use --cluster or set " + CLUSTER_ENV)
            self._cluster = loadCluster(self._clusterFile)
        return self._cluster

    @property
    def timeout(self):
        return self._timeout

    @property
    def retries(self):
        return self._retries

    @property
    def backoff(self):
        return self._backoff

    @property
    def fanout(self):
        return self._fanout

    @property
    def maxWrites(self):
        return self._maxWrites

    @property
    def lease(self):
        return self._lease

    @property
    def oracleBlock(self):
        return self._oracleBlock

    @property
    def sync(self):
        return self._sync

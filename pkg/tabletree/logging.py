from __future__ import absolute_import, division, print_function

import logging
import os
import sys

FORMAT = (
    '+%(process)-6d %(levelname)-9s '
    '%(name)-20s %(filename)20s:%(lineno)-5d '
    '[%(asctime)s] %(message)s')


def stderrLevel(verbose):
    """-v raises stderr output to INFO, -vv to DEBUG."""
    count = len(verbose or ())
    if count >= 2:
        return logging.DEBUG
    if count == 1:
        return logging.INFO
    return logging.WARNING


def debugLogPath(logDir, toolName):
    return os.path.join(logDir, toolName + "-debug.log")


def setup(logDir, toolName, debug=False, verbose=None):
    if debug:
        os.makedirs(logDir, exist_ok=True)
        logging.basicConfig(filename=debugLogPath(logDir, toolName),
                            level=logging.DEBUG, format=FORMAT)
    else:
        logging.basicConfig(stream=sys.stderr, level=stderrLevel(verbose),
                            format=FORMAT)

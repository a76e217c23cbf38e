from __future__ import absolute_import

from tabletree.config import CLUSTER_ENV, RC_FILE_HELP


def binDescriptionWithStandardFooter(desc):
    return """{desc}


Configuration:
    The default configuration file location is `~/.config/tabletreerc`, but can
    be overwritten using the --rc-file option. The cluster membership file is
    given with --cluster or the {env} environment variable.

{rcfile}
""".format(desc=desc.strip(), env=CLUSTER_ENV, rcfile=RC_FILE_HELP)

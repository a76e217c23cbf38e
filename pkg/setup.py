from __future__ import absolute_import

import setuptools

setuptools.setup(use_scm_version=True)

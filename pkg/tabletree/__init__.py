"""
tabletree: a transactional SQL store over a partitioned multi-version
key-value service, with the query processor embedded in every client.
"""
from __future__ import absolute_import, division, print_function

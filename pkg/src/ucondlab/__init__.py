"""Desk-scale verification of unconditional integration and dual actions.

Submodules:

- :mod:`ucondlab.ucond` -- unconditional integration over discrete spaces with a local family
- :mod:`ucondlab.groups` -- finite abelian groups, characters and Fourier transforms
- :mod:`ucondlab.positive` -- positive-type operator fields, Naimark dilation, spectral measures
- :mod:`ucondlab.bundles` -- graded matrix bundles, cross-sectional algebra, dual action
- :mod:`ucondlab.actions` -- integrable elements for finite actions and the shift action of Z
- :mod:`ucondlab.cli` -- scenario runner and JSON reports
"""

__version__ = "0.1.0"

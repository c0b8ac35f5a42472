"""Numerical toolkit for weighted higher-order fractional Sobolev seminorms.

Modules:

- ``params``: exponent algebra, parameter windows, CKN admissibility
- ``functions``: closed-form test functions with exact gradients
- ``quadrature``: radial quadrature and seeded Monte Carlo engines
- ``norms``: weighted Lebesgue norms and weighted Gagliardo seminorms
- ``rearrange``: distribution functions, rearrangements, Lorentz quasinorms
- ``mollify``: mollifiers, cutoffs and the smooth approximation pipeline
- ``verify``: executable inequality and scaling checks
- ``cli``: the ``fraclab`` command-line driver
"""

__version__ = "0.1.0"

from .params import Params, validate  # noqa: E402,F401
from .quadrature import Estimate, McConfig  # noqa: E402,F401

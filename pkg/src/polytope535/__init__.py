"""Group-theoretic engine for the universal locally projective {5,3,5} polytope.

The package constructs the automorphism group of the universal polytope with
dodecahedral facets and hemi-icosahedral vertex figures as an explicit
permutation group, verifies its headline numeric facts, checks the
semisparse-subgroup catalog, and reproduces quotient-polytope face censuses.
"""

__version__ = "0.1.0"

from .perms import (  # noqa: F401
    Permutation,
    Word,
    Alphabet,
    GeneratorAssignment,
    S_ALPHABET,
    V_ALPHABET,
    XY_ALPHABET,
    parse_cycles,
    evaluate_word,
    element_order,
    embed_direct_product,
)

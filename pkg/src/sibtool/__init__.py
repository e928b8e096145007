"""Finite relational structures: exchangeability and k-cliques, mutual
algebraicity, embeddings, and presentations of countable structures with
their sibling generators."""

from .errors import (
    CliqueError,
    FormulaError,
    InternalCheckError,
    ParseError,
    PresentationError,
    SearchTimeout,
    SibtoolError,
    StructureError,
)
from .structure import (
    Signature,
    Structure,
    disjoint_union,
    induced_substructure,
    parse_structure,
    serialize_structure,
)

__version__ = "0.1.0"

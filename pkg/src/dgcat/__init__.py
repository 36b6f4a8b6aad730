"""dgcat: exact computer algebra for finite DG categories.

Builds pretriangulated hulls via one-sided twisted complexes, decides
homotopy-category questions by exact linear algebra, verifies semiorthogonal
decompositions through replayable certificates, and maintains the resulting
Grothendieck ring of pretriangulated categories.
"""

__version__ = "0.1.0"

from . import dgcore, exactlin, fixtures, functors, pretr, ptring, schema, sodgen
from .dgcore import DGCategory, Morphism, ObjId, from_quiver, opposite, swap_iso, tensor
from .exactlin import GF, QQ, ChainComplex, Matrix, field_from_spec, smith_normal_form
from .pretr import TwistedComplex, TwistedMorphism, cone, embed, ho_hom, hom_complex, is_ho_iso, reduce, shift
from .ptring import ClassExpr, Ledger
from .sodgen import SODClaim, check_sod, check_exceptional_collection, ext_table, verify_generation

__all__ = [
    "dgcore",
    "exactlin",
    "fixtures",
    "functors",
    "pretr",
    "ptring",
    "schema",
    "sodgen",
    "DGCategory",
    "Morphism",
    "ObjId",
    "from_quiver",
    "opposite",
    "swap_iso",
    "tensor",
    "GF",
    "QQ",
    "ChainComplex",
    "Matrix",
    "field_from_spec",
    "smith_normal_form",
    "TwistedComplex",
    "TwistedMorphism",
    "cone",
    "embed",
    "ho_hom",
    "hom_complex",
    "is_ho_iso",
    "reduce",
    "shift",
    "ClassExpr",
    "Ledger",
    "SODClaim",
    "check_sod",
    "check_exceptional_collection",
    "ext_table",
    "verify_generation",
]

"""Exact counting in F_q[T] with prime sieves and product-set marking."""

from .errors import *  # noqa: F401,F403
from .gfpoly import (
    NEG_INF,
    FieldSpec,
    MonicIndex,
    Poly,
    enumerate_monics,
    field_create,
    field_from_q,
    monic_decode,
    monic_encode,
    poly_format,
    poly_parse,
)
from .fordsum import LN2_LOWER, LambdaSequence, VectorV, lambda_sequence, lsum
from .mtable import DELTA, APSpec, HitSet, h_count, m_table_count, product_set_count
from .report import Report
from .rough import psi, psi_ap, selberg_weights
from .sieve import SPFTable, build_spf, pi, pi_formula

__version__ = "0.1.0"

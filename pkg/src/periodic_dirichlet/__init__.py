"""Dirichlet series with periodic coefficients: characters, evaluation,
primitive decomposition, zero counting and certified zeros in Re s > 1."""

from .characters import (
    Character,
    CharacterMatrix,
    PrimitiveDescriptor,
    character_matrix,
    conductor,
    enumerate_characters,
    induce,
    primitive_inducer,
    trivial_character,
)
from .decomposition import membership, primitive_components, project, reconstruct, tilde_basis
from .errors import *  # noqa: F401,F403
from .io import emit, parse_sequence_file
from .special import (
    DirichletPolynomial,
    EvalOptions,
    PeriodicSequence,
    dirichlet_poly_eval,
    euler_tail_eval,
    f_eval,
    hurwitz_zeta,
    l_function,
    twisted_poly_eval,
)
from .zerocount import (
    Rectangle,
    count_zeros,
    density_table,
    distinct_zeros,
    second_moment,
    theorem3_ratio,
    winding_number,
)

__version__ = "0.1.0"

# Copyright The flexmg Authors.
# SPDX-License-Identifier: Apache-2.0
"""Flexible algebraic multigrid cycles: setup, cycle programs, solvers and optimizer."""

from ._core import (
    CsrMatrix,
    CycleProgram,
    Hierarchy,
    InvalidArgument,
    ParseError,
    SetupError,
    assemble,
    build_hierarchy,
    evolve,
    nsga2_rank,
    pcg,
    random_unit_vector,
    solve,
    to_dot,
    v_cycle,
    work_units,
)

__all__ = [
    "CsrMatrix",
    "CycleProgram",
    "Hierarchy",
    "InvalidArgument",
    "ParseError",
    "SetupError",
    "assemble",
    "build_hierarchy",
    "evolve",
    "nsga2_rank",
    "pcg",
    "random_unit_vector",
    "solve",
    "to_dot",
    "v_cycle",
    "work_units",
]

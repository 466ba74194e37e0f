"""Bit-vector expression language shared by the translator and all engines."""

from .evaluate import UnboundVariable, evaluate, evaluate_by_name, evaluate_with
from .expr import (
    FALSE, TRUE, BvExpr, WidthError, add, boolconst, bvand, bvnot, bvor, bvxor,
    concat, concat_all, conjuncts, const, const_wrap, eq, extract, implies,
    iter_nodes, ite, land, lor, lshr, mask, mul, ne, neg, redand, redor,
    redxor, resize, sext, shl, slt, sub, substitute, truthy, uge, ugt, ule,
    ult, var, var_names, var_nodes, variables, zext,
)
from .lower import (
    LoweringError, lower_bit_assign, lower_concat, lower_dynamic_bit_assign,
    lower_dynamic_select, lower_indexed_part_select, lower_part_select,
)
from .pretty import pretty
from .simplify import fold

__all__ = [
    "BvExpr", "WidthError", "UnboundVariable", "LoweringError", "TRUE", "FALSE",
    "add", "boolconst", "bvand", "bvnot", "bvor", "bvxor", "concat",
    "concat_all", "conjuncts", "const", "const_wrap", "eq", "extract",
    "implies", "iter_nodes", "ite", "land", "lor", "lshr", "mask", "mul", "ne",
    "neg", "redand", "redor", "redxor", "resize", "sext", "shl", "slt", "sub",
    "substitute", "truthy", "uge", "ugt", "ule", "ult", "var", "var_names",
    "var_nodes", "variables", "zext", "evaluate", "evaluate_by_name",
    "evaluate_with", "fold", "pretty", "lower_bit_assign", "lower_concat",
    "lower_dynamic_bit_assign", "lower_dynamic_select",
    "lower_indexed_part_select", "lower_part_select",
]

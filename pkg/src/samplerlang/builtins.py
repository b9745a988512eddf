"""Built-in function table: typing signatures and strict IEEE-double evaluation.

Arithmetic is polymorphic over the numeric carriers N, R+ and R with the
promotion order N <= R+ <= R; comparisons are typed over the split domain
f^-1(0) + f^-1(1) and return Bool, which is what lets the type checker track
their discontinuities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .terms import (
    BOOL,
    COMPARISONS,
    NAT,
    POSREAL,
    PredInv,
    ProdT,
    REAL,
    SumT,
    Type,
    type_equal,
)


class EvalError(Exception):
    """Runtime evaluation failure (domain errors, unbound names)."""

    def __init__(self, message: str, pos=None):
        super().__init__(message if pos is None else f"{pos[0]}:{pos[1]}: {message}")
        self.message = message
        self.pos = pos


NUMERIC_ORDER = {NAT: 0, POSREAL: 1, REAL: 2}


def is_numeric(ty: Type) -> bool:
    return ty in NUMERIC_ORDER


def numeric_join(a: Type, b: Type) -> Type:
    return a if NUMERIC_ORDER[a] >= NUMERIC_ORDER[b] else b


def numeric_fits(a: Type, b: Type) -> bool:
    """Whether a value of numeric carrier `a` may be used where `b` is expected."""
    return is_numeric(a) and is_numeric(b) and NUMERIC_ORDER[a] <= NUMERIC_ORDER[b]


@dataclass(frozen=True)
class BuiltinSig:
    name: str
    arity: int
    result: Callable  # arg types -> result type (raises TypeError on misuse)
    continuity: str  # 'continuous' | 'comparison'
    fn: Callable  # evaluation on Python numbers / bools


def _num_args(name, tys):
    for ty in tys:
        if not is_numeric(ty):
            raise _sig_error(name, tys)
    return tys


def _sig_error(name, tys):
    shown = ", ".join(map(repr, tys))
    return TypeError(f"builtin '{name}' does not accept arguments of type ({shown})")


def _join_result(name):
    def result(*tys):
        _num_args(name, tys)
        out = tys[0]
        for ty in tys[1:]:
            out = numeric_join(out, ty)
        return out

    return result


def _fixed_result(name, out, arg_check=None):
    def result(*tys):
        _num_args(name, tys)
        if arg_check is not None:
            arg_check(name, tys)
        return out

    return result


def _f_div(a, b):
    if b == 0:
        raise EvalError("division by zero")
    return a / b


def _f_sqrt(a):
    if a < 0:
        raise EvalError(f"sqrt of negative number {a}")
    return math.sqrt(a)


def _f_log(a):
    if a <= 0:
        raise EvalError(f"log of non-positive number {a}")
    return math.log(a)


_TABLE: dict[str, BuiltinSig] = {}


def _register(name, arity, result, continuity, fn):
    _TABLE[name] = BuiltinSig(name, arity, result, continuity, fn)


_register("plus", 2, _join_result("plus"), "continuous", lambda a, b: a + b)
_register("times", 2, _join_result("times"), "continuous", lambda a, b: a * b)
_register("minus", 2, _fixed_result("minus", REAL), "continuous", lambda a, b: a - b)
_register("div", 2, _join_result("div"), "continuous", _f_div)
_register("neg", 1, _fixed_result("neg", REAL), "continuous", lambda a: -a)
_register("sqrt", 1, _fixed_result("sqrt", POSREAL), "continuous", _f_sqrt)
_register("exp", 1, _fixed_result("exp", POSREAL), "continuous", math.exp)
_register("log", 1, _fixed_result("log", REAL), "continuous", _f_log)
_register("cos", 1, _fixed_result("cos", REAL), "continuous", math.cos)
_register("sin", 1, _fixed_result("sin", REAL), "continuous", math.sin)
_register("abs", 1, _join_result("abs"), "continuous", abs)
_register("pi", 0, lambda: POSREAL, "continuous", lambda: math.pi)

_CMP_FN = {
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
}

for _cmp in COMPARISONS:
    _register(_cmp, 1, None, "comparison", _CMP_FN[_cmp])


def comparison_domain(cmp: str) -> SumT:
    return SumT((PredInv(cmp, 0), PredInv(cmp, 1)))


def signature(name: str) -> BuiltinSig:
    sig = _TABLE.get(name)
    if sig is None:
        raise KeyError(f"unknown builtin '{name}'")
    return sig


def is_builtin(name: str) -> bool:
    return name in _TABLE


def is_comparison(name: str) -> bool:
    return name in COMPARISONS


def comparison_result_type() -> Type:
    return BOOL


def apply_builtin(name: str, args: list, pos=None):
    """Evaluate a builtin on runtime values (floats/ints/bools, pairs as tuples)."""
    sig = signature(name)
    if sig.continuity == "comparison":
        # the single argument is a pair value
        (pair,) = args
        if not (isinstance(pair, tuple) and len(pair) == 2):
            raise EvalError(f"comparison '{name}' expects a pair", pos)
        return sig.fn(pair[0], pair[1])
    try:
        return sig.fn(*args)
    except EvalError as err:
        if err.pos is None and pos is not None:
            raise EvalError(err.message, pos) from None
        raise
    except (OverflowError, ValueError) as err:
        raise EvalError(f"builtin '{name}' failed: {err}", pos) from None


def declared_type(name: str) -> Optional[tuple[Type, Type]]:
    """Fixed (dom, cod) for comparisons; arithmetic is promotion-typed instead."""
    if is_comparison(name):
        return comparison_domain(name), BOOL
    return None


def fits(actual: Type, expected: Type) -> bool:
    """Structural compatibility with numeric promotion, covariant everywhere.

    This is the permissive direction only (values of `actual` are usable at
    `expected`); topology-refining conversions go through subtyping instead.
    """
    if type_equal(actual, expected):
        return True
    if is_numeric(actual) and is_numeric(expected):
        return numeric_fits(actual, expected)
    match actual, expected:
        case ProdT(la, ra), ProdT(lb, rb):
            return fits(la, lb) and fits(ra, rb)
        case SumT(sa), SumT(sb):
            return len(sa) == len(sb) and all(fits(x, y) for x, y in zip(sa, sb))
        case _:
            from .terms import FunT, SamplerT

            if isinstance(actual, SamplerT) and isinstance(expected, SamplerT):
                return fits(actual.payload, expected.payload)
            if isinstance(actual, FunT) and isinstance(expected, FunT):
                # domains must agree exactly; codomain may promote
                return type_equal(actual.dom, expected.dom) and fits(
                    actual.cod, expected.cod
                )
    return False

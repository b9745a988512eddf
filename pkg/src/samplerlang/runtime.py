"""Runtime values shared by both evaluation engines.

Grounds are Python bools/ints/floats, pairs are 2-tuples, unit is (),
injections and closures are small wrapper classes, and a finite sampler
evaluation is a WeightedList.  `compile_fn` turns a sampler-free closure
into a plain Python callable; both engines route function application
through `apply_value`, so weights and values come out bit-identical.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

from .builtins import EvalError, signature
from .terms import (
    App,
    Builtin,
    Case,
    Cast,
    Const,
    Fst,
    Hd,
    Inj,
    Lam,
    Let,
    Map,
    Pair,
    Prng,
    Prod,
    Reweight,
    Snd,
    Term,
    Thin,
    Tl,
    Var,
    Wt,
)

WEIGHT_ONE = 1.0


@dataclass
class VInj:
    index: int
    value: object


@dataclass
class VClosure:
    params: tuple[tuple[str, object], ...]
    body: Term
    env: dict
    _compiled: Optional[Callable] = field(default=None, repr=False)


@dataclass
class WeightedList:
    entries: list[tuple[object, float]]

    def __len__(self):
        return len(self.entries)


def destructure(params, value) -> list[tuple[str, object]]:
    """Bind a parameter group against a right-nested tuple value."""
    names = [n for n, _ in params]
    if len(names) == 1:
        return [(names[0], value)]
    out = []
    cur = value
    for name in names[:-1]:
        if not (isinstance(cur, tuple) and len(cur) == 2):
            raise EvalError(f"expected a pair while binding '{name}'")
        out.append((name, cur[0]))
        cur = cur[1]
    out.append((names[-1], cur))
    return out


# ---------------------------------------------------------------------------
# Value equality (bit-exact) and flattening
# ---------------------------------------------------------------------------


def _float_bits(x: float) -> bytes:
    return struct.pack("<d", x)


def value_equal(a, b) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, float) or isinstance(b, float):
        return (
            isinstance(a, float)
            and isinstance(b, float)
            and _float_bits(a) == _float_bits(b)
        )
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(value_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, VInj) and isinstance(b, VInj):
        return a.index == b.index and value_equal(a.value, b.value)
    if isinstance(a, WeightedList) and isinstance(b, WeightedList):
        return len(a.entries) == len(b.entries) and all(
            value_equal(x, y) and value_equal(u, w)
            for (x, u), (y, w) in zip(a.entries, b.entries)
        )
    return a is b


def value_to_point(v):
    """Flatten a runtime value to a point: floats and nested 2-tuples.

    Booleans embed as 1.0/0.0 for integration; identity-level atom merging
    keeps the original values instead.
    """
    if isinstance(v, bool):
        return 1.0 if v else 0.0
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, tuple):
        return tuple(value_to_point(x) for x in v)
    if isinstance(v, VInj):
        return value_to_point(v.value)
    raise EvalError(f"value {v!r} has no point representation")


def value_to_term(v) -> Term:
    if isinstance(v, (bool, int, float)):
        return Const(v)
    if isinstance(v, tuple):
        if v == ():
            return Const(())
        left, right = v
        return Pair(value_to_term(left), value_to_term(right))
    if isinstance(v, VInj):
        return Inj(v.index, value_to_term(v.value))
    if isinstance(v, Term):
        return v
    raise EvalError(f"value {v!r} cannot be embedded as a term")


# ---------------------------------------------------------------------------
# Closure compilation (sampler-free bodies only)
# ---------------------------------------------------------------------------

_SAMPLER_NODES = (Prng, Prod, Map, Reweight, Hd, Wt, Tl, Thin)


class _NotCompilable(Exception):
    pass


def _compile(term: Term, bind: Callable[[str], Optional[Callable]]):
    """Build env-dict -> value evaluators; raises _NotCompilable on samplers."""
    match term:
        case Var(name):
            outer = bind(name)
            if outer is not None:
                return outer
            return lambda env, _n=name: env[_n]
        case Const(value):
            return lambda env, _v=value: _v
        case Builtin(op, args):
            sig = signature(op)
            fns = [_compile(a, bind) for a in args]
            raw = sig.fn
            pos = term.pos
            if sig.continuity == "comparison":
                f0 = fns[0]
                return lambda env: raw(*_pair(f0(env), op, pos))
            if len(fns) == 0:
                return lambda env: raw()
            if len(fns) == 1:
                f0 = fns[0]
                return lambda env: _guard(raw, (f0(env),), op, pos)
            f0, f1 = fns
            return lambda env: _guard(raw, (f0(env), f1(env)), op, pos)
        case Pair(left, right):
            fl, fr = _compile(left, bind), _compile(right, bind)
            return lambda env: (fl(env), fr(env))
        case Fst(body):
            fb = _compile(body, bind)
            return lambda env: fb(env)[0]
        case Snd(body):
            fb = _compile(body, bind)
            return lambda env: fb(env)[1]
        case Cast(_, body):
            return _compile(body, bind)
        case Inj(index, body):
            fb = _compile(body, bind)
            return lambda env: VInj(index, fb(env))
        case Case(scrutinee, branches):
            fs = _compile(scrutinee, bind)
            compiled = []
            for binder, body in branches:
                compiled.append((binder, _compile(body, bind)))
            def run_case(env):
                v = fs(env)
                if isinstance(v, bool):
                    idx, payload = (0, ()) if v else (1, ())
                elif isinstance(v, VInj):
                    idx, payload = v.index, v.value
                else:
                    raise EvalError(f"case scrutinee {v!r} is not a sum value")
                binder, fb = compiled[idx]
                if binder == "_":
                    return fb(env)
                env2 = dict(env)
                env2[binder] = payload
                return fb(env2)
            return run_case
        case Let(name, bound, body):
            fbound = _compile(bound, bind)
            fbody = _compile(body, bind)
            def run_let(env, _n=name):
                env2 = dict(env)
                env2[_n] = fbound(env)
                return fbody(env2)
            return run_let
        case Lam(params, body):
            fbody = _compile(body, bind)
            def make_closure(env, _p=params):
                def call(arg):
                    env2 = dict(env)
                    for n, v in destructure(_p, arg):
                        env2[n] = v
                    return fbody(env2)
                return call
            return make_closure
        case App(fn, arg):
            ff, fa = _compile(fn, bind), _compile(arg, bind)
            def run_app(env):
                f = ff(env)
                a = fa(env)
                if isinstance(f, VClosure):
                    return apply_value(f, a)
                return f(a)
            return run_app
        case _ if isinstance(term, _SAMPLER_NODES):
            raise _NotCompilable(term)
    raise _NotCompilable(term)


def _pair(v, op, pos):
    if not (isinstance(v, tuple) and len(v) == 2):
        raise EvalError(f"comparison '{op}' expects a pair", pos)
    return v


def _guard(raw, args, op, pos):
    try:
        return raw(*args)
    except EvalError as err:
        if err.pos is None and pos is not None:
            raise EvalError(err.message, pos) from None
        raise
    except (OverflowError, ValueError, ZeroDivisionError) as err:
        raise EvalError(f"builtin '{op}' failed: {err}", pos) from None


def compile_fn(clo: VClosure) -> Optional[Callable]:
    """A fast callable for a sampler-free closure body, or None."""
    if clo._compiled is not None:
        return clo._compiled
    try:
        body = _compile(clo.body, lambda name: None)
    except _NotCompilable:
        return None
    params = clo.params
    base_env = clo.env

    def call(arg):
        env = dict(base_env)
        for n, v in destructure(params, arg):
            env[n] = v
        return body(env)

    clo._compiled = call
    return call


def apply_value(fn, arg):
    """Apply a sampler-free runtime function value to a runtime value."""
    if isinstance(fn, VClosure):
        fast = compile_fn(fn)
        if fast is None:
            raise EvalError("closure body builds samplers; not a data function")
        return fast(arg)
    if callable(fn):
        return fn(arg)
    raise EvalError(f"cannot apply non-function value {fn!r}")

"""Demand-driven weighted-stream engine.

A sampler evaluates to an RStream: an affine index view (i -> a*i + b) over a
memoized core, so `tl` and `thin` are O(1) shifts sharing their parent's memo
instead of recomputations.  `truncate` projects any result onto length-N
weighted lists, which must agree bit-exactly with big-step evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .builtins import EvalError, apply_builtin
from .externs import Externs, ExternStream
from .runtime import (
    WEIGHT_ONE,
    VClosure,
    VInj,
    WeightedList,
    compile_fn,
    destructure,
)
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


class StreamCore:
    """Memoized entry source; entry(i) is 1-based and stable across calls."""

    def __init__(self):
        self._memo: dict[int, tuple] = {}

    def entry(self, i: int) -> tuple:
        hit = self._memo.get(i)
        if hit is None:
            hit = self._compute(i)
            self._memo[i] = hit
        return hit

    def _compute(self, i: int) -> tuple:
        raise NotImplementedError


class ExternCore(StreamCore):
    def __init__(self, stream: ExternStream):
        super().__init__()
        self.stream = stream

    def entry(self, i: int) -> tuple:  # extern memoizes internally
        return self.stream.entry(i)


class PrngCore(StreamCore):
    """Iterates the step function; values are memoized as a growing list."""

    def __init__(self, apply_fn: Callable, seed_value):
        super().__init__()
        self.apply_fn = apply_fn
        self.values = [seed_value]

    def entry(self, i: int) -> tuple:
        while len(self.values) < i:
            self.values.append(self.apply_fn(self.values[-1]))
        return self.values[i - 1], WEIGHT_ONE


class MapCore(StreamCore):
    def __init__(self, apply_fn: Callable, parent: "RStream"):
        super().__init__()
        self.apply_fn = apply_fn
        self.parent = parent

    def _compute(self, i: int) -> tuple:
        v, w = self.parent.entry(i)
        return self.apply_fn(v), w


class ReweightCore(StreamCore):
    def __init__(self, apply_fn: Callable, parent: "RStream"):
        super().__init__()
        self.apply_fn = apply_fn
        self.parent = parent

    def _compute(self, i: int) -> tuple:
        v, w = self.parent.entry(i)
        factor = self.apply_fn(v)
        if factor < 0:
            raise EvalError(f"negative weight {factor} from reweight")
        return v, factor * w


class ProdCore(StreamCore):
    def __init__(self, left: "RStream", right: "RStream"):
        super().__init__()
        self.left = left
        self.right = right

    def _compute(self, i: int) -> tuple:
        lv, lw = self.left.entry(i)
        rv, rw = self.right.entry(i)
        return (lv, rv), lw * rw


@dataclass(frozen=True)
class RStream:
    """Affine view over a core: entry(i) = core.entry(a*i + b)."""

    core: StreamCore
    a: int = 1
    b: int = 0

    def entry(self, i: int) -> tuple:
        if i < 1:
            raise EvalError(f"stream index {i} out of range (1-based)")
        return self.core.entry(self.a * i + self.b)

    def tail(self) -> "RStream":
        return RStream(self.core, self.a, self.b + self.a)

    def thinned(self, k: int) -> "RStream":
        return RStream(self.core, self.a * k, self.b + self.a * (1 - k))

    def prefix(self, n: int) -> list[tuple]:
        return [self.entry(i) for i in range(1, n + 1)]


class StreamEvaluator:
    """Call-by-value evaluation building lazy streams for sampler nodes."""

    def __init__(self, externs: Externs):
        self.externs = externs

    def eval(self, term: Term, env: Optional[dict] = None):
        env = env if env is not None else {}
        match term:
            case Var(name):
                if name in env:
                    return env[name]
                if name in self.externs:
                    return RStream(ExternCore(self.externs.stream(name)))
                raise EvalError(f"unbound variable '{name}'", term.pos)

            case Const(value):
                return value

            case Lam():
                return VClosure(term.params, term.body, dict(env))

            case Builtin(op, args):
                vals = [self.eval(a, env) for a in args]
                return apply_builtin(op, vals, term.pos)

            case Cast(_, body):
                return self.eval(body, env)

            case Inj(index, body):
                return VInj(index, self.eval(body, env))

            case Case(scrutinee, branches):
                sv = self.eval(scrutinee, env)
                if isinstance(sv, bool):
                    index, payload = (0, ()) if sv else (1, ())
                elif isinstance(sv, VInj):
                    index, payload = sv.index, sv.value
                else:
                    raise EvalError(
                        f"case scrutinee {sv!r} is not a sum value", term.pos
                    )
                binder, body = branches[index]
                if binder == "_":
                    return self.eval(body, env)
                env2 = dict(env)
                env2[binder] = payload
                return self.eval(body, env2)

            case Pair(left, right):
                return (self.eval(left, env), self.eval(right, env))

            case Fst(body):
                v = self.eval(body, env)
                return v[0]

            case Snd(body):
                v = self.eval(body, env)
                return v[1]

            case Let(name, bound, body):
                env2 = dict(env)
                env2[name] = self.eval(bound, env)
                return self.eval(body, env2)

            case App(fn, arg):
                fv = self.eval(fn, env)
                av = self.eval(arg, env)
                return self.apply(fv, av)

            case Hd(body):
                return self._stream(body, env, term).entry(1)[0]

            case Wt(body):
                return self._stream(body, env, term).entry(1)[1]

            case Tl(body):
                return self._stream(body, env, term).tail()

            case Thin(count, sampler):
                return self._stream(sampler, env, term).thinned(count)

            case Prod(left, right):
                ls = self._stream(left, env, term)
                rs = self._stream(right, env, term)
                return RStream(ProdCore(ls, rs))

            case Map(fn, sampler):
                fv = self.eval(fn, env)
                parent = self._stream(sampler, env, term)
                return RStream(MapCore(self._applier(fv), parent))

            case Reweight(fn, sampler):
                fv = self.eval(fn, env)
                parent = self._stream(sampler, env, term)
                return RStream(ReweightCore(self._applier(fv), parent))

            case Prng(step, seed):
                fv = self.eval(step, env)
                seed_v = self.eval(seed, env)
                return RStream(PrngCore(self._applier(fv), seed_v))

        raise EvalError(f"cannot evaluate {term!r}", getattr(term, "pos", None))

    # -- application ----------------------------------------------------------

    def apply(self, fn, arg):
        if isinstance(fn, VClosure):
            fast = compile_fn(fn)
            if fast is not None:
                return fast(arg)
            env2 = dict(fn.env)
            for n, v in destructure(fn.params, arg):
                env2[n] = v
            return self.eval(fn.body, env2)
        if callable(fn):
            return fn(arg)
        raise EvalError(f"cannot apply non-function value {fn!r}")

    def _applier(self, fn) -> Callable:
        if isinstance(fn, VClosure):
            fast = compile_fn(fn)
            if fast is not None:
                return fast
        return lambda v: self.apply(fn, v)

    def _stream(self, term: Term, env, site: Term) -> RStream:
        v = self.eval(term, env)
        if not isinstance(v, RStream):
            raise EvalError(
                f"sampler operation applied to non-stream value {v!r}", site.pos
            )
        return v


def eval_stream(term: Term, externs: Externs):
    """Evaluate a closed term; sampler-typed results come back as RStream."""
    return StreamEvaluator(externs).eval(term)


def truncate(value, n: int):
    """Replace every embedded stream by its length-n weighted list."""
    if isinstance(value, RStream):
        return WeightedList([(truncate(v, n), w) for v, w in value.prefix(n)])
    if isinstance(value, WeightedList):
        return WeightedList([(truncate(v, n), w) for v, w in value.entries])
    if isinstance(value, tuple):
        return tuple(truncate(v, n) for v in value)
    if isinstance(value, VInj):
        return VInj(value.index, truncate(value.value, n))
    return value

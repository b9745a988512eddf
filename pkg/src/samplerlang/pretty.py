"""Deterministic pretty-printer; parse(pretty(t)) is alpha-equal to t."""
from __future__ import annotations

from .terms import (
    App,
    Builtin,
    Case,
    Cast,
    Const,
    Fst,
    FunT,
    Ground,
    Hd,
    Inj,
    IntersectT,
    Lam,
    Let,
    Map,
    Pair,
    PredInv,
    Prng,
    Prod,
    ProdT,
    PullbackT,
    REAL,
    Reweight,
    SamplerT,
    Snd,
    SumT,
    Term,
    Thin,
    Tl,
    Type,
    Var,
    Wt,
    as_ite,
)

_CMP_TEXT = {"lt": "<", "le": "<=", "gt": ">", "ge": ">=", "eq": "=", "ne": "!="}

# precedence levels, mirroring the parser
_OPEN, _CMP, _OTIMES, _ADD, _MUL, _UNARY, _POSTFIX, _ATOM = 0, 4, 5, 6, 7, 8, 9, 10


def pretty_type(ty: Type) -> str:
    return _ty(ty, 0)


def _ty(ty: Type, level: int) -> str:
    # levels: 0 function, 1 sum, 2 product, 3 atom
    match ty:
        case Ground(name):
            return name
        case PredInv(cmp, bit):
            return f"{cmp}^-1({bit})"
        case FunT(dom, cod):
            s = f"{_ty(dom, 1)} -> {_ty(cod, 0)}"
            return f"({s})" if level > 0 else s
        case SumT(summands):
            s = " + ".join(_ty(x, 2) for x in summands)
            return f"({s})" if level > 1 else s
        case ProdT(left, right):
            s = f"{_ty(left, 3)} * {_ty(right, 2)}"
            return f"({s})" if level > 2 else s
        case SamplerT(payload):
            return f"S {_ty(payload, 3)}"
        case PullbackT(_, t, _, _, member):
            return f"({pretty(t)})^-1({_ty(member, 3)})"
        case IntersectT(left, right):
            s = f"{_ty(left, 3)} & {_ty(right, 3)}"
            return f"({s})" if level > 2 else s
    raise TypeError(f"unknown type {ty!r}")


def _const(v) -> str:
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, tuple) and v == ():
        return "unit"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def pretty(t: Term) -> str:
    return _pp(t, 0)


def _paren(s: str, need: bool) -> str:
    return f"({s})" if need else s


def _pp(t: Term, level: int) -> str:
    sugar = as_ite(t)
    if sugar is not None:
        cond, if_true, if_false = sugar
        s = f"if {_pp(cond, 1)} then {_pp(if_true, 1)} else {_pp(if_false, 0)}"
        return _paren(s, level > _OPEN)
    match t:
        case Var(name):
            return name
        case Const(value):
            return _const(value)
        case Lam(params, body):
            inner = ", ".join(
                f"{n} : {_ty(ty, 0) if ty is not None else '_'}" for n, ty in params
            )
            if len(params) == 1:
                s = f"fun {inner} => {_pp(body, 0)}"
            else:
                s = f"fun ({inner}) => {_pp(body, 0)}"
            return _paren(s, level > _OPEN)
        case Let(name, bound, body):
            s = f"let {name} = {_pp(bound, 1)} in {_pp(body, 0)}"
            return _paren(s, level > _OPEN)
        case Case(scrutinee, branches):
            inner = " | ".join(f"{b} => {_pp(body, 0)}" for b, body in branches)
            s = f"case {_pp(scrutinee, 1)} of {{ {inner} }}"
            return _paren(s, level > _OPEN)
        case Builtin(op, args):
            return _pp_builtin(op, args, level)
        case Prod(left, right):
            s = f"{_pp(left, _OTIMES + 1)} <*> {_pp(right, _OTIMES)}"
            return _paren(s, level > _OTIMES)
        case App(fn, arg):
            fn_s = _pp(fn, _POSTFIX)
            if isinstance(arg, Pair):
                return f"{fn_s}({_pp(arg.left, 1)}, {_pp(arg.right, 1)})"
            return f"{fn_s}({_pp(arg, 0)})"
        case Pair(left, right):
            return f"({_pp(left, 1)}, {_pp(right, 1)})"
        case Fst(body):
            return f"fst({_pp(body, 0)})"
        case Snd(body):
            return f"snd({_pp(body, 0)})"
        case Hd(body):
            return f"hd({_pp(body, 0)})"
        case Wt(body):
            return f"wt({_pp(body, 0)})"
        case Tl(body):
            return f"tl({_pp(body, 0)})"
        case Thin(count, sampler):
            return f"thin({count}, {_pp(sampler, 0)})"
        case Map(fn, sampler):
            return f"map({_pp(fn, 1)}, {_pp(sampler, 0)})"
        case Reweight(fn, sampler):
            return f"reweight({_pp(fn, 1)}, {_pp(sampler, 0)})"
        case Prng(step, seed):
            return f"prng({_pp(step, 1)}, {_pp(seed, 0)})"
        case Cast(ty, body):
            return f"cast<{_ty(ty, 0)}>({_pp(body, 0)})"
        case Inj(index, body):
            return f"inj({index}, {_pp(body, 0)})"
    raise TypeError(f"unknown term {t!r}")


def _pp_builtin(op: str, args: tuple[Term, ...], level: int) -> str:
    if op in _CMP_TEXT:
        (arg,) = args
        if isinstance(arg, Pair):
            s = f"{_pp(arg.left, _CMP + 1)} {_CMP_TEXT[op]} {_pp(arg.right, _CMP + 1)}"
            return _paren(s, level > _CMP)
        return f"{op}({_pp(arg, 0)})"
    if op == "pi":
        return "pi"
    if op in ("plus", "minus"):
        sym = "+" if op == "plus" else "-"
        s = f"{_pp(args[0], _ADD)} {sym} {_pp(args[1], _ADD + 1)}"
        return _paren(s, level > _ADD)
    if op in ("times", "div"):
        sym = "*" if op == "times" else "/"
        s = f"{_pp(args[0], _MUL)} {sym} {_pp(args[1], _MUL + 1)}"
        return _paren(s, level > _MUL)
    if op == "neg":
        s = f"-{_pp(args[0], _UNARY)}"
        return _paren(s, level > _UNARY)
    inner = ", ".join(_pp(a, 1) for a in args)
    return f"{op}({inner})"


def pretty_measure(m) -> str:
    from . import measures as M

    match m:
        case M.Dirac(point):
            return f"dirac({_point(point)})"
        case M.Bernoulli(p):
            return f"bernoulli({_num(p)})"
        case M.UniformM(a, b):
            return f"uniform({_num(a)}, {_num(b)})"
        case M.TriangularM(a, b):
            return f"triangular({_num(a)}, {_num(b)})"
        case M.GaussianM(mean, std):
            return f"gaussian({_num(mean)}, {_num(std)})"
        case M.GammaM(shape, scale):
            return f"gamma({_num(shape)}, {_num(scale)})"
        case M.FiniteDiscrete(atoms):
            inner = ", ".join(f"{_point(p)}: {_num(w)}" for p, w in atoms)
            return f"discrete{{{inner}}}"
        case M.ProductM(left, right):
            return f"{_m_tight(left)} * {pretty_measure(right)}"
        case M.PowerM(base, k):
            return f"{_m_tight(base)}^{k}"
        case M.PushforwardM(fn, base):
            return f"pushforward({pretty(fn)}, {pretty_measure(base)})"
        case M.ReweightM(fn, base):
            return f"reweight({pretty(fn)}, {pretty_measure(base)})"
    raise TypeError(f"unknown measure {m!r}")


def _m_tight(m) -> str:
    from . import measures as M

    s = pretty_measure(m)
    if isinstance(m, M.ProductM):
        return f"({s})"
    return s


def _num(x: float) -> str:
    if isinstance(x, float) and x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _point(p) -> str:
    if isinstance(p, bool):
        return "True" if p else "False"
    if isinstance(p, tuple):
        return f"({_point(p[0])}, {_point(p[1])})"
    return _num(float(p))

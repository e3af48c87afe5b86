"""
Polydifferential Operators in Normal Form

An arity-k operator is a finite sum of terms c(x) * d^{I_1} (x) ... (x) d^{I_k}
with one polynomial coefficient per derivative tuple, attached to slot 1.
Its action on functions is

    (f_1, ..., f_k) -> sum c * (d^{I_1} f_1) * ... * (d^{I_k} f_k)

so arity 2 realizes D (x)_R D as bidifferential operators and the tensor
relation over R becomes structural equality of normal forms.

Products:
- two normal forms multiply slot by slot with the coefficient of the right
  factor commuted through slot 1 by the Leibniz rule
- a RawTensor may carry multiplication operators in any slot (1 (x) f,
  1 (x) phi, X (x) 1 + 1 (x) X); slotwise_product composes raw
  representatives slot by slot and normalizes the result
"""

from __future__ import annotations

import itertools
import logging
from math import comb
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy.polys.rings import PolyElement, PolyRing

from .algebra_core import coordinate_names, derivative, monomials_up_to, to_rational
from ..utils.exceptions import StructureError

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]
Key = Tuple[MultiIndex, ...]


@lru_cache(maxsize=None)
def _splits(index: MultiIndex) -> Tuple[Tuple[MultiIndex, MultiIndex, int], ...]:
    """All J <= I as (J, I - J, binom(I, J))."""
    out = []
    for lower in itertools.product(*(range(i + 1) for i in index)):
        weight = 1
        for i, j in zip(index, lower):
            weight *= comb(i, j)
        out.append((lower, tuple(i - j for i, j in zip(index, lower)), weight))
    return tuple(out)


def _add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


class PolyDiffOp:
    """Arity-k polydifferential operator with polynomial coefficients."""

    __slots__ = ("ring", "arity", "terms")

    def __init__(self, ring: PolyRing, arity: int, terms: Optional[Dict[Key, Any]] = None):
        if arity < 1:
            raise StructureError("arity must be at least 1")
        self.ring = ring
        self.arity = arity
        clean: Dict[Key, PolyElement] = {}
        n = ring.ngens
        for key, coeff in (terms or {}).items():
            if len(key) != arity or any(len(index) != n for index in key):
                raise StructureError(f"term key {key} does not fit arity {arity} over {n} variables")
            if not isinstance(coeff, PolyElement):
                coeff = ring(to_rational(coeff))
            elif coeff.ring != ring:
                raise StructureError("coefficient lives in a different polynomial ring")
            if coeff:
                key = tuple(tuple(index) for index in key)
                total = clean.get(key)
                total = coeff if total is None else total + coeff
                if total:
                    clean[key] = total
                else:
                    clean.pop(key, None)
        self.terms = clean

    # --- constructors ---

    @classmethod
    def zero(cls, ring: PolyRing, arity: int = 1) -> "PolyDiffOp":
        return cls(ring, arity)

    @classmethod
    def identity(cls, ring: PolyRing, arity: int = 1) -> "PolyDiffOp":
        return cls(ring, arity, {(ring.zero_monom,) * arity: ring.one})

    @property
    def base_dim(self) -> int:
        return self.ring.ngens

    # --- linear structure ---

    def _check_compatible(self, other: "PolyDiffOp"):
        if not isinstance(other, PolyDiffOp):
            raise StructureError(f"expected a PolyDiffOp, got {type(other).__name__}")
        if self.ring != other.ring:
            raise StructureError(
                f"variable lists differ: {coordinate_names(self.ring)} vs {coordinate_names(other.ring)}")
        if self.arity != other.arity:
            raise StructureError(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other: "PolyDiffOp") -> "PolyDiffOp":
        self._check_compatible(other)
        merged = dict(self.terms)
        for key, c in other.terms.items():
            merged[key] = merged[key] + c if key in merged else c
        return PolyDiffOp(self.ring, self.arity, merged)

    def __neg__(self) -> "PolyDiffOp":
        return PolyDiffOp(self.ring, self.arity, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "PolyDiffOp") -> "PolyDiffOp":
        return self + (-other)

    def __mul__(self, factor: Any) -> "PolyDiffOp":
        """Scalar multiple; a PolyElement factor multiplies the coefficient."""
        if isinstance(factor, PolyElement):
            if factor.ring != self.ring:
                raise StructureError("coefficient lives in a different polynomial ring")
        else:
            factor = to_rational(factor)
        return PolyDiffOp(self.ring, self.arity, {k: c * factor for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        return self.ring == other.ring and self.arity == other.arity and self.terms == other.terms

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def size(self) -> int:
        return len(self.terms)

    def order(self) -> int:
        """Total derivative order, summed over slots; -1 for zero."""
        if not self.terms:
            return -1
        return max(sum(sum(index) for index in key) for key in self.terms)

    def __repr__(self) -> str:
        return f"PolyDiffOp(arity={self.arity}, {self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = coordinate_names(self.ring)
        parts = []
        for key in sorted(self.terms, reverse=True):
            coeff = self.terms[key]
            slots = " ⊗ ".join(_slot_string(index, names) for index in key)
            text = str(coeff)
            if len(coeff) > 1:
                text = f"({text})"
            parts.append(f"{text}*[{slots}]")
        return " + ".join(parts)


def _slot_string(index: MultiIndex, names: Sequence[str]) -> str:
    factors = []
    for name, k in zip(names, index):
        if k == 1:
            factors.append(f"d{name}")
        elif k > 1:
            factors.append(f"d{name}^{k}")
    return "*".join(factors) if factors else "1"


# =========================
# Constructors
# =========================


def multiplication_operator(c: Any, ring: Optional[PolyRing] = None) -> PolyDiffOp:
    """The operator g -> c*g (alpha = beta for D(P))."""
    if isinstance(c, PolyElement):
        ring = c.ring
    elif ring is None:
        raise StructureError("a ring is needed for a scalar multiplication operator")
    return PolyDiffOp(ring, 1, {(ring.zero_monom,): c})


def partial_operator(ring: PolyRing, index: Union[int, Sequence[int]]) -> PolyDiffOp:
    """d^I, or d_k when given a coordinate position."""
    if isinstance(index, int):
        if not 0 <= index < ring.ngens:
            raise StructureError(f"coordinate index {index} outside {coordinate_names(ring)}")
        index = tuple(1 if k == index else 0 for k in range(ring.ngens))
    return PolyDiffOp(ring, 1, {(tuple(index),): ring.one})


def vector_field(ring: PolyRing, coefficients: Sequence[Any]) -> PolyDiffOp:
    if len(coefficients) != ring.ngens:
        raise StructureError("one coefficient per coordinate is required")
    out = PolyDiffOp.zero(ring, 1)
    for k, c in enumerate(coefficients):
        out = out + partial_operator(ring, k) * (c if isinstance(c, PolyElement) else to_rational(c))
    return out


# =========================
# Action and composition
# =========================


def apply(op: PolyDiffOp, args: Sequence[PolyElement]) -> PolyElement:
    if len(args) != op.arity:
        raise StructureError(f"operator of arity {op.arity} applied to {len(args)} arguments")
    for f in args:
        if f.ring != op.ring:
            raise StructureError("argument lives in a different polynomial ring")
    total = op.ring.zero
    cache: Dict[Tuple[int, MultiIndex], PolyElement] = {}
    for key, coeff in op.terms.items():
        value = coeff
        for slot, index in enumerate(key):
            if (slot, index) not in cache:
                cache[(slot, index)] = derivative(args[slot], index)
            value = value * cache[(slot, index)]
            if not value:
                break
        total += value
    return total


def counit(op: PolyDiffOp) -> PolyElement:
    """Zero-order part of an arity-1 operator, i.e. its action on 1."""
    if op.arity != 1:
        raise StructureError("counit is defined on arity-1 operators")
    return op.terms.get((op.ring.zero_monom,), op.ring.zero)


def _canonical_product(a: PolyDiffOp, b: PolyDiffOp) -> PolyDiffOp:
    a._check_compatible(b)
    ring = a.ring
    out: Dict[Key, PolyElement] = {}
    for ka, ca in a.terms.items():
        first = ka[0]
        splits = _splits(first)
        for kb, cb in b.terms.items():
            tail = tuple(_add(x, y) for x, y in zip(ka[1:], kb[1:]))
            for lower, rest, weight in splits:
                d_cb = derivative(cb, lower)
                if not d_cb:
                    continue
                key = (_add(rest, kb[0]),) + tail
                value = ca * d_cb * weight
                out[key] = out[key] + value if key in out else value
    return PolyDiffOp(ring, a.arity, out)


def compose(d: PolyDiffOp, e: PolyDiffOp) -> PolyDiffOp:
    """Normal form of d o e via the Leibniz expansion."""
    if d.arity != 1 or e.arity != 1:
        raise StructureError("compose takes arity-1 operators")
    return _canonical_product(d, e)


# =========================
# Raw slot-decorated tensors
# =========================


class RawTensor:
    """Sum of slot tuples of arity-1 operators, coefficients allowed anywhere.

    This is the pre-image of normalize: each slot may still hold a
    left-composed multiplication operator that has not migrated to slot 1.
    """

    __slots__ = ("ring", "arity", "summands")

    def __init__(self, ring: PolyRing, arity: int, summands: Iterable[Tuple[PolyDiffOp, ...]] = ()):
        self.ring = ring
        self.arity = arity
        kept = []
        for summand in summands:
            summand = tuple(summand)
            if len(summand) != arity:
                raise StructureError(f"raw summand of length {len(summand)} in arity {arity}")
            for op in summand:
                if op.arity != 1 or op.ring != ring:
                    raise StructureError("raw slots must be arity-1 operators over the same ring")
            if any(op.is_zero() for op in summand):
                continue
            kept.append(summand)
        self.summands = tuple(kept)

    def __add__(self, other: "RawTensor") -> "RawTensor":
        other = as_raw(other)
        if other.arity != self.arity or other.ring != self.ring:
            raise StructureError("raw tensors of different shape")
        return RawTensor(self.ring, self.arity, self.summands + other.summands)

    def __neg__(self) -> "RawTensor":
        return RawTensor(self.ring, self.arity, ((-s[0],) + s[1:] for s in self.summands))

    def __sub__(self, other: "RawTensor") -> "RawTensor":
        return self + (-as_raw(other))

    def __mul__(self, factor: Any) -> "RawTensor":
        return RawTensor(self.ring, self.arity, ((s[0] * factor,) + s[1:] for s in self.summands))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return normalize(self).is_zero()

    def size(self) -> int:
        return normalize(self).size()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (RawTensor, PolyDiffOp)):
            return NotImplemented
        return normalize(self) == normalize(other)

    __hash__ = None

    def __str__(self) -> str:
        return str(normalize(self))


def tensor(*ops: PolyDiffOp) -> RawTensor:
    """The simple tensor ops[0] (x) ... (x) ops[-1], unnormalized."""
    if not ops:
        raise StructureError("tensor needs at least one factor")
    return RawTensor(ops[0].ring, len(ops), [tuple(ops)])


def normalize(raw: Union[RawTensor, PolyDiffOp]) -> PolyDiffOp:
    """Migrate every slot coefficient into slot 1; idempotent on normal forms."""
    if isinstance(raw, PolyDiffOp):
        return raw
    out: Dict[Key, PolyElement] = {}
    for summand in raw.summands:
        for choice in itertools.product(*(op.terms.items() for op in summand)):
            coeff = choice[0][1]
            for _, c in choice[1:]:
                coeff = coeff * c
            key = tuple(k[0] for k, _ in choice)
            out[key] = out[key] + coeff if key in out else coeff
    return PolyDiffOp(raw.ring, raw.arity, out)


def lift(op: PolyDiffOp) -> RawTensor:
    """Canonical raw representative: coefficient and d^{I_1} in slot 1."""
    ring = op.ring
    summands = []
    for key, coeff in op.terms.items():
        summands.append(tuple(PolyDiffOp(ring, 1, {(index,): (coeff if slot == 0 else ring.one)})
                              for slot, index in enumerate(key)))
    return RawTensor(ring, op.arity, summands)


def as_raw(value: Union[RawTensor, PolyDiffOp]) -> RawTensor:
    return lift(value) if isinstance(value, PolyDiffOp) else value


def slotwise_product(b: Union[PolyDiffOp, RawTensor], c: Union[PolyDiffOp, RawTensor]) -> PolyDiffOp:
    """Compose slot by slot on raw representatives, then renormalize.

    A left coproduct image acts by postcomposition and a right raw tensor
    acts by precomposition: (W . (P (x) Q))(u, v) = W(Pu, Qv).
    """
    if isinstance(b, PolyDiffOp) and isinstance(c, PolyDiffOp):
        return _canonical_product(b, c)
    left, right = as_raw(b), as_raw(c)
    if left.arity != right.arity or left.ring != right.ring:
        raise StructureError("slotwise product of tensors with different shape")
    composed = [tuple(compose(p, q) for p, q in zip(s, t))
                for s in left.summands for t in right.summands]
    return normalize(RawTensor(left.ring, left.arity, composed))


# =========================
# Coproduct, counit and slot moves
# =========================


def leibniz_coproduct(op: PolyDiffOp) -> PolyDiffOp:
    """Delta(D)(f, g) = D(fg); coefficients stay in slot 1."""
    if op.arity != 1:
        raise StructureError("the Leibniz coproduct takes an arity-1 operator")
    return coproduct_in_slot(op, 0)


def coproduct_in_slot(t: PolyDiffOp, slot: int) -> PolyDiffOp:
    """Apply the Leibniz coproduct to one slot, raising the arity by one."""
    if not 0 <= slot < t.arity:
        raise StructureError(f"slot {slot} outside arity {t.arity}")
    out: Dict[Key, PolyElement] = {}
    for key, coeff in t.terms.items():
        for lower, rest, weight in _splits(key[slot]):
            new_key = key[:slot] + (lower, rest) + key[slot + 1:]
            value = coeff * weight
            out[new_key] = out[new_key] + value if new_key in out else value
    return PolyDiffOp(t.ring, t.arity + 1, out)


def extend(t: PolyDiffOp, slots: int = 1) -> PolyDiffOp:
    """t (x) 1: already a normal form since the coefficient stays in slot 1."""
    pad = (t.ring.zero_monom,) * slots
    return PolyDiffOp(t.ring, t.arity + slots, {key + pad: c for key, c in t.terms.items()})


def embed_right(t: PolyDiffOp) -> RawTensor:
    """1 (x) t as a raw tensor; its coefficients sit in slot 2."""
    ring = t.ring
    identity = PolyDiffOp.identity(ring)
    return RawTensor(ring, t.arity + 1, [(identity,) + s for s in lift(t).summands])


def permute_slots(t: PolyDiffOp, order: Sequence[int]) -> PolyDiffOp:
    """Reorder slots: new slot i carries old slot order[i]."""
    if sorted(order) != list(range(t.arity)):
        raise StructureError(f"{order} is not a permutation of {t.arity} slots")
    return PolyDiffOp(t.ring, t.arity, {tuple(key[i] for i in order): c for key, c in t.terms.items()})


def flip(t: PolyDiffOp) -> PolyDiffOp:
    if t.arity != 2:
        raise StructureError("flip exchanges the two slots of a bidifferential operator")
    return permute_slots(t, (1, 0))


def contract(t: PolyDiffOp, f: PolyElement, slot: int) -> PolyDiffOp:
    """Feed f into one slot of a bidifferential operator, leaving an operator."""
    if t.arity != 2 or slot not in (0, 1):
        raise StructureError("contract feeds slot 0 or 1 of an arity-2 operator")
    other = 1 - slot
    out: Dict[Key, PolyElement] = {}
    for key, coeff in t.terms.items():
        value = coeff * derivative(f, key[slot])
        if not value:
            continue
        new_key = (key[other],)
        out[new_key] = out[new_key] + value if new_key in out else value
    return PolyDiffOp(t.ring, 1, out)


# =========================
# Action oracle
# =========================


def probe_tuples(ring: PolyRing, arity: int, degree: int) -> List[Tuple[PolyElement, ...]]:
    monomials = monomials_up_to(ring, degree)
    return list(itertools.product(monomials, repeat=arity))


def act_equal(a: Union[PolyDiffOp, RawTensor], b: Union[PolyDiffOp, RawTensor],
              degree: Optional[int] = None) -> bool:
    """Compare two operators by their action on all monomial tuples.

    Monomials of degree up to the operator order determine the operator, so
    this is a complete decision procedure independent of normal forms.
    """
    a, b = normalize(a), normalize(b)
    a._check_compatible(b)
    if degree is None:
        degree = max(a.order(), b.order(), 0)
    for args in probe_tuples(a.ring, a.arity, degree):
        if apply(a, args) != apply(b, args):
            return False
    return True

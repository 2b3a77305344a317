"""Iterated-logarithm scalars for constants far outside the float range.

A :class:`TowerScalar` stores ``sign``, ``level`` and ``mag`` with

    level 0:  |x| = mag
    level 1:  |x| = exp(mag)
    level 2:  |x| = exp(exp(mag))

Values are kept in canonical form: the lowest level that holds the value
without overflow.  Level 0 covers ``[tiny, 1e15]``; level 1 covers
``(1e15, exp(1e15)]`` and also numbers below the smallest normal float
(negative ``mag``); level 2 covers everything larger.  Arithmetic on
level >= 1 operands is carried out on logarithms, recursively, so the
relative precision of a level-1 value is about ``mag * 2**-52``.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Optional, Union

LEVEL0_MAX = 1e15
LEVEL1_MAX = 1e15
_LN_LEVEL0_MAX = math.log(LEVEL0_MAX)
_LN_LEVEL1_MAX = math.log(LEVEL1_MAX)
_LN_TINY = math.log(sys.float_info.min)
_LN_FLOAT_MAX = math.log(sys.float_info.max)
_EPS = sys.float_info.epsilon
# beyond this gap in log space the log1p correction of add() underflows
ADD_CUTOFF = 50.0


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


Number = Union[int, float, "TowerScalar"]


@total_ordering
@dataclass(frozen=True)
class TowerScalar:
    sign: int
    level: int
    mag: float
    # absolute error bound, only set on approximate zeros from cancellation
    err: Optional["TowerScalar"] = field(default=None, compare=False, repr=False)

    # -- construction -------------------------------------------------
    @classmethod
    def from_float(cls, x: float) -> "TowerScalar":
        x = float(x)
        if math.isnan(x):
            raise ValueError("cannot represent nan")
        if math.isinf(x):
            raise OverflowError("cannot represent an infinite float")
        if x == 0.0:
            return ZERO
        return _canon(1 if x > 0 else -1, 0, abs(x))

    @classmethod
    def from_log(cls, log_abs: Number, sign: int = 1) -> "TowerScalar":
        """Number with ``ln|x| = log_abs``."""
        if isinstance(log_abs, TowerScalar):
            x = exp(log_abs)
        else:
            x = _canon(1, 1, float(log_abs))
        return x if sign > 0 else -x

    @classmethod
    def from_json(cls, obj: dict) -> "TowerScalar":
        return normalize(int(obj["sign"]), int(obj["level"]), float(obj["mag"]))

    def to_json(self) -> dict:
        return {"sign": self.sign, "level": self.level, "mag": self.mag}

    # -- conversions --------------------------------------------------
    @property
    def approximate(self) -> bool:
        return self.err is not None

    def to_float(self) -> float:
        """Nearest float; +-inf on overflow, 0.0 on underflow."""
        if self.sign == 0:
            return 0.0
        if self.level == 0:
            return self.sign * self.mag
        if self.level == 1:
            if self.mag > _LN_FLOAT_MAX:
                return self.sign * math.inf
            return self.sign * math.exp(self.mag)
        return self.sign * math.inf

    def __float__(self) -> float:
        return self.to_float()

    def log(self) -> "TowerScalar":
        """Natural log of a positive value, as a signed TowerScalar."""
        if self.sign <= 0:
            raise DomainError("log of a non-positive value")
        if self.level == 0:
            return TowerScalar.from_float(math.log(self.mag))
        if self.level == 1:
            return TowerScalar.from_float(self.mag)
        return _canon(1, 1, self.mag)

    def ln_float(self) -> float:
        """ln|x| as a float, inf when it does not fit."""
        if self.sign == 0:
            return -math.inf
        if self.level == 0:
            return math.log(self.mag)
        if self.level == 1:
            return self.mag
        return math.exp(self.mag) if self.mag <= _LN_FLOAT_MAX else math.inf

    def exp(self) -> "TowerScalar":
        return exp(self)

    def __abs__(self) -> "TowerScalar":
        return self if self.sign >= 0 else TowerScalar(1, self.level, self.mag, self.err)

    def __neg__(self) -> "TowerScalar":
        return TowerScalar(-self.sign, self.level, self.mag, self.err)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other: Number) -> "TowerScalar":
        return add(self, as_tower(other))

    __radd__ = __add__

    def __sub__(self, other: Number) -> "TowerScalar":
        return add(self, -as_tower(other))

    def __rsub__(self, other: Number) -> "TowerScalar":
        return add(as_tower(other), -self)

    def __mul__(self, other: Number) -> "TowerScalar":
        return mul(self, as_tower(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "TowerScalar":
        return mul(self, reciprocal(as_tower(other)))

    def __rtruediv__(self, other: Number) -> "TowerScalar":
        return mul(as_tower(other), reciprocal(self))

    def __pow__(self, other: Number) -> "TowerScalar":
        return power(self, as_tower(other))

    def __rpow__(self, other: Number) -> "TowerScalar":
        return power(as_tower(other), self)

    # -- ordering -----------------------------------------------------
    def __lt__(self, other: Number) -> bool:
        return compare(self, as_tower(other)) < 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float)):
            other = as_tower(other)
        if not isinstance(other, TowerScalar):
            return NotImplemented
        return (self.sign, self.level, self.mag) == (other.sign, other.level, other.mag)

    def __hash__(self) -> int:
        return hash((self.sign, self.level, self.mag))

    def __repr__(self) -> str:
        s = {1: "+", -1: "-", 0: "0"}[self.sign]
        tail = ", approx" if self.approximate else ""
        return f"TowerScalar({s}, {self.level}, {self.mag!r}{tail})"


ZERO = TowerScalar(0, 0, 0.0)
ONE = TowerScalar(1, 0, 1.0)


def as_tower(x: Number) -> TowerScalar:
    if isinstance(x, TowerScalar):
        return x
    return TowerScalar.from_float(x)


def _canon(sign: int, level: int, mag: float) -> TowerScalar:
    """Canonical form; accepts level 3 internally and demotes it if possible."""
    if math.isnan(mag):
        raise ValueError("mag is nan")
    if math.isinf(mag):
        raise OverflowError("mag is infinite")
    if sign == 0:
        return ZERO
    while True:
        if level == 0:
            if mag < 0:
                raise ValueError("level-0 mag stores |x| and must be >= 0")
            if mag == 0.0:
                return ZERO
            if mag > LEVEL0_MAX:
                level, mag = 1, math.log(mag)
                continue
            return TowerScalar(sign, 0, mag)
        if level == 1:
            if mag > LEVEL1_MAX:
                level, mag = 2, math.log(mag)
                continue
            if _LN_TINY <= mag <= _LN_LEVEL0_MAX:
                level, mag = 0, math.exp(mag)
                continue
            return TowerScalar(sign, 1, mag)
        if level == 2:
            if mag <= _LN_LEVEL1_MAX:
                level, mag = 1, math.exp(mag)
                continue
            return TowerScalar(sign, 2, mag)
        if level == 3:
            if mag > _LN_FLOAT_MAX:
                raise OverflowError("value needs more than three tower levels")
            level, mag = 2, math.exp(mag)
            continue
        raise ValueError(f"unsupported level {level}")


def normalize(sign: int, level: int, mag: float) -> TowerScalar:
    """Canonical TowerScalar for ``sign * E^level(mag)`` with ``E = exp``."""
    if sign not in (-1, 0, 1):
        raise ValueError("sign must be -1, 0 or +1")
    if level not in (0, 1, 2):
        raise ValueError("level must be 0, 1 or 2")
    return _canon(sign, level, float(mag))


def exp(y: Number) -> TowerScalar:
    """e**y for a signed TowerScalar ``y``."""
    y = as_tower(y)
    if y.sign == 0:
        return ONE
    if y.level == 0:
        return _canon(1, 1, y.sign * y.mag)
    if y.sign > 0:
        return _canon(1, y.level + 1, y.mag)
    # e**(-huge): level 1 with a negative log if the log fits in a float
    neg_log = -y.to_float()
    if math.isfinite(neg_log):
        return _canon(1, 1, -neg_log)
    return TowerScalar(0, 0, 0.0, err=TowerScalar(1, 1, -sys.float_info.max))


def log(x: Number) -> TowerScalar:
    return as_tower(x).log()


def _resolution(L: TowerScalar) -> float:
    """Absolute uncertainty of a stored logarithm ``L`` (inf if huge)."""
    v = abs(L.to_float())
    return 4.0 * _EPS * max(v, 1.0)


def compare(a: TowerScalar, b: TowerScalar) -> int:
    """-1, 0 or +1 following the real-number order."""
    if a.sign != b.sign:
        return -1 if a.sign < b.sign else 1
    if a.sign == 0:
        return 0
    if a.level == 0 and b.level == 0:
        c = (a.mag > b.mag) - (a.mag < b.mag)
    elif a.level == b.level:
        c = (a.mag > b.mag) - (a.mag < b.mag)
    else:
        c = compare(abs(a).log(), abs(b).log())
    return c if a.sign > 0 else -c


def add(a: TowerScalar, b: TowerScalar) -> TowerScalar:
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    if a.level == 0 and b.level == 0:
        s = a.sign * a.mag + b.sign * b.mag
        if math.isfinite(s):
            return TowerScalar.from_float(s)
    if a.sign == -b.sign and a.level == b.level and a.mag == b.mag:
        return ZERO
    # |a| >= |b| after the swap
    if compare(abs(a), abs(b)) < 0:
        a, b = b, a
    La, Lb = abs(a).log(), abs(b).log()
    delta = Lb - La
    if delta.sign == 0:
        d = 0.0
    elif delta.level > 0 or delta.mag > ADD_CUTOFF:
        return a
    else:
        d = delta.sign * delta.mag
        if d < -ADD_CUTOFF:
            return a
    if a.sign == b.sign:
        return _signed(a.sign, exp(La + math.log1p(math.exp(d))))
    gap = -math.expm1(d)
    res = max(_resolution(La), _resolution(Lb))
    if gap <= res:
        bound = abs(a) * min(res, 1.0) if math.isfinite(res) else abs(a)
        return TowerScalar(0, 0, 0.0, err=bound)
    return _signed(a.sign, exp(La + math.log(gap)))


def _signed(sign: int, x: TowerScalar) -> TowerScalar:
    return x if sign > 0 else -x


def mul(a: TowerScalar, b: TowerScalar) -> TowerScalar:
    if a.sign == 0 or b.sign == 0:
        return ZERO
    sign = a.sign * b.sign
    if a.level == 0 and b.level == 0:
        p = a.mag * b.mag
        if math.isfinite(p) and p >= sys.float_info.min:
            return _canon(sign, 0, p)
    return _signed(sign, exp(abs(a).log() + abs(b).log()))


def reciprocal(a: TowerScalar) -> TowerScalar:
    if a.sign == 0:
        raise ZeroDivisionError("reciprocal of zero")
    if a.level == 0:
        r = 1.0 / a.mag
        if math.isfinite(r) and r >= sys.float_info.min:
            return _canon(a.sign, 0, r)
    return _signed(a.sign, exp(-abs(a).log()))


def power(a: TowerScalar, b: TowerScalar) -> TowerScalar:
    if b.sign == 0:
        return ONE
    if a.sign == 0:
        if b.sign > 0:
            return ZERO
        raise ZeroDivisionError("zero to a negative power")
    sign = 1
    if a.sign < 0:
        if b.level != 0 or b.mag != math.floor(b.mag):
            raise DomainError("negative base needs an integer exponent")
        sign = -1 if int(b.mag) % 2 else 1
    if a.level == 0 and b.level == 0:
        try:
            p = abs(a).mag ** (b.sign * b.mag)
        except OverflowError:
            p = math.inf
        if math.isfinite(p) and p >= sys.float_info.min:
            return _canon(sign, 0, p)
    return _signed(sign, exp(b * abs(a).log()))


def combine(op: str, a: TowerScalar, b: TowerScalar) -> TowerScalar:
    """Dispatch ``op`` in {"add", "mul", "pow"}."""
    ops = {"add": add, "mul": mul, "pow": power}
    if op not in ops:
        raise ValueError(f"unknown op {op!r}")
    return ops[op](as_tower(a), as_tower(b))


def tmax(*xs: Number) -> TowerScalar:
    xs = [as_tower(x) for x in xs]
    out = xs[0]
    for x in xs[1:]:
        if compare(x, out) > 0:
            out = x
    return out


def tmin(*xs: Number) -> TowerScalar:
    xs = [as_tower(x) for x in xs]
    out = xs[0]
    for x in xs[1:]:
        if compare(x, out) < 0:
            out = x
    return out

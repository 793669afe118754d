"""Two-precision arithmetic substrate.

The narrow format is the input/output type (binary32 or binary64); the wide
format is the working type (binary64, or a double-double pair).  Wide scalars
are :class:`Wide` values carrying their precision mode so that arithmetic
rounds to the right format.  Wide arrays are stored as ``(2, n)`` float64
arrays, row 0 the leading part and row 1 the trailing part (always zero in
single/double mode).
"""
from __future__ import annotations

import enum
import math

import numpy as np
from numba import njit


# ---------------------------------------------------------------------------
# error-free transforms and pair arithmetic (numba, inlined into kernels)
# ---------------------------------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1


@njit(inline="always", cache=True)
def two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


@njit(inline="always", cache=True)
def quick_two_sum(a, b):
    s = a + b
    e = b - (s - a)
    return s, e


@njit(inline="always", cache=True)
def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@njit(inline="always", cache=True)
def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


@njit(inline="always", cache=True)
def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e += t
    s, e = quick_two_sum(s, e)
    e += f
    return quick_two_sum(s, e)


@njit(inline="always", cache=True)
def dd_sub(ah, al, bh, bl):
    return dd_add(ah, al, -bh, -bl)


@njit(inline="always", cache=True)
def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e += ah * bl + al * bh
    return quick_two_sum(p, e)


@njit(inline="always", cache=True)
def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e += al * b
    return quick_two_sum(p, e)


@njit(inline="always", cache=True)
def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = dd_mul_d(bh, bl, q1)
    rh, rl = dd_sub(ah, al, ph, pl)
    q2 = rh / bh
    return quick_two_sum(q1, q2)


@njit(inline="always", cache=True)
def dd_sqrt(ah, al):
    if ah <= 0.0:
        return 0.0, 0.0
    x = math.sqrt(ah)
    ph, pl = two_prod(x, x)
    rh, rl = dd_sub(ah, al, ph, pl)
    return quick_two_sum(x, rh / (2.0 * x))


@njit(inline="always", cache=True)
def dd_lt(ah, al, bh, bl):
    return ah < bh or (ah == bh and al < bl)


@njit(inline="always", cache=True)
def dd_abs(ah, al):
    if ah < 0.0 or (ah == 0.0 and al < 0.0):
        return -ah, -al
    return ah, al


# ---------------------------------------------------------------------------
# precision modes
# ---------------------------------------------------------------------------


class PrecisionMode(enum.Enum):
    SINGLE_DOUBLE = "single-double"
    DOUBLE_QUAD = "double-quad"

    @property
    def eps_narrow(self) -> float:
        return 2.0**-24 if self is PrecisionMode.SINGLE_DOUBLE else 2.0**-53

    @property
    def eps_wide(self) -> float:
        return 2.0**-53 if self is PrecisionMode.SINGLE_DOUBLE else 2.0**-104

    @property
    def narrow_dtype(self):
        return np.float32 if self is PrecisionMode.SINGLE_DOUBLE else np.float64

    @property
    def is_pair(self) -> bool:
        return self is PrecisionMode.DOUBLE_QUAD

    @classmethod
    def parse(cls, text: str) -> "PrecisionMode":
        key = text.strip().lower().replace("_", "-").replace("/", "-")
        for mode in cls:
            if mode.value == key:
                return mode
        raise ValueError(f"unknown precision mode {text!r}")


SINGLE_DOUBLE = PrecisionMode.SINGLE_DOUBLE
DOUBLE_QUAD = PrecisionMode.DOUBLE_QUAD

# Table 1 unit roundoffs
EPS_S = 2.0**-24
EPS_D = 2.0**-53
EPS_E = 2.0**-64
EPS_Q = 2.0**-113


class Wide:
    """A working-precision scalar.

    In single/double mode only ``hi`` is used and arithmetic is plain binary64.
    In double/quad mode ``hi + lo`` is a normalized double-double.
    """

    __slots__ = ("hi", "lo", "mode")

    def __init__(self, hi: float, lo: float = 0.0, mode: PrecisionMode = DOUBLE_QUAD):
        self.hi = float(hi)
        self.lo = float(lo) if mode.is_pair else 0.0
        self.mode = mode

    # construction helpers
    def _new(self, pair):
        return Wide(pair[0], pair[1], self.mode)

    def _coerce(self, other) -> "Wide":
        if isinstance(other, Wide):
            return other
        return Wide(float(other), 0.0, self.mode)

    def __add__(self, other):
        o = self._coerce(other)
        if self.mode.is_pair:
            return self._new(dd_add(self.hi, self.lo, o.hi, o.lo))
        return Wide(self.hi + o.hi, 0.0, self.mode)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if self.mode.is_pair:
            return self._new(dd_sub(self.hi, self.lo, o.hi, o.lo))
        return Wide(self.hi - o.hi, 0.0, self.mode)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if self.mode.is_pair:
            return self._new(dd_mul(self.hi, self.lo, o.hi, o.lo))
        return Wide(self.hi * o.hi, 0.0, self.mode)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.hi == 0.0:
            raise ZeroDivisionError("wide division by zero")
        if self.mode.is_pair:
            return self._new(dd_div(self.hi, self.lo, o.hi, o.lo))
        return Wide(self.hi / o.hi, 0.0, self.mode)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __neg__(self):
        return Wide(-self.hi, -self.lo, self.mode)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def sqrt(self) -> "Wide":
        if self.sign() < 0:
            raise ValueError("square root of a negative wide value")
        if self.mode.is_pair:
            return self._new(dd_sqrt(self.hi, self.lo))
        return Wide(math.sqrt(self.hi), 0.0, self.mode)

    def sign(self) -> int:
        if self.hi > 0.0 or (self.hi == 0.0 and self.lo > 0.0):
            return 1
        if self.hi < 0.0 or (self.hi == 0.0 and self.lo < 0.0):
            return -1
        return 0

    def _key(self, other):
        o = self._coerce(other)
        return (self.hi, self.lo), (o.hi, o.lo)

    def __lt__(self, other):
        a, b = self._key(other)
        return a < b

    def __le__(self, other):
        a, b = self._key(other)
        return a <= b

    def __gt__(self, other):
        a, b = self._key(other)
        return a > b

    def __ge__(self, other):
        a, b = self._key(other)
        return a >= b

    def __eq__(self, other):
        if not isinstance(other, (Wide, int, float, np.floating)):
            return NotImplemented
        a, b = self._key(other)
        return a == b

    def __hash__(self):
        return hash((self.hi, self.lo))

    def __float__(self):
        return self.hi + self.lo

    def __repr__(self):
        if self.mode.is_pair:
            return f"Wide({self.hi!r}, {self.lo!r})"
        return f"Wide({self.hi!r}, mode={self.mode.value})"

    def as_fraction(self):
        from fractions import Fraction

        return Fraction(self.hi) + Fraction(self.lo)


def widen(x, mode: PrecisionMode) -> Wide:
    """Exact embedding of a narrow value into the wide format."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("widen expects a finite value")
    return Wide(x, 0.0, mode)


def narrow(x: Wide, mode: PrecisionMode | None = None):
    """Round a wide value to the nearest narrow value (ties to even)."""
    mode = mode or x.mode
    v = x.hi + x.lo  # hi is already the rounded sum of a normalized pair
    if mode is SINGLE_DOUBLE:
        if abs(v) > float(np.finfo(np.float32).max):
            raise OverflowError("value exceeds the binary32 range")
        return np.float32(v)
    if not math.isfinite(v):
        raise OverflowError("value exceeds the binary64 range")
    return np.float64(v)


def wide_arith(a: Wide, b: Wide | None, op: str) -> Wide:
    """Apply ``op`` in wide arithmetic; ``b`` is ignored for ``sqrt``."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    if op == "sqrt":
        return a.sqrt()
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# wide arrays
# ---------------------------------------------------------------------------


def widen_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros((2, x.shape[0]))
    out[0] = x
    return out


def narrow_array(w: np.ndarray, mode: PrecisionMode) -> np.ndarray:
    if mode is SINGLE_DOUBLE:
        # lo rows are zero in single/double mode
        return (w[0] + w[1]).astype(np.float32)
    return (w[0] + w[1]).astype(np.float64)


def wide_at(w: np.ndarray, i: int, mode: PrecisionMode) -> Wide:
    return Wide(w[0, i], w[1, i], mode)

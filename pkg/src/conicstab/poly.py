"""Sparse multivariate polynomials over C and matrix-variable indexing.

A :class:`MultiPoly` maps exponent tuples to complex coefficients over a
fixed, named variable tuple.  The module provides the exact operations the
stability pipeline needs — line restriction ``t -> f(x + t y)``, partial
substitution, directional derivatives and Wronskians, splitting into real
and imaginary coefficient parts — plus a small expression parser and a
JSON wire format.

:class:`MatrixVarIndex` fixes the flat ordering of the upper triangle of a
symmetric matrix variable (row-major: z11, z12, ..., z1n, z22, ...), which
is shared by the semidefinite cone descriptor and the determinantal
constructions.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

from .tolerances import DEFAULT_TOL, ToleranceProfile
from .unistab import UniPoly

__all__ = [
    "MultiPoly",
    "MatrixVarIndex",
    "ParseError",
    "parse",
    "wronskian_v",
    "diag_substitution",
]


class ParseError(ValueError):
    """Raised on malformed polynomial expressions; carries the offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


def _natural_key(name: str):
    parts = re.split(r"(\d+)", name)
    return tuple(int(p) if p.isdigit() else p for p in parts)


class MultiPoly:
    """Polynomial in C[z_1, ..., z_n] as {exponent tuple: coefficient}.

    Construction canonicalizes: coefficients with ``|c| <=
    tol.coeff_zero_tol`` are dropped, so the zero polynomial has an empty
    term map and ``bool(p)`` is its nonzeroness test.  All binary
    operations require identical variable tuples — aligning different
    variable universes is the caller's job, not a silent guess.
    """

    __slots__ = ("var_names", "terms")

    def __init__(self, var_names, terms, tol: ToleranceProfile = DEFAULT_TOL):
        names = tuple(str(v) for v in var_names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names: {names}")
        clean: dict[tuple[int, ...], complex] = {}
        n = len(names)
        for exp, coeff in terms.items():
            e = tuple(int(k) for k in exp)
            if len(e) != n or any(k < 0 for k in e):
                raise ValueError(f"bad exponent tuple {e} for {n} variables")
            c = clean.get(e, 0j) + complex(coeff)
            clean[e] = c
        self.var_names = names
        self.terms = {e: c for e, c in clean.items() if abs(c) > tol.coeff_zero_tol}

    # -- queries ---------------------------------------------------------

    @property
    def nvars(self) -> int:
        return len(self.var_names)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiPoly)
            and self.var_names == other.var_names
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        if not self.terms:
            return "MultiPoly(0)"
        bits = []
        for e in sorted(self.terms, key=lambda t: (sum(t), t)):
            c = self.terms[e]
            mon = "*".join(
                f"{v}^{k}" if k > 1 else v
                for v, k in zip(self.var_names, e)
                if k > 0
            )
            bits.append(f"({c:g})" + (f"*{mon}" if mon else ""))
        return "MultiPoly(" + " + ".join(bits) + ")"

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, k: int) -> int:
        """Degree in variable ``k``; -1 for the zero polynomial."""
        return max((e[k] for e in self.terms), default=-1)

    def is_real(self, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
        return all(abs(c.imag) <= tol.coeff_zero_tol for c in self.terms.values())

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def coefficient(self, exp) -> complex:
        return self.terms.get(tuple(exp), 0j)

    def coeff_norm1(self) -> float:
        return float(sum(abs(c) for c in self.terms.values()))

    def max_coeff_diff(self, other: "MultiPoly") -> float:
        """Largest coefficientwise deviation between two polynomials."""
        if self.var_names != other.var_names:
            raise ValueError("variable mismatch")
        keys = set(self.terms) | set(other.terms)
        return max(
            (abs(self.terms.get(e, 0j) - other.terms.get(e, 0j)) for e in keys),
            default=0.0,
        )

    # -- ring operations ---------------------------------------------------

    def _check_vars(self, other: "MultiPoly") -> None:
        if self.var_names != other.var_names:
            raise ValueError(
                f"variable mismatch: {self.var_names} vs {other.var_names}"
            )

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check_vars(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0j) + c
        return MultiPoly(self.var_names, out)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + other.scale(-1.0)

    def __neg__(self) -> "MultiPoly":
        return self.scale(-1.0)

    def scale(self, factor: complex) -> "MultiPoly":
        return MultiPoly(
            self.var_names, {e: factor * c for e, c in self.terms.items()}
        )

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        self._check_vars(other)
        out: dict[tuple[int, ...], complex] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0j) + c1 * c2
        return MultiPoly(self.var_names, out)

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.constant(self.var_names, 1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    @staticmethod
    def constant(var_names, value: complex) -> "MultiPoly":
        return MultiPoly(var_names, {tuple([0] * len(tuple(var_names))): value})

    @staticmethod
    def variable(var_names, k: int) -> "MultiPoly":
        names = tuple(var_names)
        e = [0] * len(names)
        e[k] = 1
        return MultiPoly(names, {tuple(e): 1.0})

    @staticmethod
    def zero(var_names) -> "MultiPoly":
        return MultiPoly(var_names, {})

    # -- evaluation and specialization --------------------------------------

    def __call__(self, point):
        """Evaluate at a point (length-n sequence) or batch (shape (B, n)).

        Horner over the fixed variable order: terms are grouped by the
        exponent of the first variable, each group evaluated recursively,
        and the groups combined with ascending-gap powers.
        """
        pt = np.asarray(point, dtype=complex)
        batch = pt.ndim == 2
        if (batch and pt.shape[1] != self.nvars) or (
            not batch and pt.shape != (self.nvars,)
        ):
            raise ValueError(f"point shape {pt.shape} does not fit {self.nvars} variables")
        if not self.terms:
            return np.zeros(pt.shape[0], dtype=complex) if batch else 0j
        items = list(self.terms.items())
        val = _horner_rec(items, 0, self.nvars, pt.T if batch else pt)
        if batch:
            return np.broadcast_to(val, (pt.shape[0],)).astype(complex)
        return complex(val)

    def restrict_line(self, x, y, tol: ToleranceProfile = DEFAULT_TOL) -> UniPoly:
        """The univariate restriction ``t -> f(x + t y)``, expanded exactly.

        ``x`` and ``y`` are real vectors; each monomial contributes the
        convolution of its factors ``(x_k + t y_k)^{a_k}``.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != (self.nvars,) or y.shape != (self.nvars,):
            raise ValueError("offset/direction length must match the variable count")
        acc = np.zeros(max(self.degree, 0) + 1, dtype=complex)
        for e, c in self.terms.items():
            factor = np.array([c], dtype=complex)
            for k, a in enumerate(e):
                if a == 0:
                    continue
                lin = np.array([x[k], y[k]], dtype=complex)
                for _ in range(a):
                    factor = np.convolve(factor, lin)
            acc[: len(factor)] += factor
        return UniPoly(acc, tol=tol)

    def substitute_partial(self, assignments: dict[int, complex]) -> "MultiPoly":
        """Fix some variables to complex values; returns a polynomial in the rest.

        ``assignments`` maps variable indices to values.  The remaining
        variables keep their names and relative order.
        """
        for k in assignments:
            if not 0 <= k < self.nvars:
                raise ValueError(f"variable index {k} out of range")
        keep = [k for k in range(self.nvars) if k not in assignments]
        names = tuple(self.var_names[k] for k in keep)
        out: dict[tuple[int, ...], complex] = {}
        for e, c in self.terms.items():
            val = complex(c)
            for k, v in assignments.items():
                if e[k]:
                    val *= complex(v) ** e[k]
            key = tuple(e[k] for k in keep)
            out[key] = out.get(key, 0j) + val
        return MultiPoly(names, out)

    def as_univariate_in(self, k: int) -> list["MultiPoly"]:
        """Coefficients of ``z_k^j`` as polynomials in the other variables.

        Returns ``[c_0, ..., c_d]`` with ``f = sum_j c_j * z_k^j``; the
        list always has ``degree_in(k) + 1`` entries (at least one).
        """
        if not 0 <= k < self.nvars:
            raise ValueError(f"variable index {k} out of range")
        keep = [j for j in range(self.nvars) if j != k]
        names = tuple(self.var_names[j] for j in keep)
        d = max(self.degree_in(k), 0)
        buckets: list[dict] = [{} for _ in range(d + 1)]
        for e, c in self.terms.items():
            key = tuple(e[j] for j in keep)
            b = buckets[e[k]]
            b[key] = b.get(key, 0j) + c
        return [MultiPoly(names, b) for b in buckets]

    def real_imag_parts(self) -> tuple["MultiPoly", "MultiPoly"]:
        """Split into real polynomials ``(g, f)`` with ``self = g + i f``."""
        g = {e: complex(c.real) for e, c in self.terms.items()}
        f = {e: complex(c.imag) for e, c in self.terms.items()}
        return MultiPoly(self.var_names, g), MultiPoly(self.var_names, f)

    def directional_derivative(self, v) -> "MultiPoly":
        """Derivative along the real direction ``v``: sum_k v_k d/dz_k."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.nvars,):
            raise ValueError("direction length must match the variable count")
        out: dict[tuple[int, ...], complex] = {}
        for e, c in self.terms.items():
            for k, a in enumerate(e):
                if a == 0 or v[k] == 0.0:
                    continue
                key = tuple(x - 1 if j == k else x for j, x in enumerate(e))
                out[key] = out.get(key, 0j) + c * a * v[k]
        return MultiPoly(self.var_names, out)

    # -- serialization -------------------------------------------------------

    def to_json(self) -> str:
        entries = [
            {"exp": list(e), "re": self.terms[e].real, "im": self.terms[e].imag}
            for e in sorted(self.terms, key=lambda t: (sum(t), t))
        ]
        return json.dumps({"vars": list(self.var_names), "terms": entries})

    @staticmethod
    def from_json(text: str) -> "MultiPoly":
        data = json.loads(text)
        terms = {
            tuple(entry["exp"]): complex(entry.get("re", 0.0), entry.get("im", 0.0))
            for entry in data["terms"]
        }
        return MultiPoly(tuple(data["vars"]), terms)


def _horner_rec(items, k, nvars, pt):
    """Recursive grouped Horner; ``pt`` is (n,) or (n, B)."""
    if k == nvars:
        return sum(c for _, c in items)
    groups: dict[int, list] = {}
    for e, c in items:
        groups.setdefault(e[k], []).append((e, c))
    exps = sorted(groups, reverse=True)
    x = pt[k]
    val = _horner_rec(groups[exps[0]], k + 1, nvars, pt)
    prev = exps[0]
    for e in exps[1:]:
        val = val * x ** (prev - e) + _horner_rec(groups[e], k + 1, nvars, pt)
        prev = e
    if prev:
        val = val * x**prev
    return val


# ---------------------------------------------------------------------------
# Module-level polynomial operators
# ---------------------------------------------------------------------------


def wronskian_v(f: MultiPoly, g: MultiPoly, v) -> MultiPoly:
    """Directional Wronskian ``(d_v f) g - f (d_v g)`` for real f, g."""
    if not f.is_real() or not g.is_real():
        raise ValueError("directional Wronskian expects real polynomials")
    return f.directional_derivative(v) * g - f * g.directional_derivative(v)


def diag_substitution(f: MultiPoly, index: "MatrixVarIndex") -> MultiPoly:
    """Send variable ``z_k`` to the diagonal matrix entry ``z_kk``.

    Lifts an n-variable polynomial to the ``n(n+1)/2`` upper-triangle
    variables of ``index``; off-diagonal variables simply never occur.
    """
    if f.nvars != index.n:
        raise ValueError(f"expected {index.n} variables, got {f.nvars}")
    m = index.dim
    out: dict[tuple[int, ...], complex] = {}
    for e, c in f.terms.items():
        lifted = [0] * m
        for k, a in enumerate(e):
            lifted[index.flat(k, k)] = a
        key = tuple(lifted)
        out[key] = out.get(key, 0j) + c
    return MultiPoly(index.names, out)


# ---------------------------------------------------------------------------
# Matrix-variable indexing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatrixVarIndex:
    """Row-major upper-triangle indexing for a symmetric matrix variable.

    For ``n = 3`` the flat order is z11, z12, z13, z22, z23, z33.  ``flat``
    accepts either triangle of an (i, j) pair; ``names`` are the canonical
    variable names used by parsers and cones alike.
    """

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("matrix dimension must be positive")

    @property
    def dim(self) -> int:
        return self.n * (self.n + 1) // 2

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, j) for i in range(self.n) for j in range(i, self.n))

    @property
    def names(self) -> tuple[str, ...]:
        sep = "" if self.n <= 9 else "_"
        return tuple(f"z{i + 1}{sep}{j + 1}" for i, j in self.pairs)

    def flat(self, i: int, j: int) -> int:
        """Flat position of entry (i, j); the lower triangle maps to the upper."""
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise ValueError(f"index ({i}, {j}) out of range for n={self.n}")
        if i > j:
            i, j = j, i
        return i * self.n - i * (i - 1) // 2 + (j - i)

    def mat_from_flat(self, vec) -> np.ndarray:
        """Symmetric matrix whose upper triangle is ``vec`` (unscaled)."""
        v = np.asarray(vec)
        if not np.issubdtype(v.dtype, np.complexfloating):
            v = v.astype(float)
        if v.shape != (self.dim,):
            raise ValueError(f"expected a flat vector of length {self.dim}")
        m = np.zeros((self.n, self.n), dtype=v.dtype)
        for pos, (i, j) in enumerate(self.pairs):
            m[i, j] = v[pos]
            m[j, i] = v[pos]
        return m

    def flat_from_mat(self, m) -> np.ndarray:
        a = np.asarray(m, dtype=float)
        if a.shape != (self.n, self.n):
            raise ValueError(f"expected an {self.n}x{self.n} matrix")
        return np.array([a[i, j] for i, j in self.pairs])


# ---------------------------------------------------------------------------
# Expression parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?i?|i(?![A-Za-z0-9_]))"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos
            while bad < len(text) and text[bad].isspace():
                bad += 1
            if bad == len(text):
                break
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        if m.lastgroup == "number":
            lexeme = m.group(0).strip()
            if lexeme == "i":
                tokens.append(("number", 1j, m.start()))
            elif lexeme.endswith("i"):
                tokens.append(("number", 1j * float(lexeme[:-1]), m.start()))
            else:
                tokens.append(("number", complex(float(lexeme)), m.start()))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start()))
        else:
            tokens.append(("op", m.group("op"), m.start()))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens, var_names):
        self.tokens = tokens
        self.k = 0
        self.var_names = var_names
        self.var_index = {v: i for i, v in enumerate(var_names)}

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)
        self.advance()

    def parse_expr(self) -> MultiPoly:
        node = self.parse_term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                rhs = self.parse_term()
                node = node + rhs if val == "+" else node - rhs
            else:
                return node

    def parse_term(self) -> MultiPoly:
        node = self.parse_factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.advance()
                node = node * self.parse_factor()
            else:
                return node

    def parse_factor(self) -> MultiPoly:
        sign = 1.0
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                if val == "-":
                    sign = -sign
            else:
                break
        node = self.parse_atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            kind, val, pos = self.peek()
            if kind != "number" or val.imag != 0 or val.real != int(val.real) or val.real < 0:
                raise ParseError("exponent must be a nonnegative integer", pos)
            self.advance()
            node = node ** int(val.real)
            kind, val, pos = self.peek()
            if kind == "op" and val == "^":
                raise ParseError("chained ^ needs parentheses", pos)
        return node.scale(sign) if sign < 0 else node

    def parse_atom(self) -> MultiPoly:
        kind, val, pos = self.advance()
        if kind == "number":
            return MultiPoly.constant(self.var_names, val)
        if kind == "ident":
            if val not in self.var_index:
                raise ParseError(f"unknown variable {val!r}", pos)
            return MultiPoly.variable(self.var_names, self.var_index[val])
        if kind == "op" and val == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ParseError("expected a number, variable or parenthesized expression", pos)


def parse(text: str, var_names=None) -> MultiPoly:
    """Parse an expression like ``(z1+z3)^2 - z2^2`` into a MultiPoly.

    Grammar: ``+ - * ^`` with parentheses; numeric literals are decimal
    with an optional ``i`` suffix (``3``, ``2.5i``, bare ``i``);
    multiplication is always explicit (write ``2*z1``, not ``2z1``).
    When ``var_names`` is None the variables are collected from the
    expression and ordered naturally (z2 before z10); passing explicit
    names pins both the universe and the order, and unknown identifiers
    become errors.  Malformed input raises :class:`ParseError` with the
    character offset.
    """
    tokens = _tokenize(text)
    if var_names is None:
        seen = {val for kind, val, _ in tokens if kind == "ident"}
        var_names = tuple(sorted(seen, key=_natural_key))
    parser = _Parser(tokens, tuple(var_names))
    result = parser.parse_expr()
    kind, _, pos = parser.peek()
    if kind != "end":
        raise ParseError("trailing input", pos)
    return result

"""Scenario files: a YAML mapping describing one run of one pipeline.

Complex data is written as separate real and imaginary arrays (``q_re`` /
``q_im``, ``tensor_re`` / ``tensor_im``) so fixtures diff cleanly and floats
round-trip bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .coxeter import CoxeterError, coxeter_matrix, validate_matrix
from .fock import FockError, QSpec

KINDS = ("coxeter", "positivity", "blocklength", "fock", "wick", "opspace")
GROUP_KINDS = ("coxeter", "positivity", "blocklength")
FOCK_KINDS = ("fock", "wick", "opspace")

DEFAULT_LEVELS = 4
DEFAULT_SCALAR = 0.5
DEFAULT_TOLERANCES = {
    "residual": 1e-10,
    "psd": 1e-8,
    "norm": 1e-8,
    "kernel_cutoff": 1e-10,
    "injectivity": 1e-6,
}

_KNOWN = {
    "kind", "group", "matrix", "d", "levels", "q", "q_re", "q_im", "tensor_re", "tensor_im",
    "scalar", "seed", "tolerances", "trials", "m", "aux_dim", "word", "max_degree",
}


class ScenarioError(ValueError):
    """Bad scenario input; ``field`` and ``line`` locate it when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.field = field
        self.line = line


Matrix = tuple[tuple[complex, ...], ...]


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    group: str | None = None
    matrix: tuple[tuple[int, ...], ...] | None = None
    d: int | None = None
    levels: int = DEFAULT_LEVELS
    q: Matrix | None = None
    tensor: Matrix | None = None
    scalar: float | None = None
    seed: int = 0
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    trials: int | None = None
    m: int | None = None
    aux_dim: int | None = None
    word: tuple[int, ...] | None = None
    max_degree: int | None = None

    def coxeter(self) -> np.ndarray:
        if self.matrix is not None:
            return np.array(self.matrix, dtype=int)
        return coxeter_matrix(self.group)

    def q_array(self) -> np.ndarray | None:
        return None if self.q is None else np.array(self.q, dtype=complex)

    def tensor_array(self) -> np.ndarray | None:
        return None if self.tensor is None else np.array(self.tensor, dtype=complex)

    def tol(self, key: str) -> float:
        return self.tolerances[key]


def _to_matrix(a) -> Matrix:
    return tuple(tuple(complex(x) for x in row) for row in np.asarray(a))


def _lines(text: str) -> dict[str, int]:
    """Top-level key -> 1-based line number."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value if isinstance(k, yaml.ScalarNode)}


def _complex_array(doc: dict, re_key: str, im_key: str, lines) -> np.ndarray:
    def grab(key):
        try:
            a = np.array(doc[key], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"not a numeric array ({exc})", key, lines.get(key)) from None
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ScenarioError(f"must be a square matrix, got shape {a.shape}", key,
                                lines.get(key))
        return a

    re = grab(re_key)
    im = grab(im_key) if im_key in doc else np.zeros_like(re)
    if im.shape != re.shape:
        raise ScenarioError(f"shape {im.shape} differs from {re_key} {re.shape}", im_key,
                            lines.get(im_key))
    return re + 1j * im


def _int(doc, key, lines, lo=0):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ScenarioError(f"must be an integer >= {lo}, got {v!r}", key, lines.get(key))
    return v


def from_mapping(doc: Any, lines: dict[str, int] | None = None) -> ScenarioSpec:
    """Validate a parsed document and fill in defaults."""
    lines = lines or {}
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a mapping")
    unknown = sorted(set(doc) - _KNOWN)
    if unknown:
        raise ScenarioError(f"unknown field(s) {unknown}", unknown[0], lines.get(unknown[0]))
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ScenarioError(f"must be one of {list(KINDS)}, got {kind!r}", "kind",
                            lines.get("kind"))
    out: dict[str, Any] = {"kind": kind}

    for key in ("d", "levels", "seed", "trials", "m", "aux_dim", "max_degree"):
        if key in doc:
            out[key] = _int(doc, key, lines, lo=0 if key in ("seed", "trials") else 1)

    tol = dict(DEFAULT_TOLERANCES)
    if "tolerances" in doc:
        given = doc["tolerances"]
        if not isinstance(given, dict) or set(given) - set(tol):
            raise ScenarioError(f"must map a subset of {sorted(tol)} to numbers", "tolerances",
                                lines.get("tolerances"))
        for k, v in given.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
                raise ScenarioError(f"tolerance {k} must be a non-negative number", "tolerances",
                                    lines.get("tolerances"))
            tol[k] = float(v)
    out["tolerances"] = tol

    if "scalar" in doc:
        v = doc["scalar"]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ScenarioError("must be a real number", "scalar", lines.get("scalar"))
        out["scalar"] = float(v)

    if "word" in doc:
        w = doc["word"]
        if not isinstance(w, list) or not all(isinstance(x, int) and x >= 1 for x in w):
            raise ScenarioError("must be a list of letters >= 1", "word", lines.get("word"))
        out["word"] = tuple(w)

    if kind in GROUP_KINDS:
        _group_fields(doc, lines, out)
    elif "group" in doc or "matrix" in doc:
        key = "group" if "group" in doc else "matrix"
        raise ScenarioError(f"not used by kind {kind}", key, lines.get(key))

    has_q = any(k in doc for k in ("q", "q_re", "q_im"))
    has_t = any(k in doc for k in ("tensor_re", "tensor_im"))
    if has_q and has_t:
        raise ScenarioError("give exactly one of q and tensor", "tensor_re", lines.get("tensor_re"))
    if kind in FOCK_KINDS and not (has_q or has_t):
        raise ScenarioError(f"kind {kind} needs q or tensor", "q", lines.get("kind"))
    if kind == "wick" and has_t:
        raise ScenarioError("wick moments need a q matrix, not a general tensor", "tensor_re",
                            lines.get("tensor_re"))
    if kind in ("coxeter", "blocklength") and (has_q or has_t):
        raise ScenarioError(f"not used by kind {kind}", "q", lines.get("q", lines.get("q_re")))
    if has_q:
        out["q"] = _to_matrix(_q_field(doc, lines, out.get("d")))
        out.setdefault("d", len(out["q"]))
    if has_t:
        t = _complex_array(doc, "tensor_re", "tensor_im", lines)
        n = int(round(np.sqrt(len(t))))
        if n * n != len(t):
            raise ScenarioError(f"tensor size {len(t)} is not d^2", "tensor_re",
                                lines.get("tensor_re"))
        if out.get("d", n) != n:
            raise ScenarioError(f"d = {out['d']} but the tensor acts on d = {n}", "d",
                                lines.get("d"))
        if np.abs(t - t.conj().T).max() > 1e-12:
            raise ScenarioError("tensor must be Hermitian", "tensor_re", lines.get("tensor_re"))
        out["tensor"] = _to_matrix(t)
        out["d"] = n

    if kind == "positivity" and ("q" in out or "tensor" in out):
        cox = np.array(out["matrix"]) if "matrix" in out else coxeter_matrix(out["group"])
        if not _is_type_a(cox):
            raise ScenarioError("a tensor family needs a type A group", "group", lines.get("group"))
    if "word" in out and "d" in out and max(out["word"], default=1) > out["d"]:
        raise ScenarioError(f"letters must lie in 1..{out['d']}", "word", lines.get("word"))
    if "m" in out and "d" in out and out["m"] > out["d"]:
        raise ScenarioError(f"m = {out['m']} exceeds d = {out['d']}", "m", lines.get("m"))
    return ScenarioSpec(**out)


def _is_type_a(cox: np.ndarray) -> bool:
    n = len(cox)
    return bool(np.array_equal(cox, coxeter_matrix(f"A{n}"))) if n else False


def _group_fields(doc, lines, out):
    if ("group" in doc) == ("matrix" in doc):
        raise ScenarioError("give exactly one of group and matrix", "group", lines.get("group"))
    if "group" in doc:
        try:
            coxeter_matrix(str(doc["group"]))
        except CoxeterError as exc:
            raise ScenarioError(str(exc), "group", lines.get("group")) from None
        out["group"] = str(doc["group"])
    else:
        try:
            m = validate_matrix(doc["matrix"])
        except (CoxeterError, TypeError, ValueError) as exc:
            raise ScenarioError(str(exc), "matrix", lines.get("matrix")) from None
        out["matrix"] = tuple(tuple(int(x) for x in row) for row in m)


def _q_field(doc, lines, d):
    if "q" in doc:
        if "q_re" in doc or "q_im" in doc:
            raise ScenarioError("give q or q_re/q_im, not both", "q", lines.get("q"))
        v = doc["q"]
        if d is None:
            raise ScenarioError("shorthand q needs d", "d", lines.get("q"))
        if v == "zeros":
            v = 0.0
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ScenarioError("shorthand must be 'zeros' or a real number", "q", lines.get("q"))
        q = np.full((d, d), float(v), dtype=complex)
    else:
        q = _complex_array(doc, "q_re", "q_im", lines)
        if d is not None and len(q) != d:
            raise ScenarioError(f"d = {d} but q is {len(q)} x {len(q)}", "d", lines.get("d"))
    try:
        QSpec(q)
    except FockError as exc:
        key = "q" if "q" in doc else "q_re"
        raise ScenarioError(str(exc), key, lines.get(key)) from None
    return q


def loads(text: str) -> ScenarioSpec:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", exc)
        raise ScenarioError(f"malformed document: {problem}", line=line) from None
    return from_mapping(doc, _lines(text))


def parse_spec(path: str | Path) -> ScenarioSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def to_mapping(spec: ScenarioSpec) -> dict[str, Any]:
    doc: dict[str, Any] = {"kind": spec.kind}
    for f in fields(spec):
        v = getattr(spec, f.name)
        if f.name == "kind" or v is None:
            continue
        if f.name in ("q", "tensor"):
            a = np.array(v, dtype=complex)
            doc[f"{f.name}_re"] = a.real.tolist()
            if np.any(a.imag):
                doc[f"{f.name}_im"] = a.imag.tolist()
        elif f.name == "matrix":
            doc["matrix"] = [list(r) for r in v]
        elif f.name == "word":
            doc["word"] = list(v)
        elif f.name == "tolerances":
            doc["tolerances"] = dict(v)
        else:
            doc[f.name] = v
    return doc


def serialize(spec: ScenarioSpec) -> str:
    return yaml.safe_dump(to_mapping(spec), sort_keys=False, default_flow_style=None)


def random_hermitian(rng: np.random.Generator, d: int, bound: float) -> np.ndarray:
    """Gaussian Hermitian matrix rescaled so max |q_ij| = bound."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (g + g.conj().T) / 2
    q = h * (bound / np.abs(h).max())
    return (q + q.conj().T) / 2


def gen_random(kind: str, seed: int = 0, d: int = 2, bound: float = 0.9, group: str = "A2",
               levels: int | None = None, trials: int | None = None, m: int | None = None,
               aux_dim: int | None = None) -> ScenarioSpec:
    """A reproducible random scenario of the given kind."""
    if kind not in KINDS:
        raise ScenarioError(f"unsupported kind {kind!r}; choose from {list(KINDS)}", "kind")
    if not 0 <= bound <= 1:
        raise ScenarioError(f"bound must lie in [0, 1], got {bound}", "bound")
    rng = np.random.default_rng(seed)
    base = dict(kind=kind, seed=seed)
    if levels is not None:
        base["levels"] = levels
    if kind == "coxeter":
        return _checked(ScenarioSpec(group=group, **base))
    if kind == "blocklength":
        return _checked(ScenarioSpec(group=group, scalar=float(rng.uniform(0, 1)), **base))
    if kind == "positivity":
        try:
            type_a = _is_type_a(coxeter_matrix(group))
        except CoxeterError as exc:
            raise ScenarioError(str(exc), "group") from None
        if not type_a:
            return _checked(ScenarioSpec(group=group, scalar=float(rng.uniform(-bound, bound)),
                                         **base))
        return _checked(ScenarioSpec(group=group, q=_to_matrix(random_hermitian(rng, d, bound)),
                                     d=d, **base))
    if kind == "opspace":
        d = max(d, m or 0)
        base.setdefault("levels", 3)
        return _checked(ScenarioSpec(q=_to_matrix(random_hermitian(rng, d, bound)), d=d,
                                     trials=5 if trials is None else trials,
                                     aux_dim=aux_dim or 2, m=m, **base))
    return _checked(ScenarioSpec(q=_to_matrix(random_hermitian(rng, d, bound)), d=d, **base))


def _checked(spec: ScenarioSpec) -> ScenarioSpec:
    return from_mapping(to_mapping(spec))


def with_overrides(spec: ScenarioSpec, **kw) -> ScenarioSpec:
    """Copy with the non-None keyword values replaced, re-validated."""
    kw = {k: v for k, v in kw.items() if v is not None}
    return from_mapping(to_mapping(replace(spec, **kw))) if kw else spec

"""JSON/CSV formats for channels, POMs, codes, families and reports.

Complex matrices are nested row-major lists of ``[re, im]`` pairs.  Floats
are written with 17 significant digits; non-finite floats become the strings
``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from fractions import Fraction
from typing import Any, Iterable

import numpy as np

from .channel import CQChannel, WordDistribution, make_channel
from .core import POM, validate_effect, validate_pom
from .errors import ParseError, ValidationError
from .families import FamilyParams, SetFamily
from .idcodes import QIDCodeGeneral, SimQIDCode
from .transmission import QCode


# ------------------------------------------------------------------ encoding


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj: Any, out: list[str]) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj)):
            if k:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, list):
        out.append("[")
        for k, v in enumerate(obj):
            if k:
                out.append(",")
            _emit(v, out)
        out.append("]")
    elif isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        if math.isnan(obj):
            out.append('"nan"')
        elif math.isinf(obj):
            out.append('"inf"' if obj > 0 else '"-inf"')
        else:
            text = "%.17g" % obj
            if "." not in text and "e" not in text and "n" not in text:
                text += ".0"
            out.append(text)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, no whitespace, 17-digit floats."""
    out: list[str] = []
    _emit(_plain(obj), out)
    return "".join(out)


def write_json(path: str, obj: Any) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def read_json(path: str) -> Any:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", exc.lineno, exc.colno) from exc


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def payload_digest(payload: Any) -> str:
    return hashlib.sha256(dumps(payload).encode()).hexdigest()


# ------------------------------------------------------------------ matrices


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def matrix_from_json(raw, where: str = "matrix") -> np.ndarray:
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: entries must be [re, im] number pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ParseError(f"{where}: expected a square matrix of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _require(doc: dict, keys: Iterable[str], where: str) -> None:
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected a JSON object")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise ParseError(f"{where}: missing field(s) {missing}")


# ------------------------------------------------------------------ channels


def channel_to_json(ch: CQChannel) -> dict:
    return {
        "alphabet_size": ch.alphabet_size,
        "dim": ch.dim,
        "signals": [matrix_to_json(s.matrix) for s in ch.signals],
    }


def channel_from_json(doc: dict, where: str = "channel") -> CQChannel:
    _require(doc, ("alphabet_size", "dim", "signals"), where)
    unknown = set(doc) - {"alphabet_size", "dim", "signals", "name", "description"}
    if unknown:
        raise ParseError(f"{where}: unknown field(s) {sorted(unknown)}")
    a, d, signals = doc["alphabet_size"], doc["dim"], doc["signals"]
    if not isinstance(signals, list) or len(signals) != a:
        raise ParseError(f"{where}: alphabet_size is {a} but {len(signals) if isinstance(signals, list) else '?'} signals given")
    mats = []
    for k, raw in enumerate(signals):
        m = matrix_from_json(raw, f"{where}.signals[{k}]")
        if m.shape != (d, d):
            raise ParseError(f"{where}.signals[{k}]: shape {m.shape} does not match dim {d}")
        mats.append(m)
    try:
        return make_channel(mats)
    except ValidationError as exc:
        bad = _first_invalid(mats)
        raise type(exc)(f"{where}.signals[{bad}]: {exc}", exc.value) from exc


def _first_invalid(mats) -> int:
    from .core import validate_density

    for k, m in enumerate(mats):
        try:
            validate_density(m)
        except ValidationError:
            return k
    return -1


def load_channel(path: str) -> CQChannel:
    return channel_from_json(read_json(path), os.path.basename(path))


# ---------------------------------------------------------------------- POMs


def pom_to_json(E: POM) -> dict:
    return {"dim": E.dim, "effects": [matrix_to_json(e) for e in E.effects], "labels": [_label(x) for x in E.labels]}


def _label(x):
    return list(_label(v) for v in x) if isinstance(x, tuple) else x


def _unlabel(x):
    return tuple(_unlabel(v) for v in x) if isinstance(x, list) else x


def pom_from_json(doc: dict, where: str = "pom") -> POM:
    _require(doc, ("effects",), where)
    mats = [matrix_from_json(e, f"{where}.effects[{k}]") for k, e in enumerate(doc["effects"])]
    labels = [_unlabel(x) for x in doc["labels"]] if "labels" in doc else None
    return validate_pom(mats, labels)


# --------------------------------------------------------------------- codes


def code_to_json(code: QCode, provenance: dict | None = None) -> dict:
    return {
        "kind": "qcode",
        "n": code.n,
        "codewords": [list(c) for c in code.codewords],
        "decoder": pom_to_json(code.decoder),
        "has_fail": code.has_fail,
        "provenance": provenance or {},
    }


def code_from_json(doc: dict, where: str = "code") -> QCode:
    _require(doc, ("n", "codewords", "decoder"), where)
    decoder = pom_from_json(doc["decoder"], f"{where}.decoder")
    words = tuple(tuple(int(c) for c in w) for w in doc["codewords"])
    return QCode(int(doc["n"]), words, decoder, bool(doc.get("has_fail", False)))


def family_to_json(family: SetFamily, provenance: dict | None = None) -> dict:
    p = family.params
    return {
        "kind": "family",
        "params": {"M": p.M, "a": p.a, "lam": p.lam, "eps": p.eps},
        "sets": [sorted(s) for s in family.sets],
        "certified_maximal": family.certified_maximal,
        "order": family.order,
        "seed": family.seed,
        "provenance": provenance or {},
    }


def family_from_json(doc: dict, where: str = "family") -> SetFamily:
    _require(doc, ("params", "sets"), where)
    p = doc["params"]
    params = FamilyParams.create(int(p["M"]), int(p["a"]), float(p["lam"]), p.get("eps"))
    sets = tuple(tuple(sorted(int(k) for k in s)) for s in doc["sets"])
    return SetFamily(
        params,
        sets,
        certified_maximal=bool(doc.get("certified_maximal", False)),
        order=doc.get("order", "lexicographic"),
        seed=doc.get("seed"),
    )


def distribution_to_json(P: WordDistribution) -> dict:
    return {"words": [list(w) for w in P.words], "masses": list(P.masses)}


def distribution_from_json(doc: dict) -> WordDistribution:
    masses = [Fraction(m) if isinstance(m, str) else m for m in doc["masses"]]
    return WordDistribution.from_mapping({tuple(w): m for w, m in zip(doc["words"], masses)})


def idcode_to_json(code: SimQIDCode | QIDCodeGeneral, refs: dict | None = None, metadata: dict | None = None) -> dict:
    """Inline ID code document, or a reference document when ``refs`` names
    the code and family files (``{"code_file": ..., "family_file": ...}``).
    """
    if refs:
        return {"kind": "sim-qid-ref", **refs, "metadata": metadata or {}}
    if isinstance(code, SimQIDCode):
        return {
            "kind": "sim-qid",
            "n": code.n,
            "base_pom": pom_to_json(code.base_pom),
            "subsets": [list(s) for s in code.subsets],
            "inputs": [distribution_to_json(P) for P in code.inputs],
            "metadata": metadata or {},
        }
    return {
        "kind": "qid-general",
        "n": code.n,
        "effects": [matrix_to_json(e.matrix) for e in code.effects],
        "inputs": [distribution_to_json(P) for P in code.inputs],
        "metadata": metadata or {},
    }


def load_idcode(path: str) -> tuple[SimQIDCode | QIDCodeGeneral, dict]:
    """Load an ID code file; returns the code and ``{path: sha256}`` of every file read."""
    from .idcodes import build_simultaneous_id_code

    doc = read_json(path)
    hashes = {path: file_sha256(path)}
    kind = doc.get("kind") if isinstance(doc, dict) else None
    base = os.path.dirname(os.path.abspath(path))
    if kind == "sim-qid-ref":
        _require(doc, ("code_file", "family_file"), path)
        cpath = os.path.join(base, doc["code_file"])
        fpath = os.path.join(base, doc["family_file"])
        code = code_from_json(read_json(cpath), cpath)
        family = family_from_json(read_json(fpath), fpath)
        hashes[cpath] = file_sha256(cpath)
        hashes[fpath] = file_sha256(fpath)
        return build_simultaneous_id_code(code, family), hashes
    if kind == "sim-qid":
        _require(doc, ("n", "base_pom", "subsets", "inputs"), path)
        return (
            SimQIDCode(
                int(doc["n"]),
                pom_from_json(doc["base_pom"], f"{path}.base_pom"),
                tuple(tuple(int(m) for m in s) for s in doc["subsets"]),
                tuple(distribution_from_json(P) for P in doc["inputs"]),
            ),
            hashes,
        )
    if kind == "qid-general":
        effects = tuple(validate_effect(matrix_from_json(e)) for e in doc["effects"])
        inputs = tuple(distribution_from_json(P) for P in doc["inputs"])
        return QIDCodeGeneral(int(doc["n"]), inputs, effects), hashes
    raise ParseError(f"{path}: unknown ID code kind {kind!r}")


# ----------------------------------------------------------------------- CSV


def write_density_csv(path: str, samples) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "density", "mass"])
        for s in samples:
            w.writerow([" ".join(map(str, s.word)), s.outcome + 1, "%.17g" % s.density, "%.17g" % s.mass])


"""INI scenario files: ``[tower]``, ``[characters]``, ``[params]``, ``[run]``.

Example::

    [tower]
    case = steinberg
    p = 5
    m0 = 1
    e_K = 1
    d = 2

    [characters]
    c = 1

    [params]
    weights = (0,1)
    alpha = pi
    partition = 0:I2
    L = 0:0

A module can also be given explicitly in a ``[module]`` section instead of
``[params]``: ``A.i`` and ``N.i`` are the matrices at component ``i``,
``G.name.i`` the Galois matrices, ``weights`` as above and ``fil`` a list of
``j.k:(x : y)`` items, ``k`` indexing the fiber over ``j`` in group-element
order (``j.*`` sets the whole fiber).  Matrices are written ``[[a, b], [c, d]]``.

Coefficients are written as sums of products of ``num/den``, ``zeta^k``,
``pi^k`` and ``w^k``; negative exponents need parentheses (``zeta^(-1)``).
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field

from .builder import CaseParams, default_field_params, required_root_order
from .coeff import CoeffError, parse_coeff
from .tower import CASES, SC_RAMIFIED, SC_UNRAMIFIED, TowerError, build_tower

TOWER_KEYS = {"case", "p", "m0", "e_k", "m1", "n1", "d", "m", "e"}


class ScenarioError(ValueError):
    """A malformed scenario; the message names the section and key."""


@dataclass
class RunOptions:
    commands: list[str] = field(default_factory=list)
    seed: int = 0
    n: int = 1
    cases: list[str] = field(default_factory=list)


@dataclass
class Scenario:
    path: str
    params: CaseParams
    run: RunOptions
    module: tuple | None = None  # (PhiNModule, FiltrationData) from a [module] section


def _err(path, section, key, msg) -> ScenarioError:
    where = f"[{section}]" + (f" {key}" if key else "")
    return ScenarioError(f"{path}: {where}: {msg}")


def _int(path, section, key, raw) -> int:
    try:
        return int(raw)
    except ValueError:
        raise _err(path, section, key, f"expected an integer, got {raw!r}") from None


def _int_list(path, section, key, raw) -> tuple[int, ...]:
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(_int(path, section, key, x) for x in re.split(r"[,\s]+", raw) if x)


def parse_weights(text: str) -> list[tuple[int, int]]:
    pairs = re.findall(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)", text)
    rest = re.sub(r"\(\s*-?\d+\s*,\s*-?\d+\s*\)", "", text).replace(",", "").strip()
    if rest or not pairs:
        raise ValueError(f"expected a list of pairs like (0,1), (1,3); got {text!r}")
    return [(int(a), int(b)) for a, b in pairs]


def _split_items(text: str) -> list[str]:
    """Split ``j:value`` items on commas outside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur))
    return [x.strip() for x in out if x.strip()]


def _indexed(path, section, key, raw) -> dict[int, str]:
    out = {}
    for item in _split_items(raw):
        if ":" not in item:
            raise _err(path, section, key, f"expected j:value items, got {item!r}")
        j, val = item.split(":", 1)
        out[_int(path, section, key, j.strip())] = val.strip()
    return out


def load(path: str) -> Scenario:
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    return from_config(cp, path)


def loads(text: str, path: str = "<string>") -> Scenario:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    return from_config(cp, path)


def from_config(cp: configparser.ConfigParser, path: str) -> Scenario:
    if not cp.has_section("tower"):
        raise _err(path, "tower", None, "missing section")
    tw = cp["tower"]
    unknown = set(tw) - TOWER_KEYS
    if unknown:
        raise _err(path, "tower", sorted(unknown)[0], "unknown key")
    case = tw.get("case", "").strip()
    if case not in CASES:
        raise _err(path, "tower", "case", f"expected one of {', '.join(CASES)}, got {case!r}")
    if "p" not in tw:
        raise _err(path, "tower", "p", "missing")
    ints = {k: _int(path, "tower", k, tw[k]) for k in ("p", "m0", "e_k", "m1", "n1", "d") if k in tw}
    params = CaseParams(case, ints["p"], ints.get("m0", 1), ints.get("e_k", 1), ints.get("m1", 1),
                        ints.get("n1", 1), ints.get("d", 1))
    if params.p == 2 or params.p < 2:
        raise _err(path, "tower", "p", "p must be an odd prime")

    chars = cp["characters"] if cp.has_section("characters") else {}
    if case in (SC_UNRAMIFIED, SC_RAMIFIED):
        params.chars = {"s": _int(path, "characters", "s", chars.get("s", "0")),
                        "chi1": _int_list(path, "characters", "chi1", chars.get("chi1", "")),
                        "chi2": _int_list(path, "characters", "chi2", chars.get("chi2", ""))}
    else:
        params.chars = {k: _int(path, "characters", k, v) for k, v in chars.items()}

    try:
        order = required_root_order(params)
    except Exception as exc:  # tower errors surface as input errors
        raise _err(path, "tower", None, str(exc)) from None
    m_def, e_def = default_field_params(case, params.p, params.e_K, order)
    params.m = _int(path, "tower", "m", tw["m"]) if "m" in tw else m_def
    params.e = _int(path, "tower", "e", tw["e"]) if "e" in tw else e_def
    F = params.field()

    def coeff(section, key, text):
        try:
            return parse_coeff(F, text)
        except CoeffError as exc:
            raise _err(path, section, key, str(exc)) from None

    run = _run_options(cp, path)
    if cp.has_section("module"):
        if cp.has_section("params"):
            raise _err(path, "module", None, "give either [params] or [module], not both")
        return Scenario(path, params, run, _module_section(cp["module"], params, path, coeff))
    if not cp.has_section("params"):
        raise _err(path, "params", None, "missing section")
    pr = cp["params"]
    if "weights" not in pr:
        raise _err(path, "params", "weights", "missing")
    try:
        wl = parse_weights(pr["weights"])
    except ValueError as exc:
        raise _err(path, "params", "weights", str(exc)) from None
    params.weights = dict(enumerate(wl))
    scalars = {}
    for key in ("a", "b", "c", "alpha1", "beta1"):
        if key in pr:
            scalars[key] = coeff("params", key, pr[key])
    if "alpha" in pr:
        scalars["alpha"] = [coeff("params", "alpha", x) for x in _split_items(pr["alpha"])]
    params.scalars = scalars
    if "partition" in pr:
        params.partition = _indexed(path, "params", "partition", pr["partition"])
    if "l" in pr:
        params.L = {j: coeff("params", "L", v) for j, v in _indexed(path, "params", "L", pr["l"]).items()}
    if "proj" in pr:
        proj = {}
        for j, v in _indexed(path, "params", "proj", pr["proj"]).items():
            inner = v.strip()
            if not (inner.startswith("(") and inner.endswith(")")) or inner.count(":") != 1:
                raise _err(path, "params", "proj", f"expected (x : y), got {v!r}")
            x, y = inner[1:-1].split(":")
            proj[j] = (coeff("params", "proj", x), coeff("params", "proj", y))
        params.proj = proj
    return Scenario(path, params, run)


def _run_options(cp, path) -> RunOptions:
    run = RunOptions()
    if cp.has_section("run"):
        rs = cp["run"]
        run.commands = [c for c in re.split(r"[,\s]+", rs.get("commands", "")) if c]
        run.seed = _int(path, "run", "seed", rs.get("seed", "0"))
        run.n = _int(path, "run", "n", rs.get("n", "1"))
        run.cases = [c for c in re.split(r"[,\s]+", rs.get("cases", "")) if c]
        bad = [c for c in run.cases if c not in CASES]
        if bad:
            raise _err(path, "run", "cases", f"unknown case {bad[0]!r}")
    return run


def _split_matrix_rows(text: str) -> list[str] | None:
    t = text.strip()
    if not (t.startswith("[[") and t.endswith("]]")):
        return None
    rows = re.split(r"\]\s*,\s*\[", t[2:-2])
    return rows if len(rows) == 2 else None


def _module_section(sec, params: CaseParams, path: str, coeff):
    from .module import FiltrationData, PhiNModule

    try:
        tower, torsor, G = build_tower(params.case, params.p, params.m0, params.e_K, params.m1,
                                       params.n1, params.d)
    except TowerError as exc:
        raise _err(path, "tower", None, str(exc)) from None
    F = params.field()
    n0 = tower.n0

    def matrix(key):
        if key not in sec:
            raise _err(path, "module", key, "missing")
        rows = _split_matrix_rows(sec[key])
        if rows is None:
            raise _err(path, "module", key, f"expected [[a, b], [c, d]], got {sec[key]!r}")
        out = []
        for row in rows:
            items = _split_items(row)
            if len(items) != 2:
                raise _err(path, "module", key, f"expected two entries per row, got {row!r}")
            out.append(tuple(coeff("module", key, x) for x in items))
        return tuple(out)

    known = {"weights", "fil"} | {f"a.{i}" for i in range(n0)} | {f"n.{i}" for i in range(n0)}
    known |= {f"g.{name.lower()}.{i}" for name in G.generators for i in range(n0)}
    unknown = sorted(set(sec) - known)
    if unknown:
        raise _err(path, "module", unknown[0], "unknown key")
    A = [matrix(f"A.{i}") for i in range(n0)]
    N = [matrix(f"N.{i}") for i in range(n0)]
    galois = {name: [matrix(f"G.{name}.{i}") for i in range(n0)] for name in G.generators}
    if "weights" not in sec:
        raise _err(path, "module", "weights", "missing")
    try:
        weights = dict(enumerate(parse_weights(sec["weights"])))
    except ValueError as exc:
        raise _err(path, "module", "weights", str(exc)) from None
    params.weights = weights
    lines = {}
    for item in _split_items(sec.get("fil", "")):
        m = re.fullmatch(r"(\d+)\.(\d+|\*)\s*:\s*\((.*)\)", item)
        if m is None or m.group(3).count(":") != 1:
            raise _err(path, "module", "fil", f"expected j.k:(x : y), got {item!r}")
        j = int(m.group(1))
        if j not in weights:
            raise _err(path, "module", "fil", f"no weights for j={j}")
        x, y = (coeff("module", "fil", t) for t in m.group(3).split(":"))
        fiber = torsor.fiber(j)
        if m.group(2) == "*":
            targets = fiber
        else:
            k = int(m.group(2))
            if k >= len(fiber):
                raise _err(path, "module", "fil", f"fiber over j={j} has {len(fiber)} points")
            targets = [fiber[k]]
        for jf in targets:
            lines[jf] = (x, y)
    D = PhiNModule(F, tower, torsor, A, N, galois)
    return D, FiltrationData(weights, lines)


def dumps(params: CaseParams) -> str:
    """Serialize parameters back to scenario text (round-trips through :func:`loads`)."""
    from .coeff import format_coeff

    lines = ["[tower]", f"case = {params.case}", f"p = {params.p}", f"m0 = {params.m0}",
             f"e_K = {params.e_K}", f"m1 = {params.m1}", f"n1 = {params.n1}", f"d = {params.d}",
             f"m = {params.m}", f"e = {params.e}", "", "[characters]"]
    for k, v in params.chars.items():
        lines.append(f"{k} = {', '.join(map(str, v)) if isinstance(v, tuple) else v}")
    lines += ["", "[params]"]
    lines.append("weights = " + ", ".join(f"({a},{b})" for _, (a, b) in sorted(params.weights.items())))
    for k, v in params.scalars.items():
        if isinstance(v, list):
            lines.append(f"{k} = " + ", ".join(format_coeff(x) for x in v))
        else:
            lines.append(f"{k} = {format_coeff(v)}")
    if params.partition:
        lines.append("partition = " + ", ".join(f"{j}:{v}" for j, v in sorted(params.partition.items())))
    if params.L:
        lines.append("L = " + ", ".join(f"{j}:{format_coeff(v)}" for j, v in sorted(params.L.items())))
    if params.proj:
        lines.append("proj = " + ", ".join(f"{j}:({format_coeff(x)} : {format_coeff(y)})"
                                           for j, (x, y) in sorted(params.proj.items())))
    return "\n".join(lines) + "\n"


def dumps_module(params: CaseParams, D, fil) -> str:
    """Scenario text with an explicit ``[module]`` section for ``(D, fil)``."""
    from .coeff import format_coeff

    def m(X):
        return "[" + ", ".join("[" + ", ".join(format_coeff(x) for x in row) + "]" for row in X) + "]"

    head = dumps(params).split("[params]")[0]
    lines = [head.rstrip("\n"), "", "[module]"]
    lines.append("weights = " + ", ".join(f"({a},{b})" for _, (a, b) in sorted(fil.weights.items())))
    for i in range(D.n0):
        lines.append(f"A.{i} = {m(D.A[i])}")
        lines.append(f"N.{i} = {m(D.N[i])}")
        for name in D.group.generators:
            lines.append(f"G.{name}.{i} = {m(D.galois[name][i])}")
    items = []
    for j in sorted(fil.weights):
        for k, jf in enumerate(D.torsor.fiber(j)):
            if jf in fil.lines:
                x, y = fil.lines[jf]
                items.append(f"{j}.{k}:({format_coeff(x)} : {format_coeff(y)})")
    if items:
        lines.append("fil = " + ", ".join(items))
    return "\n".join(lines) + "\n"

"""Fixtures, the twist search and the record verifier.

A fixture is a genus-0 curve (X, pi) of prime power level given by its map to
the j-line.  ``search`` sweeps the subfields K != Q of the level field and
returns one ``TwistRecord`` per twist over K (up to K-isomorphism); ``verify``
re-checks records from the matrix alone, without the cocycle that produced it.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from .cohomology import Obstruction, enumerate_cocycles, galois_group, trivialize_cocycle
from .conic import ConicForm
from .cyclotomic import CycloField, SubfieldSpec, descend, enumerate_subgroups
from .errors import InsufficientPrecision, InvariantViolation, NotASubfield, SchemaError, TwistError
from .qexp import j_series
from .ratfunc import LaurentSeries, Mobius, Poly, RatFunc, coefficients_in, compose_mobius, series_compose
from .solver import aut_group, level_bound, set_probe_offset, solve_mobius_equation

log = logging.getLogger(__name__)

__all__ = [
    "CurveFixture",
    "TwistRecord",
    "Report",
    "THEOREM_LEVELS",
    "ingest_fixture",
    "load_fixture_dir",
    "shipped_fixtures",
    "search_level",
    "automorphisms",
    "search",
    "verify",
    "records_to_json",
    "records_from_json",
]

# conductors m for which some subfield K != Q of K_m carries a twist
THEOREM_LEVELS = (3, 5, 7, 8, 9, 11, 13, 16, 25, 27, 32)
DEFAULT_J_DEPTH = 3  # check j through q^2

FIXTURE_SCHEMA = """\
fixture file: a JSON object with
  label       string
  p, n        integers, p prime, n >= 1 (level p^n)
  pi_gamma    {"conductor": N, "num": [c0, c1, ...], "den": [...]}
              each c is a list of "a/b" strings: coordinates in 1, z, z^2, ... (z = zeta_N)
  hauptmodul  optional {"conductor", "width", "valuation", "coeffs", "precision"}
              the series sum c_k q^(k/width), k from valuation, known below q^(precision/width)
  provenance  string
  notes       optional string"""


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass
class CurveFixture:
    label: str
    p: int
    n: int
    pi_gamma: RatFunc
    hauptmodul: LaurentSeries | None = None
    provenance: str = ""
    notes: str = ""

    @property
    def level(self) -> int:
        return self.p ** self.n

    def to_json(self) -> dict:
        out = {"label": self.label, "p": self.p, "n": self.n, "pi_gamma": self.pi_gamma.to_json()}
        if self.hauptmodul is not None:
            out["hauptmodul"] = self.hauptmodul.to_json()
        out["provenance"] = self.provenance
        if self.notes:
            out["notes"] = self.notes
        return out


def _parse_fixture(data) -> CurveFixture:
    if not isinstance(data, dict):
        raise SchemaError("fixture must be a JSON object")
    missing = [k for k in ("label", "p", "n", "pi_gamma", "provenance") if k not in data]
    if missing:
        raise SchemaError(f"fixture is missing {', '.join(missing)}")
    label, p, n = data["label"], data["p"], data["n"]
    if not isinstance(label, str) or not label:
        raise SchemaError("label must be a non-empty string")
    if not isinstance(p, int) or not _is_prime(p):
        raise SchemaError(f"p must be a prime, got {p!r}")
    if not isinstance(n, int) or n < 1:
        raise SchemaError(f"n must be a positive integer, got {n!r}")
    try:
        pi = RatFunc.from_json(data["pi_gamma"])
        h = LaurentSeries.from_json(data["hauptmodul"]) if data.get("hauptmodul") is not None else None
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"malformed series data: {exc}") from exc
    if pi.degree < 2:
        raise SchemaError("pi_gamma must have degree at least 2")
    return CurveFixture(label, p, n, pi, h, str(data["provenance"]), str(data.get("notes", "")))


def check_j_expansion(pi: RatFunc, h: LaurentSeries, depth: int = DEFAULT_J_DEPTH):
    """First exponent e < depth where pi(h) and j disagree, or None.

    Exponents are in units of q; fractional exponents must vanish.  Raises
    InsufficientPrecision when h is too short to reach q^(depth-1).
    """
    s = series_compose(pi, h)
    w = s.width
    j = j_series(depth, field=s.field)
    if s.precision is not None and s.precision < depth * w:
        raise InsufficientPrecision(f"pi(h) is known only below q^({s.precision}/{w})")
    for e in range(min(s.valuation, -w), depth * w):
        want = j.coefficient(e // w) if e % w == 0 else 0
        if s.coefficient(e) != want:
            return e // w if e % w == 0 else f"{e}/{w}"
    return None


def ingest_fixture(path_or_data, depth: int = DEFAULT_J_DEPTH) -> CurveFixture:
    """Parse and check a fixture; the j check runs when a hauptmodul is present."""
    if isinstance(path_or_data, (str, Path)):
        try:
            data = json.loads(Path(path_or_data).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read fixture {path_or_data}: {exc}") from exc
    else:
        data = path_or_data
    fx = _parse_fixture(data)
    if fx.level % fx.pi_gamma.field.N:
        exc = InvariantViolation(
            f"{fx.label}: coefficients live in K_{fx.pi_gamma.field.N}, which is not inside K_{fx.level}")
        exc.exponent = None
        raise exc
    if fx.hauptmodul is not None:
        try:
            bad = check_j_expansion(fx.pi_gamma, fx.hauptmodul, depth)
        except InsufficientPrecision as exc:
            err = InvariantViolation(f"{fx.label}: hauptmodul too short for the j check ({exc})")
            err.exponent = None
            raise err from exc
        if bad is not None:
            err = InvariantViolation(f"{fx.label}: pi(h) differs from j at q^{bad}")
            err.exponent = bad
            raise err
    return fx


def load_fixture_dir(path, depth: int = DEFAULT_J_DEPTH) -> dict[str, CurveFixture]:
    out = {}
    for f in sorted(Path(path).glob("*.json")):
        fx = ingest_fixture(f, depth)
        out[fx.label] = fx
    return out


def shipped_fixtures(depth: int = DEFAULT_J_DEPTH) -> dict[str, CurveFixture]:
    root = resources.files("modtwist") / "data" / "fixtures"
    out = {}
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            fx = ingest_fixture(json.loads(entry.read_text()), depth)
            out[fx.label] = fx
    return out


# ---------------------------------------------------------------------------
# records


@dataclass
class TwistRecord:
    label: str
    fixture: str
    K: SubfieldSpec
    status: str  # verified | found | inconclusive
    A: Mobius | None = None
    twisted: RatFunc | None = None
    conic: ConicForm | None = None
    route: str = ""
    orientation: str = ""
    in_level_field: bool | None = None  # cocycle values lie in PGL2 of the level field
    note: str = ""
    extra: dict = field(default_factory=dict)

    def payload_key(self) -> str:
        body = self.A.to_json() if self.A is not None else (self.conic.to_json() if self.conic else None)
        return json.dumps(body, sort_keys=True)

    def sort_key(self) -> tuple:
        return (self.K.sort_key(), self.status == "inconclusive", self.payload_key())

    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "fixture": self.fixture,
            "K": self.K.to_json(),
            "status": self.status,
            "route": self.route,
        }
        if self.A is not None:
            out["A"] = {"conductor": self.A.field.N, "matrix": self.A.to_json()}
        if self.twisted is not None:
            out["twisted"] = self.twisted.to_json()
        if self.conic is not None:
            out["conic"] = self.conic.to_json()
        if self.orientation:
            out["orientation"] = self.orientation
        if self.in_level_field is not None:
            out["in_level_field"] = self.in_level_field
        if self.note:
            out["note"] = self.note
        out.update(self.extra)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TwistRecord":
        try:
            A = None
            if data.get("A") is not None:
                A = Mobius.from_json(CycloField(int(data["A"]["conductor"])), data["A"]["matrix"])
            known = {"label", "fixture", "K", "status", "route", "A", "twisted", "conic", "orientation",
                     "in_level_field", "note"}
            return cls(
                label=data["label"],
                fixture=data["fixture"],
                K=SubfieldSpec.from_json(data["K"]),
                status=data["status"],
                A=A,
                twisted=RatFunc.from_json(data["twisted"]) if data.get("twisted") else None,
                conic=ConicForm.from_json(data["conic"]) if data.get("conic") else None,
                route=data.get("route", ""),
                orientation=data.get("orientation", ""),
                in_level_field=data.get("in_level_field"),
                note=data.get("note", ""),
                extra={k: v for k, v in data.items() if k not in known},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed record: {exc}") from exc


def records_to_json(records: Iterable[TwistRecord]) -> str:
    return json.dumps([r.to_json() for r in records], indent=1, sort_keys=True) + "\n"


def records_from_json(text: str) -> list[TwistRecord]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"record file is not JSON: {exc}") from exc
    if not isinstance(data, list):
        raise SchemaError("record file must hold a JSON list")
    return [TwistRecord.from_json(d) for d in data]


# ---------------------------------------------------------------------------
# search


def search_level(fx: CurveFixture) -> int:
    """Level used for the subfield sweep: 2 and 4 are raised to 8."""
    if fx.p == 2 and fx.level < 8:
        return 8
    return fx.level


def automorphisms(fx: CurveFixture, ambient: int | None = None, max_rounds: int = 4):
    """(Aut(pi) over K_{b * level}, b), iterating until b is stable.

    With ``ambient`` given, Aut is computed over that field only and b read off it.
    """
    level = search_level(fx)
    if ambient is not None:
        F = CycloField(math.lcm(ambient, fx.pi_gamma.field.N))
        aut = aut_group(fx.pi_gamma.embed(F.N), F)
        return aut, level_bound(aut, fx.p).b
    b = 1
    for _ in range(max_rounds):
        F = CycloField(b * level)
        aut = aut_group(fx.pi_gamma.embed(F.N), F)
        nb = level_bound(aut, fx.p).b
        if nb == b:
            return aut, b
        b = math.lcm(b, nb)
    raise TwistError(f"{fx.label}: automorphism level bound did not stabilize")


def _descend_ratfunc(pi: RatFunc, N: int) -> RatFunc:
    F = CycloField(N)
    num = Poly(F, [descend(c, N) for c in pi.num.coeffs])
    den = Poly(F, [descend(c, N) for c in pi.den.coeffs])
    return RatFunc(num, den)


def _in_field(x, N: int) -> bool:
    try:
        descend(x, N)
        return True
    except NotASubfield:
        return False


def _init_worker(seed: int) -> None:
    set_probe_offset(seed)


def _enumerate_task(args):
    pi, K, b, level = args
    return enumerate_cocycles(pi, K, b, level=level)


def _trivialize_task(args):
    z, route, budget = args
    G = z.group
    if route == "auto":
        order = ["cyclic-norm", "conic"] if G.is_cyclic() else ["conic"]
    elif route == "norm":
        order = ["cyclic-norm"]
    else:
        order = [route]
    last = None
    for r in order:
        try:
            res = trivialize_cocycle(z, r, budget)
        except TwistError as exc:
            log.debug("route %s failed: %s", r, exc)
            last = Obstruction(r, f"{type(exc).__name__}: {exc}")
            continue
        if isinstance(res, Mobius):
            return r, res
        last = res
    return (last.route if last else order[-1]), last


def _map(fn, items, workers: int, seed: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(seed,)) as pool:
        return list(pool.map(fn, items))


def _k_isomorphic(p1: RatFunc, p2: RatFunc, K: SubfieldSpec) -> bool:
    F = CycloField(K.N)
    for B in solve_mobius_equation(p1, p2, F):
        if all(K.contains(x) for x in B.entries):
            return True
    return False


def _subfield_tag(K: SubfieldSpec) -> str:
    return f"K{K.N}[{','.join(map(str, K.generators))}]"


def search(fx: CurveFixture, K: SubfieldSpec | None = None, route: str = "auto",
           budget: int | None = None, workers: int = 1, seed: int = 0) -> list[TwistRecord]:
    """Twists of fx over each subfield K != Q of the level field, up to K-isomorphism.

    A record's matrix A satisfies: pi o A has coefficients in K.
    """
    if route not in ("auto", "norm", "cyclic-norm", "conic"):
        raise ValueError(f"unknown route {route!r}")
    set_probe_offset(seed)
    level = search_level(fx)
    _, b = automorphisms(fx)
    log.info("%s: level %d, b = %d", fx.label, level, b)
    if K is None:
        fields = [H for H in enumerate_subgroups(level) if not H.is_rational()]
    else:
        if K.is_rational():
            raise ValueError("K = Q is outside the scope of the search")
        fields = [K.restrict_to(level)]
    pi = fx.pi_gamma.embed(level)
    per_field = _map(_enumerate_task, [(pi, H, b, level) for H in fields], workers, seed)
    jobs = [(H, z) for H, zs in zip(fields, per_field) for z in zs]
    outcomes = _map(_trivialize_task, [(z, route, budget) for _, z in jobs], workers, seed)

    records = []
    for H in fields:
        found, open_ = [], []
        for (H2, z), (r, res) in zip(jobs, outcomes):
            if H2 != H:
                continue
            base_values = all(_in_field(x, level) for d in z.group.elements for x in z(d).entries)
            if isinstance(res, Mobius):
                A = res.inverse()  # pi o A is K-rational when z(s) = res^-1 s(res)
                twisted = _descend_ratfunc(compose_mobius(fx.pi_gamma, A), level)
                found.append((A, twisted, r, base_values))
            else:
                open_.append((z, r, res, base_values))
        kept = []
        for A, twisted, r, base_values in sorted(found, key=lambda x: json.dumps(x[0].to_json())):
            if any(_k_isomorphic(tw, twisted, H) for _, tw, _, _ in kept):
                continue
            kept.append((A, twisted, r, base_values))
        for A, twisted, r, base_values in kept:
            records.append(TwistRecord(
                label="", fixture=fx.label, K=H, status="found", A=A, twisted=twisted, route=r,
                in_level_field=base_values,
                extra={"matrix_in_level_field": all(_in_field(x, level) for x in A.entries)}))
        for z, r, obs, base_values in open_:
            records.append(TwistRecord(
                label="", fixture=fx.label, K=H, status="inconclusive",
                conic=getattr(obs, "conic", None), route=r, in_level_field=base_values,
                note=getattr(obs, "reason", "") or "", extra={"cocycle": z.to_json()}))

    records.sort(key=TwistRecord.sort_key)
    counters: dict = {}
    for rec in records:
        tag = _subfield_tag(rec.K)
        counters[tag] = counters.get(tag, 0) + 1
        rec.label = f"{fx.label}-{tag}-{counters[tag]}"
    report = verify([r for r in records if r.A is not None], {fx.label: fx})
    for rec in records:
        if rec.A is None:
            continue
        row = report.rows_for(rec.label)
        if all(ok for _, ok, _ in row):
            rec.status = "verified"
            rec.orientation = next(detail for name, _, detail in row if name == "cocycle")
    return records


# ---------------------------------------------------------------------------
# verify


@dataclass
class Report:
    lines: list = field(default_factory=list)  # (record label, check, passed, detail)

    def add(self, label: str, check: str, ok: bool, detail: str = "") -> None:
        self.lines.append((label, check, bool(ok), detail))

    def rows_for(self, label: str) -> list:
        return [(c, ok, d) for lab, c, ok, d in self.lines if lab == label]

    @property
    def ok(self) -> bool:
        return all(ok for _, _, ok, _ in self.lines)

    def failures(self) -> list:
        return [x for x in self.lines if not x[2]]

    def text(self) -> str:
        return "\n".join(f"{'PASS' if ok else 'FAIL'} {lab} {c}" + (f" ({d})" if d else "")
                         for lab, c, ok, d in self.lines)

    def to_json(self) -> list:
        return [{"record": lab, "check": c, "pass": ok, "detail": d} for lab, c, ok, d in self.lines]


def _orientation_holds(pi: RatFunc, A: Mobius, G, left: bool) -> bool:
    for d in G.elements:
        sA = A.galois(d)
        z = A * sA.inverse() if left else A.inverse() * sA
        if pi.galois(d) != compose_mobius(pi, z):
            return False
    return True


def verify(records: Iterable[TwistRecord], fixtures: dict[str, CurveFixture]) -> Report:
    """Per-record checks; failures become report lines, never exceptions."""
    rep = Report()
    for rec in records:
        lab = rec.label
        fx = fixtures.get(rec.fixture)
        if fx is None:
            rep.add(lab, "fixture", False, f"unknown fixture {rec.fixture}")
            continue
        K = rec.K
        rep.add(lab, "scope", not K.is_rational(), "K = Q is out of scope" if K.is_rational() else "")
        cond = K.conductor
        hit = [m for m in THEOREM_LEVELS if m % cond == 0]
        rep.add(lab, "theorem-field", bool(hit), f"K inside K_{hit[0]}" if hit else f"conductor {cond}")
        if rec.A is not None:
            _verify_matrix(rep, lab, fx, rec)
        elif rec.conic is not None:
            _verify_conic(rep, lab, rec)
        elif rec.status != "inconclusive":
            rep.add(lab, "payload", False, "record carries neither a matrix nor a conic")
    return rep


def _verify_matrix(rep: Report, lab: str, fx: CurveFixture, rec: TwistRecord) -> None:
    A, K, pi = rec.A, rec.K, fx.pi_gamma
    try:
        comp = compose_mobius(pi, A)
        M = math.lcm(comp.field.N, K.N)
        rational = coefficients_in(comp.embed(M), K.restrict_to(M))
    except TwistError as exc:
        rep.add(lab, "rational", False, str(exc))
        return
    rep.add(lab, "rational", rational)
    if rec.twisted is not None:
        same = rec.twisted.embed(math.lcm(rec.twisted.field.N, comp.field.N)) == comp.embed(
            math.lcm(rec.twisted.field.N, comp.field.N))
        rep.add(lab, "twisted-map", same)
    M = math.lcm(A.field.N, pi.field.N, K.N)
    G = galois_group(M, K)
    piM, AM = pi.embed(M), A.embed(M)
    if _orientation_holds(piM, AM, G, left=True):
        rep.add(lab, "cocycle", True, "A s(A)^-1")
    elif _orientation_holds(piM, AM, G, left=False):
        rep.add(lab, "cocycle", True, "A^-1 s(A)")
    else:
        rep.add(lab, "cocycle", False, "neither orientation satisfies s(pi) = pi o z(s)")


def _verify_conic(rep: Report, lab: str, rec: TwistRecord) -> None:
    Q = rec.conic
    M = math.lcm(Q.field.N, rec.K.N)
    K = rec.K.restrict_to(M)
    entries = [x for row in Q.gram for x in row]
    rep.add(lab, "conic-field", all(K.contains(x) for x in entries))
    g = Q.gram
    det = (g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
           - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
           + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]))
    rep.add(lab, "conic-nondegenerate", bool(det))

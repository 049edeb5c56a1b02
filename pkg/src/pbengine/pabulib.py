"""
Reading and writing elections in the Pabulib ``.pb`` text format, plus a JSON
mirror of the same data.

A ``.pb`` document has three sections, ``META``, ``PROJECTS`` and ``VOTES``.
Each section starts with a header row of column names; rows are separated by
semicolons. Votes list project ids separated by commas, with a parallel
``points`` column for cumulative and scoring votes.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import NamedTuple

from pbengine.errors import (
    DuplicateProjectId,
    InconsistentInputs,
    InvalidBallot,
    MalformedNumber,
    MissingColumn,
    MissingMetadata,
    MissingSection,
    NonPositiveCost,
    PabulibError,
    UnknownProjectReference,
    UnknownVoteType,
)
from pbengine.model import (
    APPROVAL,
    CARDINAL,
    CUMULATIVE,
    ORDINAL,
    ApprovalBallot,
    CardinalBallot,
    CumulativeBallot,
    Instance,
    OrdinalBallot,
    Profile,
)
from pbengine.rational import format_fraction, format_rational, parse_rational

VOTE_TYPES = ("approval", "ordinal", "cumulative", "scoring")
_VOTE_TYPE_ALIASES = {"choose-1": "approval"}
_KIND_OF_VOTE_TYPE = {"approval": APPROVAL, "ordinal": ORDINAL, "cumulative": CUMULATIVE, "scoring": CARDINAL}
_VOTE_TYPE_OF_KIND = {v: k for k, v in _KIND_OF_VOTE_TYPE.items()}
REQUIRED_META = ("num_projects", "num_votes", "budget", "vote_type")
NORMALIZATION_KEY = "max_sum_points"


def _frozen(d) -> Mapping:
    return MappingProxyType(dict(d))


@dataclass(frozen=True, eq=False)
class ElectionMetadata:
    """
    Everything in a Pabulib file that is not part of the instance or profile.

    Parameters
    ----------
        meta : Mapping[str, str]
            The META section in file order.
        project_columns : tuple of str
            Extra PROJECTS columns (besides ``project_id`` and ``cost``), in order.
        project_fields : Mapping[str, Mapping[str, str]]
            Extra column values per project id.
        vote_columns : tuple of str
            Extra VOTES columns (besides ``voter_id``, ``vote`` and ``points``).
        voter_ids : tuple of str
            Voter ids in ballot order.
        voter_fields : tuple of Mapping[str, str]
            Extra column values per voter.
        warnings : tuple of str
            Parse warnings (ignored by equality).
    """

    meta: Mapping[str, str]
    project_columns: tuple = ()
    project_fields: Mapping = field(default_factory=dict)
    vote_columns: tuple = ()
    voter_ids: tuple = ()
    voter_fields: tuple = ()
    warnings: tuple = ()

    def __post_init__(self):
        meta = dict(self.meta)
        for key in REQUIRED_META:
            if key not in meta:
                raise MissingMetadata(f"META lacks the required key {key!r}")
        vt = meta["vote_type"].strip().lower()
        if _VOTE_TYPE_ALIASES.get(vt, vt) not in VOTE_TYPES:
            raise UnknownVoteType(f"unsupported vote_type {meta['vote_type']!r}")
        object.__setattr__(self, "meta", _frozen(meta))
        object.__setattr__(self, "project_columns", tuple(self.project_columns))
        object.__setattr__(
            self, "project_fields", _frozen((p, _frozen(v)) for p, v in dict(self.project_fields).items())
        )
        object.__setattr__(self, "vote_columns", tuple(self.vote_columns))
        object.__setattr__(self, "voter_ids", tuple(self.voter_ids))
        object.__setattr__(self, "voter_fields", tuple(_frozen(v) for v in self.voter_fields))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __eq__(self, other):
        if not isinstance(other, ElectionMetadata):
            return NotImplemented
        return (
            list(self.meta.items()) == list(other.meta.items())
            and self.project_columns == other.project_columns
            and {p: dict(v) for p, v in self.project_fields.items()}
            == {p: dict(v) for p, v in other.project_fields.items()}
            and self.vote_columns == other.vote_columns
            and self.voter_ids == other.voter_ids
            and [dict(v) for v in self.voter_fields] == [dict(v) for v in other.voter_fields]
        )

    __hash__ = None

    @property
    def vote_type(self) -> str:
        vt = self.meta["vote_type"].strip().lower()
        return _VOTE_TYPE_ALIASES.get(vt, vt)

    @classmethod
    def for_election(cls, instance: Instance, profile: Profile, **meta) -> "ElectionMetadata":
        """Minimal metadata describing ``instance`` and ``profile``."""
        if profile.kind not in _VOTE_TYPE_OF_KIND:
            raise InconsistentInputs(f"{profile.kind} profiles have no Pabulib vote_type")
        base = {
            "num_projects": str(instance.m),
            "num_votes": str(profile.n),
            "budget": format_rational(instance.budget_limit),
            "vote_type": _VOTE_TYPE_OF_KIND[profile.kind],
        }
        base.update({k: str(v) for k, v in meta.items()})
        return cls(base, voter_ids=tuple(str(i + 1) for i in range(profile.n)))


class Election(NamedTuple):
    """An ``(instance, profile, metadata)`` triple."""

    instance: Instance
    profile: Profile
    metadata: ElectionMetadata


# Parsing -------------------------------------------------------------------


def _number(text: str, line: int, what: str, decimal_comma: bool = True) -> Fraction:
    try:
        return parse_rational(text, decimal_comma=decimal_comma)
    except ValueError:
        raise MalformedNumber(f"{what}: {text!r} is not an exact number", line) from None


def _read_sections(text: str) -> dict:
    sections: dict = {}
    current = None
    reader = csv.reader(io.StringIO(text), delimiter=";")
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        head = row[0].strip().lower()
        if len(row) == 1 and head in ("meta", "projects", "votes"):
            if head in sections:
                raise PabulibError(f"section {head.upper()} appears twice", line)
            current = sections[head] = {"line": line, "header": None, "rows": []}
            continue
        if current is None:
            raise MissingSection("content before the first section header", line)
        cells = [c.strip() for c in row]
        if current["header"] is None:
            current["header"] = ([c.lower() for c in cells], line)
        else:
            current["rows"].append((cells, line))
    return sections


def _section(sections: dict, name: str, required_columns: tuple) -> tuple:
    if name not in sections:
        raise MissingSection(f"no {name.upper()} section")
    sec = sections[name]
    if sec["header"] is None:
        raise MissingColumn(f"{name.upper()} section has no header row", sec["line"])
    header, hline = sec["header"]
    for col in required_columns:
        if col not in header:
            raise MissingColumn(f"{name.upper()} header lacks column {col!r}", hline)
    if len(set(header)) != len(header):
        raise PabulibError(f"{name.upper()} header repeats a column", hline)
    rows = []
    for cells, line in sec["rows"]:
        if len(cells) > len(header):
            raise PabulibError(f"row has {len(cells)} fields but the header has {len(header)}", line)
        cells = cells + [""] * (len(header) - len(cells))
        rows.append((dict(zip(header, cells)), line))
    return header, rows


def _split_ids(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


def parse_pabulib(text) -> Election:
    """
    Parse a Pabulib document.

    Parameters
    ----------
        text : str or bytes
            The document. Bytes are decoded as UTF-8 (a leading BOM is ignored).
            LF and CRLF line endings are both accepted.

    Returns
    -------
        Election
            ``(instance, profile, metadata)``. Approval votes give approval
            ballots, ordinal votes strict rankings, scoring votes cardinal
            ballots, and cumulative votes cumulative ballots whose weights are
            the points divided by ``max_sum_points`` when that META key exists,
            otherwise by the voter's own point total.

    Raises
    ------
        PabulibError
            One of its subclasses, carrying the offending line number.

    Notes
    -----
    Projects costing more than the budget are dropped, together with every
    reference to them in the votes; the drop is recorded in
    ``metadata.warnings``.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8-sig")
    elif text.startswith("\ufeff"):
        text = text[1:]
    sections = _read_sections(text)

    # META
    _, meta_rows = _section(sections, "meta", ("key", "value"))
    meta: dict = {}
    meta_lines: dict = {}
    for row, line in meta_rows:
        key = row["key"]
        if key in meta:
            raise PabulibError(f"META key {key!r} repeated", line)
        meta[key] = row["value"]
        meta_lines[key] = line
    for key in ("budget", "vote_type"):
        if key not in meta:
            raise MissingMetadata(f"META lacks the required key {key!r}", sections["meta"]["line"])
    vote_type = meta["vote_type"].strip().lower()
    vote_type = _VOTE_TYPE_ALIASES.get(vote_type, vote_type)
    if vote_type not in VOTE_TYPES:
        raise UnknownVoteType(f"unsupported vote_type {meta['vote_type']!r}", meta_lines["vote_type"])
    budget = _number(meta["budget"], meta_lines["budget"], "budget")
    if budget <= 0:
        raise NonPositiveCost("budget must be positive", meta_lines["budget"])
    normalizer = None
    if vote_type == "cumulative" and NORMALIZATION_KEY in meta:
        normalizer = _number(meta[NORMALIZATION_KEY], meta_lines[NORMALIZATION_KEY], NORMALIZATION_KEY)
        if normalizer <= 0:
            raise MalformedNumber(f"{NORMALIZATION_KEY} must be positive", meta_lines[NORMALIZATION_KEY])

    # PROJECTS
    pheader, prows = _section(sections, "projects", ("project_id", "cost"))
    project_columns = tuple(c for c in pheader if c not in ("project_id", "cost"))
    costs: dict = {}
    fields_of: dict = {}
    warnings = []
    dropped = set()
    for row, line in prows:
        pid = row["project_id"]
        if not pid:
            raise PabulibError("empty project id", line)
        if pid in costs or pid in dropped:
            raise DuplicateProjectId(f"project id {pid!r} repeated", line)
        cost = _number(row["cost"], line, f"cost of {pid}")
        if cost <= 0:
            raise NonPositiveCost(f"cost of {pid} must be positive", line)
        if cost > budget:
            dropped.add(pid)
            warnings.append(f"line {line}: project {pid} costs {row['cost']} > budget; dropped")
            continue
        costs[pid] = cost
        fields_of[pid] = {c: row[c] for c in project_columns}
    instance = Instance.from_costs(costs, budget)

    # VOTES
    vheader, vrows = _section(sections, "votes", ("voter_id", "vote"))
    has_points = vote_type in ("cumulative", "scoring")
    if has_points and "points" not in vheader:
        raise MissingColumn("VOTES header lacks column 'points'", sections["votes"]["header"][1])
    skip = {"voter_id", "vote"} | ({"points"} if has_points else set())
    vote_columns = tuple(c for c in vheader if c not in skip)
    ballots, voter_ids, voter_fields = [], [], []
    for row, line in vrows:
        ids = _split_ids(row["vote"])
        unknown = [p for p in ids if p not in costs and p not in dropped]
        if unknown:
            raise UnknownProjectReference(f"vote references unknown project {unknown[0]!r}", line)
        if has_points:
            raw = _split_ids(row["points"])
            if len(raw) != len(ids):
                raise PabulibError("points and vote lists differ in length", line)
            points = [_number(x, line, "points", decimal_comma=False) for x in raw]
            if any(x < 0 for x in points):
                raise MalformedNumber("points must be nonnegative", line)
        try:
            if vote_type == "approval":
                ballot = ApprovalBallot(frozenset(p for p in ids if p in costs))
            elif vote_type == "ordinal":
                if len(set(ids)) != len(ids):
                    raise PabulibError("ordinal vote lists a project twice", line)
                ballot = OrdinalBallot(tuple(p for p in ids if p in costs))
            else:
                if len(set(ids)) != len(ids):
                    raise PabulibError("vote lists a project twice", line)
                scores = {p: x for p, x in zip(ids, points) if p in costs}
                if vote_type == "scoring":
                    ballot = CardinalBallot(scores)
                else:
                    total = normalizer if normalizer is not None else sum(points, Fraction(0))
                    ballot = CumulativeBallot({p: x / total for p, x in scores.items()} if total else {})
        except InvalidBallot as exc:
            raise PabulibError(str(exc), line) from None
        ballots.append(ballot)
        voter_ids.append(row["voter_id"])
        voter_fields.append({c: row[c] for c in vote_columns})
    if not ballots:
        raise PabulibError("VOTES section has no votes", sections["votes"]["line"])
    profile = Profile(tuple(ballots))

    meta.setdefault("num_projects", str(len(costs) + len(dropped)))
    meta.setdefault("num_votes", str(len(ballots)))
    metadata = ElectionMetadata(
        meta,
        project_columns=project_columns,
        project_fields=fields_of,
        vote_columns=vote_columns,
        voter_ids=tuple(voter_ids),
        voter_fields=tuple(voter_fields),
        warnings=tuple(warnings),
    )
    return Election(instance, profile, metadata)


def read_pabulib(path) -> Election:
    """Parse the ``.pb`` file at ``path``."""
    with open(path, "rb") as fh:
        return parse_pabulib(fh.read())


# Serialisation -------------------------------------------------------------


def _check_consistent(instance: Instance, profile: Profile, metadata: ElectionMetadata) -> None:
    if profile is None or len(profile.ballots) == 0:
        raise InconsistentInputs("empty profile")
    if profile.kind not in _VOTE_TYPE_OF_KIND:
        raise InconsistentInputs(f"{profile.kind} profiles cannot be written as Pabulib")
    if _VOTE_TYPE_OF_KIND[profile.kind] != metadata.vote_type:
        raise InconsistentInputs(f"vote_type {metadata.vote_type} does not match a {profile.kind} profile")
    try:
        profile.validate(instance)
    except Exception as exc:
        raise InconsistentInputs(str(exc)) from None
    if metadata.voter_ids and len(metadata.voter_ids) != profile.n:
        raise InconsistentInputs("voter id count differs from the number of ballots")
    if metadata.voter_fields and len(metadata.voter_fields) != profile.n:
        raise InconsistentInputs("voter field count differs from the number of ballots")
    try:
        budget = parse_rational(metadata.meta["budget"], decimal_comma=True)
    except ValueError:
        budget = None
    if budget is not None and budget != instance.budget_limit:
        raise InconsistentInputs("META budget differs from the instance budget limit")


def serialize_pabulib(instance: Instance, profile: Profile, metadata: ElectionMetadata | None = None) -> str:
    """
    Render an election as a Pabulib document (LF line endings).

    Rationals are written as their shortest exact decimal or as ``a/b``.

    Raises
    ------
        InconsistentInputs
            Empty profile, unknown project references, a vote type that does not
            match the profile, or a budget that differs from the META value.
    """
    if profile is None or (isinstance(profile, Profile) and profile.n == 0):
        raise InconsistentInputs("empty profile")
    if metadata is None:
        metadata = ElectionMetadata.for_election(instance, profile)
    _check_consistent(instance, profile, metadata)
    out = io.StringIO()
    w = csv.writer(out, delimiter=";", lineterminator="\n")
    w.writerow(["META"])
    w.writerow(["key", "value"])
    for k, v in metadata.meta.items():
        w.writerow([k, v])

    w.writerow(["PROJECTS"])
    w.writerow(["project_id", "cost", *metadata.project_columns])
    for p in instance.projects:
        extra = metadata.project_fields.get(p, {})
        w.writerow([p, format_rational(instance.costs[p]), *(extra.get(c, "") for c in metadata.project_columns)])

    w.writerow(["VOTES"])
    has_points = profile.kind in (CARDINAL, CUMULATIVE)
    w.writerow(["voter_id", "vote", *(["points"] if has_points else []), *metadata.vote_columns])
    scale = Fraction(1)
    if profile.kind == CUMULATIVE and NORMALIZATION_KEY in metadata.meta:
        scale = parse_rational(metadata.meta[NORMALIZATION_KEY], decimal_comma=True)
    order = instance.index
    for i, ballot in enumerate(profile.ballots):
        vid = metadata.voter_ids[i] if metadata.voter_ids else str(i + 1)
        extra = metadata.voter_fields[i] if metadata.voter_fields else {}
        if profile.kind == APPROVAL:
            ids = sorted(ballot.approved, key=order.__getitem__)
            cells = [",".join(ids)]
        elif profile.kind == ORDINAL:
            cells = [",".join(ballot.ranking)]
        else:
            values = ballot.scores if profile.kind == CARDINAL else ballot.weights
            ids = sorted(values, key=order.__getitem__)
            cells = [",".join(ids), ",".join(format_rational(values[p] * scale) for p in ids)]
        w.writerow([vid, *cells, *(extra.get(c, "") for c in metadata.vote_columns)])
    return out.getvalue()


def write_pabulib(path, instance: Instance, profile: Profile, metadata: ElectionMetadata | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(serialize_pabulib(instance, profile, metadata))


# JSON mirror ---------------------------------------------------------------


def _ballot_to_json(ballot, order) -> object:
    if ballot.kind == APPROVAL:
        return sorted(ballot.approved, key=order.__getitem__)
    if ballot.kind == ORDINAL:
        return list(ballot.ranking)
    if ballot.kind == CARDINAL:
        return {p: format_fraction(s) for p, s in ballot.scores.items()}
    if ballot.kind == CUMULATIVE:
        return {p: format_fraction(s) for p, s in ballot.weights.items()}
    return [sorted(c, key=order.__getitem__) for c in ballot.classes]


def election_to_json(instance: Instance, profile: Profile, metadata: ElectionMetadata | None = None) -> dict:
    """
    JSON-ready dictionary mirroring the domain types. Rationals are ``"a/b"`` strings.
    """
    if metadata is None:
        metadata = ElectionMetadata.for_election(instance, profile)
    order = instance.index
    return {
        "instance": {
            "budget_limit": format_fraction(instance.budget_limit),
            "projects": [{"id": p, "cost": format_fraction(instance.costs[p])} for p in instance.projects],
        },
        "profile": {"kind": profile.kind, "ballots": [_ballot_to_json(b, order) for b in profile.ballots]},
        "metadata": {
            "meta": [[k, v] for k, v in metadata.meta.items()],
            "project_columns": list(metadata.project_columns),
            "project_fields": {p: dict(v) for p, v in metadata.project_fields.items()},
            "vote_columns": list(metadata.vote_columns),
            "voter_ids": list(metadata.voter_ids),
            "voter_fields": [dict(v) for v in metadata.voter_fields],
        },
    }


def election_from_json(data: dict) -> Election:
    """Inverse of :py:func:`election_to_json`."""
    try:
        inst = data["instance"]
        instance = Instance.from_costs(
            [(d["id"], parse_rational(d["cost"])) for d in inst["projects"]], parse_rational(inst["budget_limit"])
        )
        kind = data["profile"]["kind"]
        raw = data["profile"]["ballots"]
        if kind == APPROVAL:
            profile = Profile.approval(raw)
        elif kind == ORDINAL:
            profile = Profile.ordinal(raw)
        elif kind == CARDINAL:
            profile = Profile.cardinal([{p: parse_rational(s) for p, s in b.items()} for b in raw])
        elif kind == CUMULATIVE:
            profile = Profile.cumulative([{p: parse_rational(s) for p, s in b.items()} for b in raw])
        else:
            profile = Profile.weak_ordinal(raw)
        md = data.get("metadata")
        if md is None:
            metadata = ElectionMetadata.for_election(instance, profile)
        else:
            metadata = ElectionMetadata(
                {k: v for k, v in md["meta"]},
                project_columns=tuple(md.get("project_columns", ())),
                project_fields=md.get("project_fields", {}),
                vote_columns=tuple(md.get("vote_columns", ())),
                voter_ids=tuple(md.get("voter_ids", ())),
                voter_fields=tuple(md.get("voter_fields", ())),
            )
    except PabulibError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise PabulibError(f"malformed election JSON: {exc}") from None
    profile.validate(instance)
    return Election(instance, profile, metadata)


def dumps_json(obj) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

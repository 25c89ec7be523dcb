"""Text formats: models, partitions, counterexample directories and DOT.

Model files are line oriented; ``#`` starts a comment::

    mdp
    state q0 init labels {}
    state q1 labels {P1}
    state q2 labels {P2}
    choice q0 -> q1:3/4, q2:1/4
    choice q0 -> q1:1/4, q2:3/4

States without ``choice`` lines get the all-zero choice. A ``dtmc`` header
allows at most one choice per state.
"""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path
from typing import Union

from .abstraction import Partition, PartitionError, Quotient
from .cegar import CounterExample
from .mdp import ONE, Mdp, SubDist
from .relation import SimRelation


class ModelSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


_NAME = r"[^\s:,{}#]+"
_STATE = re.compile(rf"state\s+({_NAME})((?:\s+init)?)\s+labels\s*\{{([^}}]*)\}}\s*$")
_CHOICE = re.compile(rf"choice\s+({_NAME})\s*->\s*(.*)$")
_ENTRY = re.compile(rf"\s*({_NAME})\s*:\s*(\S+)\s*$")


def parse_rational(text: str, line: int | None = None) -> Fraction:
    try:
        p = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ModelSyntaxError(f"bad rational {text!r}", line) from None
    if not 0 <= p <= 1:
        raise ModelSyntaxError(f"probability {text} outside [0,1]", line)
    return p


def _strip(raw: str) -> str:
    return raw.split("#", 1)[0].strip()


def parse_mdp_file(text: str) -> Mdp:
    header = None
    names: list[str] = []
    labels: list[frozenset[str]] = []
    index: dict[str, int] = {}
    init = None
    choices: dict[int, list[SubDist]] = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        if header is None:
            if line not in ("mdp", "dtmc"):
                raise ModelSyntaxError(f"expected 'mdp' or 'dtmc' header, found {line!r}", no)
            header = line
            continue
        m = _STATE.match(line)
        if m:
            name, is_init, labs = m.groups()
            if name in index:
                raise ModelSyntaxError(f"duplicate state {name!r}", no)
            index[name] = len(names)
            names.append(name)
            labels.append(frozenset(x for x in re.split(r"[\s,]+", labs.strip()) if x))
            if is_init.strip():
                if init is not None:
                    raise ModelSyntaxError("second initial state", no)
                init = index[name]
            continue
        m = _CHOICE.match(line)
        if m:
            src, rest = m.groups()
            if src not in index:
                raise ModelSyntaxError(f"unknown state {src!r}", no)
            entries: dict[int, Fraction] = {}
            for part in filter(None, (s.strip() for s in rest.split(","))):
                e = _ENTRY.match(part)
                if not e:
                    raise ModelSyntaxError(f"malformed entry {part!r}", no)
                tgt, prob = e.groups()
                if tgt not in index:
                    raise ModelSyntaxError(f"unknown state {tgt!r}", no)
                if index[tgt] in entries:
                    raise ModelSyntaxError(f"target {tgt!r} listed twice", no)
                entries[index[tgt]] = parse_rational(prob, no)
            total = sum(entries.values(), Fraction(0))
            if total > ONE:
                raise ModelSyntaxError(f"mass {total} > 1", no)
            chs = choices.setdefault(index[src], [])
            if header == "dtmc" and chs:
                raise ModelSyntaxError(f"dtmc state {src!r} has more than one choice", no)
            chs.append(SubDist(entries))
            continue
        raise ModelSyntaxError(f"cannot parse {line!r}", no)
    if header is None:
        raise ModelSyntaxError("empty model file")
    if not names:
        raise ModelSyntaxError("model declares no states")
    if init is None:
        raise ModelSyntaxError("no initial state")
    return Mdp(
        tuple(names),
        tuple(labels),
        init,
        tuple(tuple(choices.get(q, ())) or (SubDist(),) for q in range(len(names))),
    )


def print_mdp(m: Mdp) -> str:
    out = ["dtmc" if m.is_dtmc() else "mdp"]
    for q in m.states:
        init = " init" if q == m.init else ""
        out.append(f"state {m.names[q]}{init} labels {{{', '.join(sorted(m.labels[q]))}}}")
    for q in m.states:
        chs = m.choices[q]
        if len(chs) == 1 and chs[0].is_zero():
            continue
        for mu in chs:
            body = ", ".join(f"{m.names[t]}:{p}" for t, p in sorted(mu.items()))
            out.append(f"choice {m.names[q]} -> {body}".rstrip())
    return "\n".join(out) + "\n"


def parse_partition_file(text: str, m: Mdp) -> Partition:
    """``block a b c`` lines; unlisted states become singletons."""
    blocks: list[list[int]] = []
    seen: dict[int, int] = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        words = line.split()
        if words[0] != "block" or len(words) < 2:
            raise ModelSyntaxError(f"expected 'block <state>...', found {line!r}", no)
        block = []
        for name in words[1:]:
            try:
                q = m.index(name)
            except KeyError:
                raise ModelSyntaxError(f"unknown state {name!r}", no) from None
            if q in seen:
                raise ModelSyntaxError(f"state {name!r} already in the block on line {seen[q]}", no)
            seen[q] = no
            block.append(q)
        if len({m.labels[q] for q in block}) > 1:
            raise ModelSyntaxError("block mixes states with different labels", no)
        blocks.append(block)
    rest = [[q] for q in m.states if q not in seen]
    return Partition.from_blocks(len(m), blocks + rest)


def print_partition(m: Mdp, part: Partition) -> str:
    return "".join(
        "block " + " ".join(m.names[q] for q in sorted(b)) + "\n" for b in part.blocks
    )


# --------------------------------------------------------------------------
# counterexample directories


def write_cex(directory: str | Path, cex: CounterExample, abstract: Mdp) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "cex.mdp").write_text(print_mdp(cex.e))
    rows = [f"{cex.e.names[a]}\t{abstract.names[b]}\n" for a, b in cex.r.pairs()]
    (d / "rel.tsv").write_text("".join(rows))
    return d


def read_cex(directory: str | Path, abstract: Mdp) -> CounterExample:
    d = Path(directory)
    e = parse_mdp_file((d / "cex.mdp").read_text())
    pairs = []
    for no, raw in enumerate((d / "rel.tsv").read_text().splitlines(), 1):
        if not raw.strip():
            continue
        cols = raw.split("\t")
        if len(cols) != 2:
            raise ModelSyntaxError("expected two tab-separated columns", no)
        try:
            pairs.append((e.index(cols[0].strip()), abstract.index(cols[1].strip())))
        except KeyError as exc:
            raise ModelSyntaxError(f"unknown state {exc.args[0]!r}", no) from None
    return CounterExample(e, SimRelation.from_pairs(len(e), pairs))


# --------------------------------------------------------------------------
# DOT


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _mdp_dot(m: Mdp, prefix: str = "", indent: str = "  ") -> list[str]:
    lines = []
    for q in m.states:
        lab = ",".join(sorted(m.labels[q]))
        text = f"{m.names[q]}\n{{{lab}}}"
        shape = "doublecircle" if q == m.init else "circle"
        lines.append(f"{indent}{_quote(prefix + m.names[q])} [label={_quote(text)}, shape={shape}];")
    for q in m.states:
        for i, mu in enumerate(m.choices[q]):
            if mu.is_zero():
                continue
            c = f"{prefix}{m.names[q]}/{i}"
            lines.append(f"{indent}{_quote(c)} [label=\"\", shape=point];")
            lines.append(f"{indent}{_quote(prefix + m.names[q])} -> {_quote(c)} [arrowhead=none];")
            for t, p in sorted(mu.items()):
                lines.append(f"{indent}{_quote(c)} -> {_quote(prefix + m.names[t])} [label={_quote(str(p))}];")
    return lines


def export_dot(obj: Union[Mdp, CounterExample, Quotient], abstract: Mdp | None = None) -> str:
    """Graphviz text; a point node stands for each nonzero choice.

    For a counterexample, pass ``abstract`` to draw the related abstract
    states and the relation as dashed edges.
    """
    out = ["digraph mdp {", "  rankdir=LR;"]
    if isinstance(obj, Quotient):
        out += _mdp_dot(obj.abstract)
    elif isinstance(obj, CounterExample):
        out += _mdp_dot(obj.e)
        if abstract is not None:
            out.append("  subgraph cluster_abstract {")
            out.append("    label=\"abstract\";")
            out += _mdp_dot(abstract, "abs:", "    ")
            out.append("  }")
            for a, b in obj.r.pairs():
                out.append(
                    f"  {_quote(obj.e.names[a])} -> {_quote('abs:' + abstract.names[b])}"
                    " [style=dashed, constraint=false];"
                )
        else:
            for a, b in obj.r.pairs():
                out.append(f"  {_quote(obj.e.names[a])} [xlabel={_quote('R: ' + str(b))}];")
    else:
        out += _mdp_dot(obj)
    out.append("}")
    return "\n".join(out) + "\n"


__all__ = [
    "ModelSyntaxError",
    "PartitionError",
    "parse_rational",
    "parse_mdp_file",
    "print_mdp",
    "parse_partition_file",
    "print_partition",
    "write_cex",
    "read_cex",
    "export_dot",
]

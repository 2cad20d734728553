"""Minimal parser for the DOT subset the package emits (digraph, node and edge statements)."""

import re

_ID = r'(?:[A-Za-z_][A-Za-z_0-9]*|"[^"]*"|-?\d+(?:\.\d+)?)'
_ATTR = rf'{_ID}\s*=\s*{_ID}'
_ATTRS = rf'\[\s*(?:{_ATTR}\s*(?:,\s*{_ATTR}\s*)*)?\]'
_NODE_DEFAULT = re.compile(rf'^node\s*{_ATTRS}$')
_NODE = re.compile(rf'^({_ID})(?:\s*{_ATTRS})?$')
_EDGE = re.compile(rf'^({_ID})\s*->\s*({_ID})\s*({_ATTRS})?$')
_HEAD = re.compile(rf'^digraph\s*({_ID})?\s*\{{$')


def _unq(s):
    return s[1:-1] if s.startswith('"') else s


def parse_dot(text):
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    m = _HEAD.match(lines[0])
    if not m or lines[-1] != "}":
        raise ValueError("not a digraph")
    nodes, edges = [], []
    for ln in lines[1:-1]:
        if not ln.endswith(";"):
            raise ValueError(f"missing semicolon: {ln}")
        stmt = ln[:-1].strip()
        if _NODE_DEFAULT.match(stmt):
            continue
        e = _EDGE.match(stmt)
        if e:
            attrs = dict((_unq(k), _unq(v)) for k, v in re.findall(rf'({_ID})\s*=\s*({_ID})', e.group(3) or ""))
            edges.append((_unq(e.group(1)), _unq(e.group(2)), attrs))
            continue
        n = _NODE.match(stmt)
        if n:
            nodes.append(_unq(n.group(1)))
            continue
        raise ValueError(f"unparseable statement: {stmt}")
    return nodes, edges

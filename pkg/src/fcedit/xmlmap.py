"""XML documents to replicated trees and back.

Mapping conventions:

* an element becomes an edge labelled with its tag;
* each attribute becomes a leaf child edge labelled ``@name=value``, placed
  before the element's content;
* each non-blank run of character data becomes a leaf edge whose label is
  the text with surrounding whitespace stripped.

Document order is carried by position words.  Pretty export turns a leaf
whose label is not an XML name back into character data; an unlabelled edge
becomes ``<_pending/>`` and a labelled inner edge whose label is not a name
becomes ``<_node label="...">``.  Canonical export is the tree's canonical
serialization and is the authoritative form for equality.
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from typing import List, Tuple
from xml.sax.saxutils import escape, quoteattr

from .engine import Request, SiteEngine
from .identity import ROOT_ID, Id
from .tree import NO_VALUE, Edge, Tree, canonical_form

_WRAP_OPEN = "<_fcedit_fragment>"
_WRAP_CLOSE = "</_fcedit_fragment>"
_DECL_RE = re.compile(r"\A﻿?\s*<\?xml[^>]*\?>")
_NAME_RE = re.compile(r"[^\W\d][\w.\-]*")


class XmlImportError(ValueError):
    def __init__(self, line: int, column: int, reason: str):
        super().__init__(f"line {line}, column {column}: {reason}")
        self.line = line
        self.column = column


def is_xml_name(label) -> bool:
    return isinstance(label, str) and _NAME_RE.fullmatch(label) is not None


def parse_fragment(text: str) -> ET.Element:
    """Parse a document or a fragment with several top-level elements.

    The result is a synthetic wrapper element holding the top-level nodes.
    """
    m = _DECL_RE.match(text)
    if m:
        # keep line/column numbers stable
        text = re.sub(r"[^\n]", " ", m.group(0)) + text[m.end():]
    try:
        return ET.fromstring(_WRAP_OPEN + text + _WRAP_CLOSE)
    except ET.ParseError as exc:
        line, col = exc.position
        if line == 1:
            col = max(0, col - len(_WRAP_OPEN))
        reason = str(exc).split(":")[0]
        raise XmlImportError(line, col, reason) from None


def _visit(engine: SiteEngine, parent: Id, el: ET.Element, out: List[Request]) -> None:
    def put(label: str, under: Id) -> Id:
        add = engine.insert(under)
        out.append(add)
        out.append(engine.relabel(add.stamp, label))
        return add.stamp

    def text(chunk, under: Id) -> None:
        if chunk is not None and chunk.strip():
            put(chunk.strip(), under)

    me = put(el.tag, parent)
    for name, value in el.attrib.items():
        put(f"@{name}={value}", me)
    text(el.text, me)
    for child in el:
        _visit(engine, me, child, out)
        text(child.tail, me)


def import_xml(text: str, site: int = 1) -> Tuple[Tree, List[Request]]:
    """Build a tree for ``text`` as edits of a single site.

    Returns the tree and the requests that reproduce it on any replica.
    """
    wrapper = parse_fragment(text)
    engine = SiteEngine(site)
    requests: List[Request] = []
    if wrapper.text and wrapper.text.strip():
        add = engine.insert(ROOT_ID)
        requests += [add, engine.relabel(add.stamp, wrapper.text.strip())]
    for el in wrapper:
        _visit(engine, ROOT_ID, el, requests)
        if el.tail and el.tail.strip():
            add = engine.insert(ROOT_ID)
            requests += [add, engine.relabel(add.stamp, el.tail.strip())]
    return engine.tree, requests


def _attribute(edge: Edge):
    label = edge.label.text
    if edge.children or not isinstance(label, str) or not label.startswith("@"):
        return None
    name, eq, value = label[1:].partition("=")
    if not eq or not is_xml_name(name):
        return None
    return name, value


def _render(edge: Edge, tree: Tree, depth: int, lines: List[str], indent: str) -> None:
    pad = indent * depth
    label = edge.label.text
    kids = edge.sorted_children()
    if is_xml_name(label) or label is NO_VALUE or kids:
        if label is NO_VALUE:
            head = "_pending"
        elif is_xml_name(label):
            head = label
        else:
            head = f"_node label={quoteattr(label)}"
        tag = head.split(" ")[0]
        attrs, content = [], []
        for k in kids:
            a = _attribute(k)
            if a is None:
                content.append(k)
            else:
                attrs.append(f" {a[0]}={quoteattr(a[1])}")
        open_tag = f"<{head}{''.join(attrs)}"
        if not content:
            lines.append(f"{pad}{open_tag}/>")
        elif len(content) == 1 and not content[0].children and not (
            is_xml_name(content[0].label.text) or content[0].label.text is NO_VALUE
        ):
            lines.append(f"{pad}{open_tag}>{escape(content[0].label.text)}</{tag}>")
        else:
            lines.append(f"{pad}{open_tag}>")
            for k in content:
                _render(k, tree, depth + 1, lines, indent)
            lines.append(f"{pad}</{tag}>")
    else:
        lines.append(pad + escape(label))


def export_xml(tree: Tree, mode: str = "pretty", indent: str = "  ") -> str:
    if mode == "canonical":
        return canonical_form(tree)
    if mode != "pretty":
        raise ValueError(f"unknown export mode {mode!r}")
    lines: List[str] = []
    for edge in tree.root.sorted_children():
        _render(edge, tree, 0, lines, indent)
    return "".join(line + "\n" for line in lines)


def normalized(text: str):
    """Whitespace-insensitive structural form of an XML fragment."""

    def norm_text(chunk):
        return " ".join(chunk.split()) if chunk else ""

    def walk(el):
        content = []
        t = norm_text(el.text)
        if t:
            content.append(t)
        for child in el:
            content.append(walk(child))
            t = norm_text(child.tail)
            if t:
                content.append(t)
        return (el.tag, tuple(el.attrib.items()), tuple(content))

    return walk(parse_fragment(text))[2]

"""Line-oriented JSON encoding of requests.

One request per line, fields in a fixed order::

    {"v":1,"op":"add","origin":2,"count":7,"parent":"0:0","id":"2:7","pos":"__#2.7"}
    {"v":1,"op":"del","origin":2,"count":8,"target":"2:7"}
    {"v":1,"op":"chlab","origin":2,"count":9,"target":"2:7","dep":5,"text":"Abstract"}

``id`` (for add) and the implicit setter (for chlab) must equal
``origin:count``.
"""
from __future__ import annotations

import io
import json
from typing import IO, Iterable, Iterator, List, Union

from .engine import MalformedRequest, Request, validate_request
from .identity import Id
from .tree import Add, ChLab, Del

VERSION = 1


class WireError(ValueError):
    def __init__(self, offset: int, reason: str):
        super().__init__(f"byte {offset}: {reason}")
        self.offset = offset
        self.reason = reason


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def encode_request(r: Request) -> bytes:
    op = r.op
    head = f'{{"v":{VERSION},"op":'
    if isinstance(op, Add):
        body = (
            f'"add","origin":{r.origin},"count":{r.count},'
            f'"parent":"{op.parent}","id":"{op.new}","pos":{_dumps(op.pos)}}}'
        )
    elif isinstance(op, Del):
        body = f'"del","origin":{r.origin},"count":{r.count},"target":"{op.target}"}}'
    elif isinstance(op, ChLab):
        body = (
            f'"chlab","origin":{r.origin},"count":{r.count},"target":"{op.target}",'
            f'"dep":{op.dep},"text":{_dumps(op.text)}}}'
        )
    else:
        raise TypeError(f"not an operation: {op!r}")
    return (head + body).encode("utf-8")


_FIELDS = {
    "add": ("v", "op", "origin", "count", "parent", "id", "pos"),
    "del": ("v", "op", "origin", "count", "target"),
    "chlab": ("v", "op", "origin", "count", "target", "dep", "text"),
}


def decode_request(data: Union[bytes, str]) -> Request:
    raw = data.encode("utf-8") if isinstance(data, str) else bytes(data)
    raw = raw.rstrip(b"\r\n")

    def where(key: str) -> int:
        at = raw.find(f'"{key}":'.encode())
        return max(at, 0)

    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise WireError(exc.start, "invalid UTF-8") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise WireError(offset, exc.msg) from None
    if not isinstance(obj, dict):
        raise WireError(0, "request is not a JSON object")
    if obj.get("v") != VERSION:
        raise WireError(where("v"), f"unsupported version {obj.get('v')!r}")
    kind = obj.get("op")
    if kind not in _FIELDS:
        raise WireError(where("op"), f"unknown op kind {kind!r}")
    expected = _FIELDS[kind]
    if tuple(obj) != expected:
        raise WireError(0, f"fields must be exactly {', '.join(expected)} in that order")

    def natural(key: str) -> int:
        v = obj[key]
        if type(v) is not int or v < 0:
            raise WireError(where(key), f"{key} must be a natural number")
        return v

    def ident(key: str) -> Id:
        v = obj[key]
        if not isinstance(v, str):
            raise WireError(where(key), f"{key} must be a string 'site:count'")
        try:
            return Id.parse(v)
        except ValueError:
            raise WireError(where(key), f"malformed id {v!r}") from None

    def string(key: str) -> str:
        v = obj[key]
        if not isinstance(v, str):
            raise WireError(where(key), f"{key} must be a string")
        return v

    origin, count = natural("origin"), natural("count")
    stamp = Id(origin, count)
    if kind == "add":
        new = ident("id")
        if new != stamp:
            raise WireError(where("id"), f"id {new} differs from origin:count {stamp}")
        parent = ident("parent")
        if parent == new:
            raise WireError(where("parent"), "parent equals the new id")
        op = Add(parent, new, string("pos"))
    elif kind == "del":
        op = Del(ident("target"))
    else:
        op = ChLab(ident("target"), stamp, natural("dep"), string("text"))
    r = Request(op, origin, count)
    try:
        validate_request(r)
    except MalformedRequest as exc:
        raise WireError(0, str(exc)) from None
    return r


def write_log(requests: Iterable[Request], fp: IO[bytes]) -> None:
    for r in requests:
        fp.write(encode_request(r) + b"\n")


def read_log(fp: IO[bytes]) -> Iterator[Request]:
    offset = 0
    for line in fp:
        if line.strip():
            try:
                yield decode_request(line)
            except WireError as exc:
                raise WireError(offset + exc.offset, exc.reason) from None
        offset += len(line)


def dumps_log(requests: Iterable[Request]) -> bytes:
    return b"".join(encode_request(r) + b"\n" for r in requests)


def loads_log(data: bytes) -> List[Request]:
    return list(read_log(io.BytesIO(data)))

"""Source locations, diagnostics and a small regex tokenizer shared by the
Verilog and firmware front ends."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class Loc:
    file: str = "<input>"
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


NOLOC = Loc()


class SourceError(Exception):
    """An error tied to a position in some input file.

    ``str(err)`` renders as ``file:line:col: message``.
    """

    def __init__(self, message: str, loc: Loc | None = None):
        super().__init__(message)
        self.message = message
        self.loc = loc or NOLOC

    def __str__(self) -> str:
        return f"{self.loc}: {self.message}"


class UnsupportedConstruct(SourceError):
    def __init__(self, construct: str, loc: Loc | None = None, detail: str = ""):
        msg = f"unsupported construct: {construct}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg, loc)
        self.construct = construct


@dataclass(frozen=True)
class Token:
    kind: str   # 'id', 'num', 'str', 'op', 'kw', 'sys', 'eof'
    text: str
    loc: Loc

    def __repr__(self) -> str:
        return f"Token({self.kind},{self.text!r}@{self.loc.line}:{self.loc.col})"


class Tokenizer:
    """Turns text into tokens given an ordered list of (kind, regex) rules.

    Rules whose kind is ``None`` are skipped (whitespace, comments).
    Identifiers found in ``keywords`` come back with kind ``'kw'``.
    """

    def __init__(self, rules: Iterable[tuple[str | None, str]], keywords: Iterable[str] = ()):
        parts = []
        self._kinds: dict[str, str | None] = {}
        for i, (kind, rx) in enumerate(rules):
            g = f"g{i}"
            parts.append(f"(?P<{g}>{rx})")
            self._kinds[g] = kind
        self._rx = re.compile("|".join(parts), re.S)
        self.keywords = frozenset(keywords)

    def tokenize(self, text: str, filename: str = "<input>") -> list[Token]:
        out: list[Token] = []
        pos, line, line_start = 0, 1, 0
        n = len(text)
        rx = self._rx
        while pos < n:
            m = rx.match(text, pos)
            if m is None:
                col = pos - line_start + 1
                raise SourceError(f"unexpected character {text[pos]!r}", Loc(filename, line, col))
            kind = self._kinds[m.lastgroup]
            lexeme = m.group()
            if kind is not None:
                loc = Loc(filename, line, pos - line_start + 1)
                if kind == "id" and lexeme in self.keywords:
                    kind = "kw"
                out.append(Token(kind, lexeme, loc))
            nl = lexeme.count("\n")
            if nl:
                line += nl
                line_start = pos + lexeme.rindex("\n") + 1
            pos = m.end()
        out.append(Token("eof", "", Loc(filename, line, pos - line_start + 1)))
        return out


class TokenStream:
    """Cursor over a token list with the usual peek/accept/expect helpers."""

    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text in texts

    def at_kind(self, kind: str) -> bool:
        return self.tok.kind == kind

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def accept(self, *texts: str) -> Token | None:
        if self.at(*texts):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected '{text}'")
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.error(f"expected {what}")
        return self.next()

    def error(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise SourceError(f"syntax error: {msg}, found {found}", t.loc)

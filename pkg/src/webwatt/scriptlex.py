"""Lexical scanner for scripts.

Splits source into comments, string/template/regex literals, identifiers,
numbers, and punctuators. This is deliberately not a full ECMAScript lexer:
it exists so that pattern counting and whitespace stripping never look
inside literals or comments, and so that a minified emission re-lexes to
the identical token stream.
"""

from __future__ import annotations

from dataclasses import dataclass

_IDENT_START = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_$"
)
_DIGITS = frozenset("0123456789")
_IDENT_CHARS = _IDENT_START | _DIGITS

# Longest-match punctuator list; order by length so greedy scan is stable.
_PUNCTUATORS = sorted(
    [
        ">>>=", "===", "!==", ">>>", "**=", "<<=", ">>=", "...", "&&=", "||=",
        "??=", "==", "!=", "<=", ">=", "&&", "||", "??", "?.", "=>", "**",
        "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<",
        ">>", "{", "}", "(", ")", "[", "]", ";", ",", "<", ">", "+", "-",
        "*", "/", "%", "&", "|", "^", "!", "~", "?", ":", "=", ".", "@", "#",
    ],
    key=len,
    reverse=True,
)

# A "/" after one of these keywords starts a regex, not division.
_REGEX_PRECEDING_KEYWORDS = frozenset(
    "return typeof instanceof in of new delete void throw case do else yield await".split()
)


@dataclass
class Token:
    kind: str  # ident | num | str | template | regex | punct | comment
    text: str
    newline_before: bool = False
    pos: int = 0  # offset of the first character in the source


def tokenize(source: str) -> list[Token]:
    """Tokenize tolerantly; unterminated literals run to end of input."""
    tokens: list[Token] = []
    i = 0
    n = len(source)
    newline_pending = False
    prev_significant: Token | None = None

    def emit(kind: str, text: str, pos: int) -> None:
        nonlocal newline_pending, prev_significant
        token = Token(kind, text, newline_pending, pos)
        tokens.append(token)
        newline_pending = False
        if kind != "comment":
            prev_significant = token

    while i < n:
        c = source[i]
        if c in " \t\r\f\v":
            i += 1
            continue
        if c == "\n":
            newline_pending = True
            i += 1
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "/":
            end = source.find("\n", i)
            end = n if end == -1 else end
            emit("comment", source[i:end], i)
            i = end
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "*":
            end = source.find("*/", i + 2)
            if end == -1:
                emit("comment", source[i:], i)
                i = n
            else:
                emit("comment", source[i : end + 2], i)
                i = end + 2
            continue
        if c in "\"'":
            j = _scan_string(source, i, c)
            emit("str", source[i:j], i)
            i = j
            continue
        if c == "`":
            j = _scan_template(source, i)
            emit("template", source[i:j], i)
            i = j
            continue
        if c == "/" and _regex_allowed(prev_significant):
            j = _scan_regex(source, i)
            if j > i + 1:
                emit("regex", source[i:j], i)
                i = j
                continue
        if c in _IDENT_START:
            j = i + 1
            while j < n and source[j] in _IDENT_CHARS:
                j += 1
            emit("ident", source[i:j], i)
            i = j
            continue
        if c in _DIGITS or (c == "." and i + 1 < n and source[i + 1] in _DIGITS):
            j = _scan_number(source, i)
            emit("num", source[i:j], i)
            i = j
            continue
        for punct in _PUNCTUATORS:
            if source.startswith(punct, i):
                emit("punct", punct, i)
                i += len(punct)
                break
        else:
            # Unknown character (unicode identifier, stray byte): keep it as
            # an opaque single-character token.
            emit("ident" if not c.isspace() else "punct", c, i)
            i += 1
    return tokens


def _regex_allowed(prev: Token | None) -> bool:
    if prev is None:
        return True
    if prev.kind == "punct":
        return prev.text not in (")", "]", "}", "++", "--")
    if prev.kind == "ident":
        return prev.text in _REGEX_PRECEDING_KEYWORDS
    return False


def _scan_string(source: str, i: int, quote: str) -> int:
    j = i + 1
    n = len(source)
    while j < n:
        c = source[j]
        if c == "\\":
            j += 2
            continue
        if c == quote:
            return j + 1
        if c == "\n":
            return j  # unterminated; do not swallow the line break
        j += 1
    return n


def _scan_template(source: str, i: int) -> int:
    j = i + 1
    n = len(source)
    depth = 0  # ${ } nesting
    while j < n:
        c = source[j]
        if c == "\\":
            j += 2
            continue
        if depth == 0 and c == "`":
            return j + 1
        if c == "$" and j + 1 < n and source[j + 1] == "{":
            depth += 1
            j += 2
            continue
        if depth > 0:
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
            elif c in "\"'":
                j = _scan_string(source, j, c)
                continue
        j += 1
    return n


def _scan_regex(source: str, i: int) -> int:
    j = i + 1
    n = len(source)
    in_class = False
    while j < n:
        c = source[j]
        if c == "\\":
            j += 2
            continue
        if c == "\n":
            return i + 1  # not a regex after all
        if in_class:
            if c == "]":
                in_class = False
        elif c == "[":
            in_class = True
        elif c == "/":
            j += 1
            while j < n and source[j] in _IDENT_CHARS:
                j += 1
            return j
        j += 1
    return i + 1


def _scan_number(source: str, i: int) -> int:
    n = len(source)
    if source.startswith(("0x", "0X", "0b", "0B", "0o", "0O"), i):
        j = i + 2
        while j < n and source[j] in _IDENT_CHARS:
            j += 1
        return j
    j = i
    while j < n and source[j] in _DIGITS:
        j += 1
    if j < n and source[j] == ".":
        j += 1
        while j < n and source[j] in _DIGITS:
            j += 1
    if j < n and source[j] in "eE":
        k = j + 1
        if k < n and source[k] in "+-":
            k += 1
        if k < n and source[k] in _DIGITS:
            j = k
            while j < n and source[j] in _DIGITS:
                j += 1
    if j < n and source[j] == "n":  # BigInt suffix
        j += 1
    return j


def significant(tokens: list[Token]) -> list[Token]:
    return [t for t in tokens if t.kind != "comment"]


def _longest_punct_prefix(s: str) -> str:
    for punct in _PUNCTUATORS:
        if s.startswith(punct):
            return punct
    return s[:1]


def _needs_space(prev: Token, cur: Token) -> bool:
    """True when concatenating the two tokens would re-lex differently."""
    a, b = prev.text[-1], cur.text[0]
    if a in _IDENT_CHARS and b in _IDENT_CHARS:
        return True
    if a == "/" and b in "/*":
        return True  # would start a comment
    if prev.kind == "regex" and b in _IDENT_CHARS:
        return True  # would be absorbed as regex flags
    if prev.kind == "punct" and cur.kind == "punct":
        if _longest_punct_prefix(prev.text + cur.text) != prev.text:
            return True  # e.g. "=" + ">" would lex as "=>"
        if a == "." and b == ".":
            return True  # a run of dots could form "..."
        return False
    if prev.kind == "num" and b == ".":
        return True
    if a == "." and b in _DIGITS:
        return True
    if prev.text == "?" and b == ".":
        return True
    return False


def emit_min(tokens: list[Token]) -> str:
    """Re-emit tokens with minimal separators.

    Original line breaks between tokens survive as single newlines so that
    automatic semicolon insertion behaves identically; everything else is
    joined with at most one space.
    """
    out: list[str] = []
    prev: Token | None = None
    for token in tokens:
        if token.kind == "comment":
            continue
        if prev is not None:
            if token.newline_before:
                out.append("\n")
            elif _needs_space(prev, token):
                out.append(" ")
        out.append(token.text)
        prev = token
    return "".join(out)

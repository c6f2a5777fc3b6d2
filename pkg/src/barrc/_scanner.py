"""Raw lexical scan: the hot kernel.

Pure Python, but written so the identical source also compiles with
Cython (setup.py build_ext) as barrc._scanner_c; barrc.lexer prefers the
compiled copy when importable.  The scanner walks latin-1 text (one char
per byte) and yields (kind, start, end) integer triples covering every
byte exactly once, plus (error_code, offset) records.  Backslash-newline
inside comments, strings, identifiers and numbers stays inside the item;
between items it becomes a SPLICE triple.
"""

COMPILED = False

SPACES = 1
LINE_COMMENT = 2
BLOCK_COMMENT = 3
NEWLINE = 4
FORMFEED = 5
OTHER_CONTROL = 6
SPLICE = 7
IDENT = 10
NUMBER = 11
CHAR_CONST = 12
STRING = 13
PUNCT = 14

ERR_BLOCK_COMMENT = 1
ERR_STRING = 2
ERR_CHAR = 3

_PUNCT3 = ("<<=", ">>=", "...")
_PUNCT2 = (
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##",
    "<:", ":>", "<%", "%>", "%:",
)


def _terminator_end(text, i, n):
    """End offset of a newline sequence starting at i, or i if none."""
    if i >= n:
        return i
    c = text[i]
    if c == "\n":
        return i + 1
    if c == "\r":
        if i + 1 < n and text[i + 1] == "\n":
            return i + 2
        return i + 1
    return i


def _is_word(c):
    return c == "_" or ("a" <= c <= "z") or ("A" <= c <= "Z") or ("0" <= c <= "9")


def _is_digit(c):
    return "0" <= c <= "9"


def scan(text):
    """Return (items, errors); items are (kind, start, end) triples."""
    n = len(text)
    items = []
    errors = []
    i = 0
    while i < n:
        c = text[i]
        if c == " " or c == "\t":
            j = i + 1
            while j < n and (text[j] == " " or text[j] == "\t"):
                j += 1
            items.append((SPACES, i, j))
            i = j
        elif c == "\n" or c == "\r":
            j = _terminator_end(text, i, n)
            items.append((NEWLINE, i, j))
            i = j
        elif c == "\f":
            items.append((FORMFEED, i, i + 1))
            i += 1
        elif c == "\\" and _terminator_end(text, i + 1, n) > i + 1:
            j = _terminator_end(text, i + 1, n)
            items.append((SPLICE, i, j))
            i = j
        elif c == "/" and i + 1 < n and text[i + 1] == "/":
            j = i + 2
            while j < n:
                cj = text[j]
                if cj == "\n" or cj == "\r":
                    if text[j - 1] == "\\":
                        j = _terminator_end(text, j, n)
                        continue
                    break
                j += 1
            items.append((LINE_COMMENT, i, j))
            i = j
        elif c == "/" and i + 1 < n and text[i + 1] == "*":
            k = text.find("*/", i + 2)
            if k < 0:
                errors.append((ERR_BLOCK_COMMENT, i))
                items.append((BLOCK_COMMENT, i, n))
                i = n
            else:
                items.append((BLOCK_COMMENT, i, k + 2))
                i = k + 2
        elif c == "_" or ("a" <= c <= "z") or ("A" <= c <= "Z"):
            j = i + 1
            while j < n:
                if _is_word(text[j]):
                    j += 1
                elif text[j] == "\\":
                    k = _terminator_end(text, j + 1, n)
                    if k > j + 1 and k < n and _is_word(text[k]):
                        j = k
                    else:
                        break
                else:
                    break
            if j == i + 1 and text[i] == "L" and j < n and (text[j] == '"' or text[j] == "'"):
                i = _scan_quoted(text, i, j, n, items, errors)
            else:
                items.append((IDENT, i, j))
                i = j
        elif _is_digit(c) or (c == "." and i + 1 < n and _is_digit(text[i + 1])):
            j = i + 1
            while j < n:
                cj = text[j]
                if _is_word(cj) or cj == ".":
                    j += 1
                    if (cj == "e" or cj == "E" or cj == "p" or cj == "P") and j < n and (
                        text[j] == "+" or text[j] == "-"
                    ):
                        j += 1
                elif cj == "\\":
                    k = _terminator_end(text, j + 1, n)
                    if k > j + 1 and k < n and (_is_word(text[k]) or text[k] == "."):
                        j = k
                    else:
                        break
                else:
                    break
            items.append((NUMBER, i, j))
            i = j
        elif c == '"' or c == "'":
            i = _scan_quoted(text, i, i, n, items, errors)
        else:
            o = ord(c)
            if o < 32 or o == 127:
                items.append((OTHER_CONTROL, i, i + 1))
                i += 1
            else:
                if text[i : i + 4] == "%:%:":
                    items.append((PUNCT, i, i + 4))
                    i += 4
                    continue
                if text[i : i + 3] in _PUNCT3:
                    items.append((PUNCT, i, i + 3))
                    i += 3
                    continue
                two = text[i : i + 2]
                if two in _PUNCT2:
                    items.append((PUNCT, i, i + 2))
                    i += 2
                    continue
                items.append((PUNCT, i, i + 1))
                i += 1
    return items, errors


def _scan_quoted(text, start, qpos, n, items, errors):
    """Scan a string/char constant from its quote at qpos; start may be an
    L prefix one character earlier.  Returns the resume offset."""
    quote = text[qpos]
    kind = STRING if quote == '"' else CHAR_CONST
    err = ERR_STRING if quote == '"' else ERR_CHAR
    j = qpos + 1
    terminated = False
    while j < n:
        cj = text[j]
        if cj == "\\":
            k = _terminator_end(text, j + 1, n)
            if k > j + 1:
                j = k
            elif j + 1 < n:
                j += 2
            else:
                j += 1
        elif cj == quote:
            j += 1
            terminated = True
            break
        elif cj == "\n" or cj == "\r":
            break
        else:
            j += 1
    if not terminated:
        errors.append((err, start))
    items.append((kind, start, j))
    return j

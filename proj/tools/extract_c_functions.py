#!/usr/bin/env python3
"""Extract top-level C function definitions from a source tree into JSONL.

Used to build the real-code fixture under tests/data. Labels are pseudo
labels (parity of a stable hash of the function text): the fixture exercises
transformations and naturalness scoring, not detection quality.
"""
import argparse
import hashlib
import json
import os
import re

IDENT = re.compile(r"[A-Za-z_]\w*")
CONTROL = {"if", "for", "while", "switch", "return", "sizeof"}


def mask(src):
    """Blank out comments, string/char literals and directives, keeping offsets."""
    out = list(src)
    i, n = 0, len(src)
    line_start = True
    while i < n:
        c = src[i]
        if line_start and c == "#":
            j = i
            while j < n and src[j] != "\n":
                if src[j] == "\\" and j + 1 < n and src[j + 1] == "\n":
                    j += 2
                    continue
                if src.startswith("/*", j):
                    k = src.find("*/", j + 2)
                    j = n if k < 0 else k + 2
                    continue
                j += 1
            for k in range(i, j):
                if out[k] != "\n":
                    out[k] = " "
            i = j
            continue
        if src.startswith("//", i):
            j = src.find("\n", i)
            j = n if j < 0 else j
            for k in range(i, j):
                out[k] = " "
            i = j
            continue
        if src.startswith("/*", i):
            j = src.find("*/", i + 2)
            j = n if j < 0 else j + 2
            for k in range(i, j):
                if out[k] != "\n":
                    out[k] = " "
            i = j
            continue
        if c in "\"'":
            j = i + 1
            while j < n and src[j] != c:
                j += 2 if src[j] == "\\" else 1
            for k in range(i + 1, min(j, n)):
                out[k] = " "
            i = j + 1
            line_start = False
            continue
        if c == "\n":
            line_start = True
        elif not c.isspace():
            line_start = False
        i += 1
    return "".join(out)


def functions(src):
    m = mask(src)
    depth = 0
    boundary = 0
    i = 0
    n = len(m)
    while i < n:
        c = m[i]
        if c == "{" and depth == 0:
            head = m[boundary:i].rstrip()
            depth = 1
            j = i + 1
            while j < n and depth:
                if m[j] == "{":
                    depth += 1
                elif m[j] == "}":
                    depth -= 1
                j += 1
            if head.endswith(")"):
                start = boundary
                while start < i and src[start].isspace():
                    start += 1
                words = IDENT.findall(head.split("(")[0])
                if words and words[-1] not in CONTROL and "=" not in head:
                    yield words[-1], src[start:j]
            boundary = j
            i = j
            continue
        if c in ";}" and depth == 0:
            boundary = i + 1
        elif c == "\n" and depth == 0 and m[boundary:i].strip() == "":
            boundary = i + 1
        i += 1


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("root")
    ap.add_argument("--out", required=True)
    ap.add_argument("--project", default="aws-lc")
    ap.add_argument("--limit", type=int, default=800)
    ap.add_argument("--max-chars", type=int, default=3000)
    args = ap.parse_args()
    rows = []
    seen = set()
    for dirpath, _, files in sorted(os.walk(args.root)):
        for f in sorted(files):
            if not f.endswith(".c") or "test" in f:
                continue
            path = os.path.join(dirpath, f)
            with open(path, encoding="utf-8", errors="replace") as fh:
                src = fh.read()
            for name, text in functions(src):
                if len(text) > args.max_chars or text in seen:
                    continue
                seen.add(text)
                rel = os.path.relpath(path, args.root)
                digest = hashlib.sha256(text.encode()).digest()
                rows.append({
                    "id": f"{rel}:{name}",
                    "func": text,
                    "target": digest[0] & 1,
                    "project": args.project,
                })
    # keep a spread across files rather than the first N of the walk
    step = max(1, len(rows) // args.limit)
    rows = rows[::step][: args.limit]
    ids = set()
    with open(args.out, "w", encoding="utf-8") as out:
        for r in rows:
            if r["id"] in ids:
                r["id"] += "#" + hashlib.sha256(r["func"].encode()).hexdigest()[:8]
            ids.add(r["id"])
            out.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()

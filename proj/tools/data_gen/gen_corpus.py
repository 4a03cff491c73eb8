"""Extract the desk corpus: standalone top-level functions and classes from
the CPython standard library, one per file.

    python3 tools/data_gen/gen_corpus.py tests/data/corpus [count]

Selection is deterministic for a given interpreter install. The output is
committed, so regenerating is only needed to change the corpus.
"""
import ast
import os
import random
import sys
import sysconfig

SKIP_DIRS = {"test", "tests", "idlelib", "lib2to3", "site-packages", "dist-packages", "__pycache__",
             "turtledemo", "ensurepip", "pydoc_data", "encodings"}
MIN_LINES, MAX_LINES = 6, 60


def candidates(stdlib):
    for dirpath, dirnames, filenames in os.walk(stdlib):
        dirnames[:] = sorted(d for d in dirnames if d not in SKIP_DIRS)
        for fn in sorted(filenames):
            if not fn.endswith(".py"):
                continue
            path = os.path.join(dirpath, fn)
            try:
                with open(path, encoding="utf-8") as f:
                    src = f.read()
                tree = ast.parse(src)
            except (SyntaxError, UnicodeDecodeError, ValueError):
                continue
            if "\\N{" in src:
                continue
            lines = src.splitlines()
            mod = os.path.relpath(path, stdlib)[:-3].replace(os.sep, ".")
            for node in tree.body:
                if not isinstance(node, (ast.FunctionDef, ast.ClassDef, ast.AsyncFunctionDef)):
                    continue
                start = min([d.lineno for d in node.decorator_list] + [node.lineno])
                seg = "\n".join(lines[start - 1:node.end_lineno]) + "\n"
                n = node.end_lineno - start + 1
                if not MIN_LINES <= n <= MAX_LINES:
                    continue
                try:
                    sub = ast.parse(seg)
                except SyntaxError:
                    continue
                if any(isinstance(x, getattr(ast, "Match", ())) for x in ast.walk(sub)):
                    continue
                # 3.8 grammar only: no parenthesized with-items
                if any(isinstance(x, (ast.With, ast.AsyncWith)) and len(x.items) > 1 for x in ast.walk(sub)):
                    continue
                yield mod, node.name, seg


def main():
    out = sys.argv[1]
    count = int(sys.argv[2]) if len(sys.argv) > 2 else 600
    stdlib = sysconfig.get_paths()["stdlib"]
    seen = set()
    pool = []
    for mod, name, seg in candidates(stdlib):
        if seg in seen:
            continue
        seen.add(seg)
        pool.append((mod, name, seg))
    rng = random.Random(20240611)
    picked = sorted(rng.sample(pool, count))
    os.makedirs(out, exist_ok=True)
    for i, (mod, name, seg) in enumerate(picked):
        fn = "%04d_%s_%s.py" % (i, mod.replace(".", "_"), name)
        with open(os.path.join(out, fn), "w", encoding="utf-8") as f:
            f.write(seg)
    with open(os.path.join(out, "SOURCE.txt"), "w") as f:
        f.write("Top-level definitions extracted from the CPython %s standard library\n"
                "(Python Software Foundation License) by tools/data_gen/gen_corpus.py.\n"
                % sys.version.split()[0])
    print("%d candidates, wrote %d files" % (len(pool), len(picked)))


if __name__ == "__main__":
    main()

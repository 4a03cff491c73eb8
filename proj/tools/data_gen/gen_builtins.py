"""Regenerates core/data/builtins.txt (run once with CPython 3.10; the output
is committed so builds never depend on the local interpreter)."""

import builtins
import keyword
import sys

DUNDERS = """__init__ __main__ __name__ __str__ __repr__ __len__ __iter__ __next__
__eq__ __ne__ __lt__ __le__ __gt__ __ge__ __hash__ __call__ __getitem__ __setitem__
__delitem__ __contains__ __enter__ __exit__ __add__ __sub__ __mul__ __class__
__dict__ __slots__ __all__ __file__ __doc__ __new__ __bool__""".split()

MODULES = """math os sys re collections itertools functools heapq bisect random string
copy time datetime json typing operator fractions decimal statistics queue threading
io array enum dataclasses abc pathlib subprocess argparse logging unittest""".split()

EXTRA = """randint choice choices shuffle seed sample uniform randrange gauss stdin
stdout stderr readline readlines setrecursionlimit argv exit maxsize getrecursionlimit
path environ getenv listdir exists isfile isdir basename dirname splitext sub match
search fullmatch findall finditer compile split escape itemgetter attrgetter
methodcaller self cls List Dict Set Tuple Optional Union Any Callable Iterable
Iterator Generator Sequence Mapping ast literal_eval""".split()


def main():
    names, seen = [], set()

    def add(n):
        if n not in seen and n.isidentifier():
            seen.add(n)
            names.append(n)

    for n in dir(builtins):
        if not n.startswith("_"):
            add(n)
    for n in ["__import__", "__build_class__", "__debug__"] + DUNDERS:
        add(n)
    for n in keyword.kwlist:
        add(n)
    for t in (str, list, dict, set, tuple, int, float, bytes, complex, object):
        for n in dir(t):
            if not n.startswith("_"):
                add(n)
    for n in MODULES:
        add(n)
    import bisect, collections, functools, heapq, itertools, math, operator
    import random, re, string
    for mod in (math, itertools, functools, heapq, bisect, collections, string,
                random, re, operator):
        for n in getattr(mod, "__all__", dir(mod)):
            # single letters (re.A, math.e) are far more often user variables
            if not n.startswith("_") and len(n) > 1:
                add(n)
    for n in EXTRA:
        add(n)
    out = sys.argv[1] if len(sys.argv) > 1 else "core/data/builtins.txt"
    with open(out, "w") as f:
        f.write("\n".join(names) + "\n")
    print(len(names), "names")


if __name__ == "__main__":
    main()

"""Parser tests: subset acceptance, rejection diagnostics, span round-trips."""

import pytest

from histoagent.interp import ParseError, parse, referenced_imports


VALID_SNIPPETS = [
    "x = 1",
    "x = y = 2",
    "a, b = 1, 2",
    "(a, b), c = (1, 2), 3",
    "xs[0] = 5",
    "d['k'] = 1",
    "x += 1",
    "d['k'] += 2",
    "if x > 0:\n    y = 1\nelif x < 0:\n    y = 2\nelse:\n    y = 3",
    "for i in range(3):\n    print(i)",
    "for k, v in items:\n    print(k, v)",
    "while x < 10:\n    x += 1",
    "while True:\n    break",
    "for i in xs:\n    if i:\n        continue",
    "def f(a, b=2):\n    return a + b",
    "def outer():\n    def inner():\n        return 1\n    return inner()",
    "import math",
    "import math as m",
    "from math import sqrt",
    "from math import sqrt as root",
    "import json\nimport random",
    "try:\n    x = 1 / 0\nexcept Exception as e:\n    print(e)",
    "try:\n    risky()\nexcept:\n    pass",
    "xs = [1, 2, 3]",
    "t = (1, 'a', None)",
    "d = {'a': 1, 2: 'b'}",
    "y = x[1:3]",
    "y = x[::2]",
    "y = x[-1]",
    "s = 'ab' + 'cd' * 2",
    "ok = a < b <= c",
    "ok = x in xs and y not in d or z is None",
    "neg = -x + (not y)",
    "name = obj.name",
    "out = f(1, k=2)",
    "sq = [i * i for i in range(4) if i > 0]",
    "inv = {v: k for k, v in d.items()}",
    "pairs = [(i, j) for i in a for j in b]",
    's = f"{x}"',
    's = f"{x:.2f} and {y!r}"',
    's = "a {}".format(x)',
    "msg = 'part1' + str(2)",
]


@pytest.mark.parametrize("snippet", VALID_SNIPPETS)
def test_valid_snippets_parse(snippet):
    program = parse(snippet)
    assert program.statements()


REJECTED = [
    ("class A:\n    pass", "class definitions"),
    ("f = lambda x: x", "lambda"),
    ("with open('x') as f:\n    pass", "with blocks"),
    ("raise ValueError('x')", "raise statements"),
    ("assert x == 1", "assert statements"),
    ("del x", "del statements"),
    ("def f():\n    global x", "global declarations"),
    ("def f():\n    def g():\n        nonlocal x", "nonlocal declarations"),
    ("async def f():\n    pass", "async constructs"),
    ("def f():\n    yield 1", "generators"),
    ("g = (i for i in x)", "generator expressions"),
    ("s = {i for i in x}", "set comprehensions"),
    ("s = {1, 2}", "set literals"),
    ("y = 1 if x else 2", "conditional expressions"),
    ("if (n := len(x)) > 3:\n    pass", "assignment expressions"),
    ("a, *rest = xs", "starred"),
    ("f(*args)", "starred"),
    ("f(**kw)", "** call arguments"),
    ("match x:\n    case 1:\n        pass", "match statements"),
    ("x: int = 1", "annotated assignments"),
    ("@deco\ndef f():\n    pass", "decorators"),
    ("x = 1 | 2", "bitwise operators"),
    ("x = 1 & 2", "bitwise operators"),
    ("x = 1 ^ 2", "bitwise operators"),
    ("x = 1 << 2", "bitwise operators"),
    ("x = ~1", "bitwise operators"),
    ("x = a @ b", "the @ operator"),
    ("def f():\n    import math", "top level"),
    ("if x:\n    import math", "top level"),
    ("from . import thing", "relative imports"),
    ("from math import *", "wildcard imports"),
    ("try:\n    pass\nexcept ValueError:\n    pass\nexcept KeyError:\n    pass", "exactly one except"),
    ("try:\n    pass\nexcept ValueError:\n    pass\nfinally:\n    pass", "finally"),
    ("try:\n    pass\nexcept ValueError:\n    pass\nelse:\n    pass", "else"),
    ("try:\n    pass\nexcept (ValueError, KeyError):\n    pass", "single exception type"),
    ("while x:\n    pass\nelse:\n    pass", "while/else"),
    ("for i in x:\n    pass\nelse:\n    pass", "for/else"),
    ("xs[1:3] = [1]", "slice assignment"),
    ("obj.attr = 1", "attribute assignment"),
    ("def f(*args):\n    pass", "plain positional parameters"),
    ("def f(**kw):\n    pass", "plain positional parameters"),
    ("def f(a, *, b):\n    pass", "plain positional parameters"),
    ("def f(a: int):\n    pass", "parameter annotations"),
    ("def f() -> int:\n    pass", "return annotations"),
    ("x = b'bytes'", "bytes literals"),
    ("x = 1j", "complex literals"),
    ("x = a[1, 2]", "tuple subscripts"),
    ("d = {**other}", "dict unpacking"),
    ("return 1", "return outside function"),
    ("break", "break outside loop"),
    ("continue", "continue outside loop"),
    ("x = ...", "ellipsis literals"),
]


@pytest.mark.parametrize("snippet,fragment", REJECTED)
def test_rejected_snippets(snippet, fragment):
    with pytest.raises(ParseError) as exc_info:
        parse(snippet)
    assert fragment in exc_info.value.message


def test_rejection_reports_position():
    with pytest.raises(ParseError) as exc_info:
        parse("x = 1\ny = 2\nclass A:\n    pass")
    err = exc_info.value
    assert err.line == 3
    assert err.column == 1


def test_nested_rejection_line():
    with pytest.raises(ParseError) as exc_info:
        parse("def f(a):\n    if a:\n        s = {1, 2}\n    return a")
    assert exc_info.value.line == 3


def test_syntax_error_becomes_parse_error():
    with pytest.raises(ParseError) as exc_info:
        parse("def f(:\n    pass")
    assert exc_info.value.line == 1


def test_break_allowed_inside_loop_in_function():
    parse("def f(xs):\n    for x in xs:\n        break\n    return 1")


def test_return_inside_loop_inside_function():
    parse("def f(xs):\n    for x in xs:\n        return x")


def test_break_in_function_outside_loop_rejected():
    # the function body resets loop context even when the def sits in a loop
    with pytest.raises(ParseError):
        parse("for i in x:\n    def f():\n        break")


def test_source_segment_round_trip():
    source = "x = 1 + 2\nif x:\n    print(x)\n"
    program = parse(source)
    first, second = program.statements()
    assert program.source_segment(first) == "x = 1 + 2"
    assert program.source_segment(second) == "if x:\n    print(x)"


def test_referenced_imports_order_and_dedup():
    program = parse(
        "import json\nimport math\nfrom math import sqrt\nimport random as r\nimport json"
    )
    assert referenced_imports(program) == ["json", "math", "random"]


def test_referenced_imports_dotted_root():
    program = parse("import os.path")
    assert referenced_imports(program) == ["os"]


def test_fstring_with_nested_spec_parses():
    parse('s = f"{value:{width}.2f}"')


def test_chained_comparison_and_call_in_fstring():
    parse('print(f"count={len(xs)} ok={0 < x < 9}")')


def test_empty_source_parses():
    assert parse("").statements() == []


def test_comment_only_source():
    assert parse("# just a comment\n").statements() == []

"""Regenerates the JSON Lines fixtures in this directory.

    python3 make_fixtures.py

- govern_triplets.jsonl: 100 input records for end-to-end governance
- tau_threads.jsonl: 20 labeled purification cases
- planted_cards.jsonl, planted_queries.jsonl: 20 cards and the issue texts
  that should retrieve them
"""

import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
EPOCH = "2024-01-01T00:00:00Z"


def comment(body, role="contributor", minute=0):
    return {"author_role": role, "body": body, "timestamp": f"2024-01-01T00:{minute % 60:02}:00Z"}


def hunk(start, before, removed, added, after):
    old = [" " + l for l in before] + ["-" + l for l in removed] + [" " + l for l in after]
    new_len = len(before) + len(added) + len(after)
    old_len = len(before) + len(removed) + len(after)
    body = [" " + l for l in before] + ["-" + l for l in removed] + ["+" + l for l in added] + [" " + l for l in after]
    return f"@@ -{start},{old_len} +{start},{new_len} @@\n" + "\n".join(body) + "\n"


def file_patch(path, hunks, git=False):
    head = f"diff --git a/{path} b/{path}\nindex 3b18e51..a9c4d2f 100644\n" if git else ""
    return head + f"--- a/{path}\n+++ b/{path}\n" + "".join(hunks)


def new_file_patch(path, lines):
    body = "".join("+" + l + "\n" for l in lines)
    return (
        f"diff --git a/{path} b/{path}\nnew file mode 100644\nindex 0000000..e69de29\n"
        f"--- /dev/null\n+++ b/{path}\n@@ -0,0 +1,{len(lines)} @@\n" + body
    )


def triplet(repo, issue_no, title, body, comments, pr_no, patch, merged=True, refs=None, discussion=None, pr_title=""):
    return {
        "repo": repo,
        "issue": {"number": issue_no, "title": title, "body": body, "comments": comments},
        "pr": {
            "number": pr_no,
            "merged": merged,
            "linked_issue_refs": [issue_no] if refs is None else refs,
            "discussion": discussion or [],
            "title": pr_title or f"Fix #{issue_no}",
        },
        "patch_text": patch,
    }


# --- scenario templates -------------------------------------------------------

PY_MODULES = ["config", "loader", "session", "parser", "cache", "router", "schema", "pool", "export", "auth"]
PY_KEYS = ["timeout", "retries", "encoding", "base_url", "region", "charset", "locale", "proxy", "token", "mode"]
JAVA_CLASSES = [f"{n}{k}" for n in ("Order", "Invoice", "User", "Report", "Token", "Cart", "Payment", "Account")
                for k in ("Service", "Mapper", "Repository", "Controller")]
RUST_FNS = [f"{v}_{n}" for v in ("parse", "decode", "read", "split", "merge", "scan")
            for n in ("header", "frame", "chunk", "path", "ranges", "record")]
GO_FUNCS = [f"{v}{n}" for v in ("handle", "flush", "resolve", "load", "watch", "sync")
            for n in ("Upload", "Buffer", "Peer", "Manifest", "Events", "Lease")]
JS_FNS = [f"{v}{n}" for v in ("format", "render", "merge", "parse", "serialize", "normalize")
          for n in ("Date", "Row", "Props", "Query", "Form", "Cell")]
ORGS = ["acme", "northwind", "globex", "initech", "umbrella", "hooli", "vandelay", "stark", "wayne", "tyrell"]
PROJECTS = ["widgets", "pipeline", "ledger", "atlas", "beacon", "cobalt", "drift", "ember", "flux", "grove"]

CHATTER = [
    "thanks for the report!",
    "+1, same here",
    "any update on this?",
    "Bumping this, we hit it in production too.",
    "Thanks, I will take a look this week.",
    "Closing the loop: a fix is in review.",
    "Is there a workaround for now?",
    "Great, thank you!",
]


def py_keyerror(rng, repo, n):
    mod, key = rng.choice(PY_MODULES), rng.choice(PY_KEYS)
    pkg = repo.split("/")[1]
    func = f"load_{mod}" if rng.random() < 0.5 else f"get_{key}"
    line = rng.randint(20, 240)
    title = f"{func}() raises KeyError when settings omit {key}"
    body = (
        f"Calling `{func}` on a settings dict without `{key}` crashes instead of using the default.\n\n"
        "```\nTraceback (most recent call last):\n"
        '  File "app.py", line 12, in <module>\n'
        f"    {func}(settings)\n"
        f'  File "{pkg}/{mod}.py", line {line}, in {func}\n'
        f'    value = settings["{key}"]\n'
        f"KeyError: '{key}'\n```\n\nExpected the documented default for {key}."
    )
    comments = [
        comment("I can reproduce this with a fresh virtualenv.", minute=1),
        comment(f"The lookup in `{pkg}/{mod}.py` indexes the dict directly, so a missing {key} is fatal.", "maintainer", 2),
        comment(rng.choice(CHATTER), minute=3),
    ]
    patch = file_patch(
        f"{pkg}/{mod}.py",
        [hunk(line - 2, [f"def {func}(settings):", '    """Return the configured value."""'],
              [f'    value = settings["{key}"]'],
              [f'    value = settings.get("{key}", DEFAULTS["{key}"])'],
              ["    return normalize(value)"])],
        git=True,
    ) + new_file_patch(
        f"tests/test_{mod}.py",
        [f"from {pkg}.{mod} import {func}", "", f"def test_{func}_uses_default():", f"    assert {func}({{}}) is not None"],
    )
    return title, body, comments, patch


def java_npe(rng, repo, n):
    cls = rng.choice(JAVA_CLASSES)
    field = rng.choice(["customer", "address", "discount", "currency", "owner"])
    method = f"get{field.capitalize()}"
    line = rng.randint(40, 400)
    path = f"src/main/java/com/{repo.split('/')[0]}/{cls}.java"
    title = f"NullPointerException in {cls} when {field} is missing"
    body = (
        f"Saving a record without a {field} fails:\n\n"
        "```\njava.lang.NullPointerException: Cannot invoke \"String.trim()\" because the return value is null\n"
        f"    at com.{repo.split('/')[0]}.{cls}.{method}({cls}.java:{line})\n"
        f"    at com.{repo.split('/')[0]}.{cls}.save({cls}.java:{line + 31})\n```\n"
        f"Older releases treated a missing {field} as empty."
    )
    comments = [
        comment(rng.choice(CHATTER), minute=1),
        comment(f"Confirmed. `{method}` dereferences the {field} before checking it, see {cls}.java line {line}.", "maintainer", 2),
    ]
    patch = file_patch(
        path,
        [hunk(line - 1, [f"    public String {method}() {{"],
              [f"        return this.{field}.trim();"],
              [f"        if (this.{field} == null) {{", '            return "";', "        }",
               f"        return this.{field}.trim();"],
              ["    }"])],
        git=True,
    ) + file_patch(
        f"src/test/java/com/{repo.split('/')[0]}/{cls}Test.java",
        [hunk(10, ["    @Test"], [], [f"    void {method}HandlesNull() {{", f"        assertEquals(\"\", new {cls}().{method}());", "    }", "", "    @Test"], [f"    void savesRecord() {{"])],
        git=True,
    )
    return title, body, comments, patch


def rust_panic(rng, repo, n):
    fn = rng.choice(RUST_FNS)
    module = fn.split("_")[-1]
    line = rng.randint(30, 300)
    path = f"src/{module}.rs"
    title = f"{fn} panics on empty input"
    body = (
        f"`{fn}` panics when given an empty slice:\n\n"
        f"```\nthread 'main' panicked at {path}:{line}:17:\n"
        "index out of bounds: the len is 0 but the index is 0\n"
        "note: run with `RUST_BACKTRACE=1` environment variable to display a backtrace\n```\n"
        "It should return an error instead of panicking."
    )
    comments = [
        comment(f"The indexing at {path}:{line} assumes at least one element.", "contributor", 1),
        comment(rng.choice(CHATTER), minute=2),
        comment(rng.choice(CHATTER), minute=3),
    ]
    patch = file_patch(
        path,
        [hunk(line - 1, [f"pub fn {fn}(input: &[u8]) -> Result<Item, Error> {{"],
              ["    let first = input[0];"],
              ["    let Some(&first) = input.first() else {", "        return Err(Error::Empty);", "    };"],
              ["    decode(first, &input[1..])"])],
        git=True,
    ) + file_patch(
        f"tests/{module}.rs",
        [hunk(1, ["use crate_under_test::*;"], [], ["", "#[test]", f"fn {fn}_rejects_empty() {{", f"    assert!({fn}(&[]).is_err());", "}"], [])],
        git=True,
    )
    return title, body, comments, patch


def go_nil(rng, repo, n):
    fn = rng.choice(GO_FUNCS)
    line = rng.randint(50, 200)
    path = f"internal/{fn.lower()}/{fn.lower()}.go"
    title = f"nil pointer dereference in {fn} after reconnect"
    body = (
        f"After the connection drops, `{fn}` crashes the daemon:\n\n```\n"
        "panic: runtime error: invalid memory address or nil pointer dereference\n"
        "[signal SIGSEGV: segmentation violation code=0x1 addr=0x18 pc=0x4a1b2c]\n\n"
        f"goroutine 17 [running]:\nmain.{fn}(0x0)\n\t{path}:{line} +0x2c\n```\n"
    )
    comments = [
        comment(f"Looks like the client field is reset to nil in {path} before {fn} runs.", "maintainer", 1),
        comment(rng.choice(CHATTER), minute=2),
    ]
    patch = file_patch(
        path,
        [hunk(line - 1, [f"func {fn}(c *Client) error {{"],
              ["\treturn c.conn.Write(buf)"],
              ["\tif c == nil || c.conn == nil {", "\t\treturn ErrDisconnected", "\t}", "\treturn c.conn.Write(buf)"],
              ["}"])],
    ) + file_patch(
        f"internal/{fn.lower()}/{fn.lower()}_test.go",
        [hunk(5, ["import \"testing\""], [], ["", f"func Test{fn}Nil(t *testing.T) {{", f"\tif err := {fn}(nil); err == nil {{", "\t\tt.Fatal(\"expected error\")", "\t}", "}"], [])],
    )
    return title, body, comments, patch


def js_typeerror(rng, repo, n):
    fn = rng.choice(JS_FNS)
    line = rng.randint(10, 150)
    path = f"src/utils/{fn}.js"
    title = f"TypeError in {fn} when value is undefined"
    body = (
        f"Rendering a row with an empty cell throws:\n\n```\nTypeError: Cannot read properties of undefined (reading 'length')\n"
        f"    at {fn} ({path}:{line}:18)\n    at render (src/table.js:88:12)\n```\n"
    )
    comments = [comment(rng.choice(CHATTER), minute=1), comment(rng.choice(CHATTER), minute=2),
                comment(f"`{fn}` in {path} should guard against undefined before reading length.", "maintainer", 3)]
    patch = file_patch(
        path,
        [hunk(line - 1, [f"export function {fn}(value) {{"],
              ["  if (value.length === 0) return '';"],
              ["  if (value == null || value.length === 0) return '';"],
              ["  return String(value);"])],
        git=True,
    ) + file_patch(
        f"test/{fn}.test.js",
        [hunk(3, [f"describe('{fn}', () => {{"], [], [f"  it('handles undefined', () => expect({fn}(undefined)).toBe(''));"], ["});"])],
        git=True,
    )
    return title, body, comments, patch


SCENARIOS = [py_keyerror, java_npe, rust_panic, go_nil, js_typeerror]


def no_anchor_issue(rng, repo, n):
    title = "Docs: clarify installation steps"
    body = "The README could explain the optional extras better. It took me a while to find them."
    comments = [comment("Agreed, the docs page in docs/install.md is outdated.", "maintainer", 1)]
    patch = file_patch("docs/install.md", [hunk(3, ["## Install"], ["Run the installer."], ["Run the installer with the extras you need."], [""])])
    return title, body, comments, patch


def low_ratio_issue(rng, repo, n):
    title, body, _, patch = py_keyerror(rng, repo, n)
    comments = [comment(c, minute=i) for i, c in enumerate(rng.sample(CHATTER, 6))]
    return title, body, comments, patch


def govern_fixture(rng):
    lines = []
    repos = [f"{o}/{p}" for o, p in zip(ORGS, PROJECTS)]
    issue_no = 100
    for i in range(100):
        repo = repos[i % len(repos)]
        issue_no += rng.randint(1, 9)
        pr_no = issue_no + rng.randint(1, 5)
        kind = i % 20
        if kind == 3:
            lines.append('{"repo": "' + repo + '", "issue": {"number": 0, "title": "broken record"')
            continue
        if kind == 7:
            t = triplet(repo, issue_no, *no_anchor_issue(rng, repo, i)[:3], pr_no, no_anchor_issue(rng, repo, i)[3])
        elif kind == 11:
            title, body, comments, patch = low_ratio_issue(rng, repo, i)
            t = triplet(repo, issue_no, title, body, comments, pr_no, patch)
        elif kind == 13:
            title, body, comments, patch = rng.choice(SCENARIOS)(rng, repo, i)
            t = triplet(repo, issue_no, title, body, comments, pr_no, patch, merged=False)
        elif kind == 17:
            title, body, comments, patch = rng.choice(SCENARIOS)(rng, repo, i)
            t = triplet(repo, issue_no, title, body, comments, pr_no, patch.replace("@@ -", "@@ -x", 1))
        elif kind == 19 and lines:
            # Re-filed duplicate of an earlier accepted issue under another repo.
            prev = json.loads(lines[-2])
            prev["repo"] = repos[(i + 3) % len(repos)]
            prev["issue"]["number"] = issue_no
            prev["pr"]["number"] = pr_no
            prev["pr"]["linked_issue_refs"] = [issue_no]
            prev["pr"]["title"] = f"Fix #{issue_no}"
            t = prev
        else:
            title, body, comments, patch = SCENARIOS[i % len(SCENARIOS)](rng, repo, i)
            t = triplet(repo, issue_no, title, body, comments, pr_no, patch)
        lines.append(json.dumps(t))
    return lines


# --- labeled purification cases ----------------------------------------------

TECH = "The crash comes from `src/parse.py` where the index is read before the length check."
CHAT = "thanks for looking into this!"


def tau_fixture(rng):
    base_body = (
        "Parsing an empty file crashes:\n\nTraceback (most recent call last):\n"
        '  File "src/parse.py", line 10, in parse\n    first = lines[0]\nIndexError: list index out of range\n'
    )
    patch = file_patch("src/parse.py", [hunk(9, ["def parse(lines):"], ["    first = lines[0]"],
                                             ["    if not lines:", "        return None", "    first = lines[0]"], ["    return first"])])

    def case(label, why, comments=(), discussion=(), **kw):
        t = triplet("acme/widgets", kw.pop("issue", 7), kw.pop("title", "crash on empty input"), kw.pop("body", base_body),
                    [comment(c, minute=i) for i, c in enumerate(comments)], kw.pop("pr", 9), kw.pop("patch", patch),
                    discussion=[comment(c, "maintainer", i) for i, c in enumerate(discussion)], **kw)
        return {"label": label, "why": why, "triplet": t}

    cases = [
        case("accept", "ratio exactly 0.2: one technical comment in five", [TECH] + [CHAT] * 4),
        case("reject", "ratio 0.199: 199 technical comments in 1000", [TECH] * 199 + [CHAT] * 801),
        case("accept", "ratio 0.2 over 1000 comments", [TECH] * 200 + [CHAT] * 800),
        case("accept", "empty thread counts as fully technical"),
        case("accept", "all comments technical", [TECH, "```\nfirst = lines[0]\n```"]),
        case("reject", "chatter only", [CHAT, "+1", "any update?"]),
        case("accept", "PR discussion supplies the technical share", [CHAT, CHAT, CHAT], ["Guarding the empty list in src/parse.py fixes it."]),
        case("reject", "one technical comment in six", [TECH] + [CHAT] * 5),
        case("accept", "two lexicon terms make a comment technical", ["I can reproduce the error on main."] + [CHAT] * 3),
        case("reject", "a single lexicon term is not enough", ["same error here"] + [CHAT] * 4),
        case("reject", "pull request not merged", [TECH], merged=False),
        case("reject", "pull request does not reference the issue", [TECH], refs=[8]),
        case("reject", "patch is not a unified diff", [TECH], patch="this is not a diff\n"),
        case("reject", "hunk counts do not match the body", [TECH], patch=patch.replace("@@ -9,3 +9,5 @@", "@@ -9,4 +9,5 @@")),
        case("reject", "binary patch", [TECH], patch="diff --git a/logo.png b/logo.png\nindex 1..2 100644\nBinary files a/logo.png and b/logo.png differ\n"),
        case("reject", "no diagnostic anchor in the issue", [TECH], body="Parsing empty files does not behave as I expected."),
        case("accept", "assertion failure counts as an anchor", [TECH], body="test_parse_empty: AssertionError: assert None == []\nassertion failed on empty input"),
        case("accept", "Rust panic counts as an anchor", [TECH], body="thread 'main' panicked at src/parse.rs:10:5:\nindex out of bounds"),
        case("accept", "anchor only in an issue comment", [TECH, "Traceback (most recent call last):\n  File \"src/parse.py\", line 10, in parse\nIndexError: list index out of range"], body="Empty input breaks parsing."),
        case("accept", "JVM stack frame counts as an anchor", [TECH], body="Exception in thread main\n    at com.acme.Parser.parse(Parser.java:10)"),
    ]
    return [json.dumps(c) for c in cases]


# --- planted cards --------------------------------------------------------------

PLANTED = [
    ("Connection pool exhausted under concurrent requests", ["PoolTimeoutError", "connection pool exhausted", "max connections reached", "concurrent requests hang", "pool checkout timeout", "leaked connection", "database connection", "request handler", "checkout blocks", "connection not returned"],
     "TimeoutError: QueuePool limit of size 5 overflow 10 reached, connection timed out"),
    ("Unicode filename breaks archive extraction", ["UnicodeDecodeError", "non ascii filename", "zip extraction", "codec cannot decode", "byte 0xe9", "archive member name", "utf-8 decoding", "cp437 fallback", "extract all fails", "filename encoding"],
     "UnicodeDecodeError: 'utf-8' codec can't decode byte 0xe9 in position 3"),
    ("Deadlock when closing websocket during send", ["websocket close deadlock", "send lock held", "close handshake", "writer task blocked", "mutex poisoned", "shutdown hangs", "ping timeout", "socket half closed", "graceful close", "await on lock"],
     "thread 'tokio-runtime-worker' panicked at 'PoisonError: another task failed inside'"),
    ("Date parsing ignores timezone offset", ["timezone offset ignored", "iso 8601 parsing", "utc conversion", "datetime naive", "offset +05:30", "wrong hour", "strptime format", "tzinfo missing", "daylight saving", "parse timestamp"],
     "AssertionError: assert datetime(2024, 1, 1, 5, 30) == datetime(2024, 1, 1, 0, 0)"),
    ("Memory leak in image thumbnail cache", ["thumbnail cache", "memory grows", "lru eviction", "resident memory", "OutOfMemoryError", "bitmap not recycled", "cache size unbounded", "heap dump", "weak reference", "eviction policy"],
     "java.lang.OutOfMemoryError: Java heap space"),
    ("Integer overflow in pagination offset", ["integer overflow", "page offset", "large page number", "negative offset", "OverflowError", "limit times page", "int32 wraparound", "pagination query", "sql offset", "cursor pagination"],
     "OverflowError: Python int too large to convert to C long"),
    ("Race condition deletes fresh lock file", ["stale lock file", "lock file deleted", "race condition", "concurrent writers", "FileNotFoundError", "pid check", "atomic rename", "lock acquisition", "file lock race", "double delete"],
     "FileNotFoundError: [Errno 2] No such file or directory: '.cache/index.lock'"),
    ("Regex catastrophic backtracking freezes validator", ["catastrophic backtracking", "regex timeout", "email validation", "cpu spike", "nested quantifier", "redos", "validator hangs", "pattern rewrite", "input length", "possessive quantifier"],
     "TimeoutException: regex evaluation exceeded 5000 ms"),
    ("CSV export drops trailing empty columns", ["csv export", "trailing empty column", "column count mismatch", "spreadsheet import", "missing delimiter", "row length", "IndexError", "header width", "empty cell", "writer quoting"],
     "IndexError: list index out of range in csv row 17"),
    ("Retry loop never backs off after 429", ["http 429", "too many requests", "retry backoff", "rate limit", "retry-after header", "tight loop", "exponential backoff", "HTTPError", "request storm", "sleep jitter"],
     "requests.exceptions.HTTPError: 429 Client Error: Too Many Requests"),
    ("Symlink loop crashes directory walker", ["symlink loop", "directory walk", "RecursionError", "followlinks", "inode visited", "infinite recursion", "os.walk", "cyclic link", "maximum recursion depth", "visited set"],
     "RecursionError: maximum recursion depth exceeded while calling a Python object"),
    ("Float rounding makes invoice totals off by a cent", ["rounding error", "invoice total", "off by one cent", "float arithmetic", "decimal quantize", "currency amount", "half up rounding", "line item sum", "AssertionError", "banker rounding"],
     "AssertionError: expected 10.01 but got 10.000000000000002"),
    ("Segfault when freeing parser twice", ["double free", "segmentation fault", "parser destroy", "use after free", "SIGSEGV", "free called twice", "dangling pointer", "cleanup path", "null after free", "valgrind invalid free"],
     "Program received signal SIGSEGV, Segmentation fault.\n#0  0x00007ffff7a9e2d4 in parser_free (p=0x5555) at parser.c:212"),
    ("Environment variable with equals sign truncated", ["environment variable", "equals sign value", "split on first", "dotenv parsing", "truncated value", "ValueError", "too many values", "key value pair", "config loading", "base64 secret"],
     "ValueError: too many values to unpack (expected 2)"),
    ("Stale cache served after schema migration", ["stale cache", "schema migration", "cache key version", "KeyError", "old column", "cache invalidation", "deploy migration", "serialized model", "field renamed", "cache busting"],
     "KeyError: 'email_address'"),
    ("Progress bar division by zero on empty task list", ["ZeroDivisionError", "progress bar", "empty task list", "percentage complete", "division by zero", "total zero", "render progress", "eta calculation", "guard zero", "no tasks"],
     "ZeroDivisionError: division by zero"),
    ("TLS handshake fails with custom CA bundle", ["tls handshake", "certificate verify failed", "custom ca bundle", "SSLError", "self signed", "trust store", "ssl context", "REQUESTS_CA_BUNDLE", "chain incomplete", "intermediate certificate"],
     "ssl.SSLCertVerificationError: certificate verify failed: unable to get local issuer certificate"),
    ("Goroutine leak in subscription watcher", ["goroutine leak", "subscription watcher", "context cancel", "channel never closed", "runtime goroutines", "unsubscribe", "blocked send", "pprof", "watch loop", "ctx done"],
     "panic: send on closed channel\n\ngoroutine 42 [running]:\nwatch.loop(0xc000120000)\n\twatch/watch.go:88 +0x1f"),
    ("Undefined props crash table render", ["TypeError", "undefined props", "table render", "cannot read properties", "optional chaining", "default props", "row map", "react component", "length of undefined", "empty dataset"],
     "TypeError: Cannot read properties of undefined (reading 'map')"),
    ("Locale decimal comma breaks number parsing", ["decimal comma", "locale parsing", "NumberFormatException", "german locale", "parse double", "thousands separator", "invariant culture", "user input", "float parse", "regional settings"],
     "java.lang.NumberFormatException: For input string: \"3,14\""),
]


def planted_fixture():
    cards, queries = [], []
    for i, (summary, signals, trace) in enumerate(PLANTED):
        repo = f"planted/project{i:02}"
        source = {"repo": repo, "issue": 1000 + i, "pr": 2000 + i}
        card = {
            "card_id": f"planted-{i:02}",
            "source": source,
            "index": {"problem_summary": summary, "signals": signals},
            "resolution": {
                "root_cause": f"Root cause {i}: {signals[0]} arises because {signals[2]} is not handled.",
                "fix_strategy": f"Fix {i}: guard the {signals[1]} path and handle {signals[3]} explicitly.",
                "patch_digest": f"AREA: src/module{i}.py\nCHUNK: guard {signals[1]}\nCHUNK: handle {signals[3]}\nCHUNK: add regression test",
                "verification": f"Verify {i}: add a regression test reproducing {signals[0]}.",
            },
        }
        cards.append(json.dumps(card))
        issue = f"{summary.lower()}\n\nAfter upgrading, we see this:\n\n{trace}\n\nSymptoms: {signals[4]}, {signals[5]}."
        queries.append(json.dumps({"card_id": card["card_id"], "issue_text": issue}))
    return cards, queries


def write(name, lines):
    with open(os.path.join(HERE, name), "w") as f:
        for l in lines:
            f.write(l + "\n")


if __name__ == "__main__":
    rng = random.Random(7)
    write("govern_triplets.jsonl", govern_fixture(rng))
    write("tau_threads.jsonl", tau_fixture(rng))
    cards, queries = planted_fixture()
    write("planted_cards.jsonl", cards)
    write("planted_queries.jsonl", queries)

"""Writes python.jsonl and cpp.jsonl: 200 valid and 50 broken sources per
language, each checked against the reference toolchain (ast / g++).

Usage: python3 generate.py <out dir>
"""
import json, random, ast, subprocess, os, sys, tempfile
rng = random.Random(7)
names = ["total","count","best","acc","value","score","limit","left","right","mid","step","depth","width","size","key","item","node","edge","cost","weight"]

def py_valid(i):
    a, b, c = rng.sample(names, 3)
    k = rng.randint(1, 97)
    kind = i % 10
    if kind == 0:
        return f"def {a}_sum(xs):\n    {b} = 0\n    for x in xs:\n        {b} += x * {k}\n    return {b}\n\nprint({a}_sum([1, 2, 3]))\n"
    if kind == 1:
        return f"class {a.title()}:\n    def __init__(self, {b}={k}):\n        self.{b} = {b}\n\n    def bump(self):\n        self.{b} += 1\n        return self.{b}\n"
    if kind == 2:
        return f"import sys\n\n\ndef main():\n    data = sys.stdin.read().split()\n    {a} = [int(t) for t in data if t.isdigit()]\n    print(max({a}, default={k}))\n\n\nif __name__ == \"__main__\":\n    main()\n"
    if kind == 3:
        return f"{a} = {{x: x ** 2 for x in range({k})}}\n{b} = sorted({a}.items(), key=lambda kv: -kv[1])\nprint({b}[:3])\n"
    if kind == 4:
        return f"def {a}(n):\n    try:\n        return {k} // n\n    except ZeroDivisionError:\n        return None\n    finally:\n        pass\n"
    if kind == 5:
        return f"from functools import lru_cache\n\n\n@lru_cache(maxsize=None)\ndef {a}(n):\n    if n < 2:\n        return n\n    return {a}(n - 1) + {a}(n - 2)\n\nprint({a}({k % 30}))\n"
    if kind == 6:
        return f"{a}, {b} = 0, {k}\nwhile {a} < {b}:\n    {c} = ({a} + {b}) // 2\n    if {c} * {c} < {k}:\n        {a} = {c} + 1\n    else:\n        {b} = {c}\nprint(f\"{{{a}}} {{{b}!r}}\")\n"
    if kind == 7:
        return f"async def {a}(queue):\n    async with queue as q:\n        return [x async for x in q]\n"
    if kind == 8:
        return f"def {a}(cmd):\n    match cmd:\n        case [\"go\", {b}]:\n            return {b}\n        case {{\"k\": {c}}}:\n            return {c}\n        case _:\n            return {k}\n"
    return f"with open(\"{a}.txt\") as fh:\n    {b} = [line.rstrip() for line in fh if line.strip()]\n{c} = \"\\n\".join(reversed({b}))\nassert isinstance({c}, str), \"{k}\"\n"

def py_broken(i, src):
    kind = i % 5
    lines = src.split("\n")
    if kind == 0:   # drop a closing paren
        j = src.rfind(")")
        return src[:j] + src[j+1:]
    if kind == 1:   # missing colon on the first compound header
        for n, l in enumerate(lines):
            if l.rstrip().endswith(":") and not l.lstrip().startswith("#"):
                lines[n] = l.rstrip()[:-1]
                return "\n".join(lines)
    if kind == 2:   # dangling binary operator
        return src.rstrip("\n") + "\nresult = 1 +\n"
    if kind == 3:   # stray closing bracket
        return src.rstrip("\n") + "\nvalues = [1, 2]]\n"
    return src.replace("def ", "def (", 1) if "def " in src else "def (x):\n    return x\n" + src

cpp_head = "#include <iostream>\n#include <vector>\n#include <string>\n#include <map>\n#include <algorithm>\n\n"
def cpp_valid(i):
    a, b, c = rng.sample(names, 3)
    k = rng.randint(1, 97)
    kind = i % 10
    if kind == 0:
        body = f"long long {a}_sum(const std::vector<long long>& xs) {{\n    long long {b} = 0;\n    for (long long x : xs) {b} += x * {k};\n    return {b};\n}}\n\nint main() {{\n    std::cout << {a}_sum({{1, 2, 3}}) << '\\n';\n    return 0;\n}}\n"
    elif kind == 1:
        body = f"struct {a.title()} {{\n    int {b} = {k};\n    int bump() {{ return ++{b}; }}\n}};\n\nint main() {{\n    {a.title()} s;\n    return s.bump() > 0 ? 0 : 1;\n}}\n"
    elif kind == 2:
        body = f"class Solution {{\npublic:\n    int {a}(std::vector<int>& nums, int target) {{\n        int lo = 0, hi = (int)nums.size();\n        while (lo < hi) {{\n            int mid = lo + (hi - lo) / 2;\n            if (nums[mid] < target) lo = mid + 1; else hi = mid;\n        }}\n        return lo + {k} * 0;\n    }}\n}};\n"
    elif kind == 3:
        body = f"int main() {{\n    std::map<std::string, int> {a};\n    std::string w;\n    while (std::cin >> w) {a}[w]++;\n    for (const auto& [{b}, {c}] : {a}) std::cout << {b} << ' ' << {c} << '\\n';\n}}\n"
    elif kind == 4:
        body = f"template <typename T>\nT {a}(T x, T y) {{\n    return x < y ? y : x + {k};\n}}\n\nint main() {{ return {a}<int>(1, 2) == 2 ? 0 : 1; }}\n"
    elif kind == 5:
        body = f"int main() {{\n    std::vector<int> {a}({k});\n    std::sort({a}.begin(), {a}.end(), [](int x, int y) {{ return x > y; }});\n    auto {b} = std::count_if({a}.begin(), {a}.end(), [&](int v) {{ return v % 2 == 0; }});\n    std::cout << {b} << std::endl;\n}}\n"
    elif kind == 6:
        body = f"namespace {a} {{\nconstexpr int {b} = {k};\nenum class Color {{ Red, Green }};\n}}\n\nint main() {{\n    switch ({a}::{b} % 3) {{\n    case 0: return 0;\n    default: break;\n    }}\n    return 1;\n}}\n"
    elif kind == 7:
        body = f"long long {a}(int n) {{\n    if (n < 2) return n;\n    long long p = 0, q = 1;\n    for (int i = 2; i <= n; ++i) {{ long long t = p + q; p = q; q = t; }}\n    return q;\n}}\n\nint main() {{\n    int n;\n    if (!(std::cin >> n)) n = {k % 40};\n    std::cout << {a}(n) << \"\\n\";\n}}\n"
    elif kind == 8:
        body = f"int main() {{\n    std::string {a} = \"{b}\";\n    std::reverse({a}.begin(), {a}.end());\n    do {{\n        std::cout << {a} << '\\n';\n    }} while (std::next_permutation({a}.begin(), {a}.begin() + 2));\n    return {k} - {k};\n}}\n"
    else:
        body = f"struct Node {{\n    int {a};\n    Node* next;\n}};\n\nint length(const Node* head) {{\n    int {b} = 0;\n    for (const Node* p = head; p != nullptr; p = p->next) ++{b};\n    return {b} + {k} - {k};\n}}\n"
    return cpp_head + body

def cpp_broken(i, src):
    kind = i % 5
    if kind == 0:   # drop the last closing brace
        j = src.rfind("}")
        return src[:j] + src[j+1:]
    if kind == 1:   # unbalanced parenthesis in the first call
        j = src.find(")", len(cpp_head))
        return src[:j] + src[j+1:]
    if kind == 2:   # stray closing brace at file scope
        return src + "}\n"
    if kind == 3:   # dangling operator
        return src + "int broken_value = 1 + ;\n"
    return src + "int main( {\n"

def py_ok(src):
    try:
        ast.parse(src); return True
    except SyntaxError:
        return False

def cpp_ok(src, tmp):
    path = os.path.join(tmp, "c.cpp")
    open(path, "w").write(src)
    return subprocess.run(["g++", "-std=c++17", "-fsyntax-only", path], capture_output=True).returncode == 0

out = sys.argv[1]
tmp = tempfile.mkdtemp()
for lang in ["python", "cpp"]:
    rows = []
    valid = [py_valid(i) if lang == "python" else cpp_valid(i) for i in range(200)]
    broken = [(py_broken if lang == "python" else cpp_broken)(i, valid[(i * 7) % 200]) for i in range(50)]
    for s in valid:
        ok = py_ok(s) if lang == "python" else cpp_ok(s, tmp)
        assert ok, s
        rows.append({"valid": True, "source": s})
    for s in broken:
        ok = py_ok(s) if lang == "python" else cpp_ok(s, tmp)
        assert not ok, s
        rows.append({"valid": False, "source": s})
    with open(os.path.join(out, f"{lang}.jsonl"), "w") as fh:
        for r in rows:
            fh.write(json.dumps(r) + "\n")
    print(lang, len(rows))

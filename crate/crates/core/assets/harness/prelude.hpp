#include <algorithm>
#include <array>
#include <bitset>
#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <list>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stack>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace rf {

struct Json {
    enum Kind { Null, Bool, Number, String, Array, Object } kind = Null;
    bool b = false;
    std::string text;
    std::vector<Json> arr;
    std::vector<std::pair<std::string, Json>> obj;
};

struct Reader {
    const std::string& s;
    size_t i = 0;
    explicit Reader(const std::string& src) : s(src) {}

    [[noreturn]] void fail(const char* what) {
        throw std::runtime_error(std::string("malformed argument record: ") + what);
    }

    void ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }

    static void put_utf8(std::string& out, unsigned cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    unsigned hex4() {
        if (i + 4 > s.size()) fail("short \\u escape");
        unsigned v = 0;
        for (int k = 0; k < 4; ++k) {
            char c = s[i++];
            v <<= 4;
            if (c >= '0' && c <= '9') v |= c - '0';
            else if (c >= 'a' && c <= 'f') v |= c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') v |= c - 'A' + 10;
            else fail("bad \\u escape");
        }
        return v;
    }

    std::string str() {
        ++i;
        std::string out;
        while (i < s.size() && s[i] != '"') {
            char c = s[i++];
            if (c != '\\') {
                out += c;
                continue;
            }
            if (i >= s.size()) fail("dangling escape");
            char e = s[i++];
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case 'b': out += '\b'; break;
                case 'f': out += '\f'; break;
                case 'u': {
                    unsigned cp = hex4();
                    if (cp >= 0xD800 && cp < 0xDC00 && i + 1 < s.size() && s[i] == '\\' && s[i + 1] == 'u') {
                        i += 2;
                        unsigned lo = hex4();
                        cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
                    }
                    put_utf8(out, cp);
                    break;
                }
                default: out += e;
            }
        }
        if (i >= s.size()) fail("unterminated string");
        ++i;
        return out;
    }

    Json value() {
        ws();
        if (i >= s.size()) fail("unexpected end");
        Json j;
        char c = s[i];
        if (c == '[') {
            ++i;
            j.kind = Json::Array;
            ws();
            if (i < s.size() && s[i] == ']') { ++i; return j; }
            for (;;) {
                j.arr.push_back(value());
                ws();
                if (i < s.size() && s[i] == ',') { ++i; continue; }
                if (i < s.size() && s[i] == ']') { ++i; break; }
                fail("expected , or ]");
            }
            return j;
        }
        if (c == '{') {
            ++i;
            j.kind = Json::Object;
            ws();
            if (i < s.size() && s[i] == '}') { ++i; return j; }
            for (;;) {
                ws();
                if (i >= s.size() || s[i] != '"') fail("expected key");
                std::string key = str();
                ws();
                if (i >= s.size() || s[i] != ':') fail("expected :");
                ++i;
                j.obj.emplace_back(key, value());
                ws();
                if (i < s.size() && s[i] == ',') { ++i; continue; }
                if (i < s.size() && s[i] == '}') { ++i; break; }
                fail("expected , or }");
            }
            return j;
        }
        if (c == '"') {
            j.kind = Json::String;
            j.text = str();
            return j;
        }
        if (s.compare(i, 4, "true") == 0) { i += 4; j.kind = Json::Bool; j.b = true; return j; }
        if (s.compare(i, 5, "false") == 0) { i += 5; j.kind = Json::Bool; return j; }
        if (s.compare(i, 4, "null") == 0) { i += 4; return j; }
        size_t start = i;
        while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '-' || s[i] == '+' ||
                                s[i] == '.' || s[i] == 'e' || s[i] == 'E'))
            ++i;
        if (start == i) fail("unexpected token");
        j.kind = Json::Number;
        j.text = s.substr(start, i - start);
        return j;
    }
};

inline Json parse(const std::string& text) {
    Reader r(text);
    Json j = r.value();
    r.ws();
    if (r.i != text.size()) r.fail("trailing characters");
    return j;
}

inline void write_string(std::ostream& o, const std::string& v) {
    o << '"';
    for (unsigned char c : v) {
        switch (c) {
            case '"': o << "\\\""; break;
            case '\\': o << "\\\\"; break;
            case '\n': o << "\\n"; break;
            case '\t': o << "\\t"; break;
            case '\r': o << "\\r"; break;
            case '\b': o << "\\b"; break;
            case '\f': o << "\\f"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    o << buf;
                } else {
                    o << static_cast<char>(c);
                }
        }
    }
    o << '"';
}

inline void write_double(std::ostream& o, double v) {
    if (std::isnan(v)) { o << "NaN"; return; }
    if (std::isinf(v)) { o << (v > 0 ? "Infinity" : "-Infinity"); return; }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string t(buf, res.ptr);
    if (t.find_first_of(".e") == std::string::npos) t += ".0";
    o << t;
}

template <class T>
struct Conv;

template <class T>
struct IntConv {
    static T from(const Json& j) {
        if (j.kind != Json::Number) throw std::runtime_error("expected integer");
        return static_cast<T>(std::stoll(j.text));
    }
    static void write(std::ostream& o, T v) { o << v; }
};

template <> struct Conv<int> : IntConv<int> {};
template <> struct Conv<long> : IntConv<long> {};
template <> struct Conv<long long> : IntConv<long long> {};
template <> struct Conv<unsigned> : IntConv<unsigned> {};
template <> struct Conv<unsigned long> : IntConv<unsigned long> {};
template <> struct Conv<unsigned long long> : IntConv<unsigned long long> {};

template <class T>
struct FloatConv {
    static T from(const Json& j) {
        if (j.kind != Json::Number) throw std::runtime_error("expected number");
        return static_cast<T>(std::stod(j.text));
    }
    static void write(std::ostream& o, T v) { write_double(o, static_cast<double>(v)); }
};

template <> struct Conv<double> : FloatConv<double> {};
template <> struct Conv<float> : FloatConv<float> {};

template <>
struct Conv<bool> {
    static bool from(const Json& j) {
        if (j.kind != Json::Bool) throw std::runtime_error("expected boolean");
        return j.b;
    }
    static void write(std::ostream& o, bool v) { o << (v ? "true" : "false"); }
};

template <>
struct Conv<std::string> {
    static std::string from(const Json& j) {
        if (j.kind != Json::String) throw std::runtime_error("expected string");
        return j.text;
    }
    static void write(std::ostream& o, const std::string& v) { write_string(o, v); }
};

template <>
struct Conv<char> {
    static char from(const Json& j) {
        if (j.kind != Json::String || j.text.size() != 1) throw std::runtime_error("expected one-character string");
        return j.text[0];
    }
    static void write(std::ostream& o, char v) { write_string(o, std::string(1, v)); }
};

template <class T>
struct Conv<std::vector<T>> {
    static std::vector<T> from(const Json& j) {
        if (j.kind != Json::Array) throw std::runtime_error("expected array");
        std::vector<T> out;
        out.reserve(j.arr.size());
        for (const auto& e : j.arr) out.push_back(Conv<T>::from(e));
        return out;
    }
    static void write(std::ostream& o, const std::vector<T>& v) {
        o << '[';
        bool first = true;
        for (const auto& e : v) {
            if (!first) o << ',';
            first = false;
            Conv<T>::write(o, e);
        }
        o << ']';
    }
};

template <class T>
T from_json(const Json& j) {
    return Conv<T>::from(j);
}

template <class T>
void write_json(std::ostream& o, const T& v) {
    Conv<T>::write(o, v);
}

}  // namespace rf

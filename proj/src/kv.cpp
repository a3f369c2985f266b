#include "rffw/kv.hpp"

#include "rffw/common.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>

namespace rffw {

namespace {

bool needs_escape(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return c == '%' || c == '|' || c == ';' || c == '=' || u < 0x20;
}

int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::string kv_escape(std::string_view s) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (needs_escape(c)) {
            unsigned char u = static_cast<unsigned char>(c);
            out.push_back('%');
            out.push_back(digits[u >> 4]);
            out.push_back(digits[u & 0xf]);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string kv_unescape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%') {
            if (i + 2 >= s.size()) throw DataError("truncated escape in kv text");
            int hi = hex_val(s[i + 1]), lo = hex_val(s[i + 2]);
            if (hi < 0 || lo < 0) throw DataError("bad escape in kv text");
            out.push_back(static_cast<char>((hi << 4) | lo));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::string kv_serialize(const KvMap& m) {
    std::string out;
    bool first = true;
    for (const auto& [k, v] : m) {
        if (!first) out.push_back(';');
        first = false;
        out += kv_escape(k);
        out.push_back('=');
        out += kv_escape(v);
    }
    return out;
}

KvMap kv_parse(std::string_view s) {
    KvMap m;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t end = s.find(';', pos);
        if (end == std::string_view::npos) end = s.size();
        std::string_view item = s.substr(pos, end - pos);
        if (!item.empty()) {
            size_t eq = item.find('=');
            if (eq == std::string_view::npos) throw DataError("kv item missing '='");
            m[kv_unescape(item.substr(0, eq))] = kv_unescape(item.substr(eq + 1));
        }
        pos = end + 1;
    }
    return m;
}

std::string format_double(double v) {
    char buf[64];
    // %.17g round-trips every double; trim to shortest representation that does
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (parse_double(buf) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(std::string_view s) {
    std::string tmp(s);
    char* end = nullptr;
    double v = std::strtod(tmp.c_str(), &end);
    if (end == tmp.c_str()) throw DataError("not a number: " + tmp);
    return v;
}

} // namespace rffw

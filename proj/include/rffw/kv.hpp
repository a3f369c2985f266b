#pragma once

#include <map>
#include <string>
#include <string_view>

namespace rffw {

// Sorted keys give a canonical order for hashing and serialization.
using KvMap = std::map<std::string, std::string>;

// Percent-escapes the characters that carry structure in our text formats
// ('%', '|', ';', '=', newline, CR) plus other control bytes.
std::string kv_escape(std::string_view s);
std::string kv_unescape(std::string_view s);

/// "k1=v1;k2=v2" with escaped keys/values, keys in sorted order.
std::string kv_serialize(const KvMap& m);
KvMap kv_parse(std::string_view s);

std::string format_double(double v); // shortest round-trip decimal
double parse_double(std::string_view s);

} // namespace rffw

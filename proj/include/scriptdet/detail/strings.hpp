#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scriptdet::detail {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// Splits on every occurrence of `sep`; empty fields are preserved.
std::vector<std::string_view> split(std::string_view s, char sep);

/// Splits on runs of ASCII whitespace; empty fields are dropped.
std::vector<std::string_view> split_ws(std::string_view s);

/// Removes a leading UTF-8 byte-order mark, if present.
std::string_view strip_bom(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest round-trip representation ("377", "0.9", "1e-07").
std::string format_number(double v);

/// Fixed-point representation with the given number of decimals.
std::string format_fixed(double v, int decimals);

}  // namespace scriptdet::detail

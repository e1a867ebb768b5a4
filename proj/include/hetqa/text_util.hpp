#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hetqa {

// ASCII case-fold. Bytes >= 0x80 pass through untouched.
std::string casefold(std::string_view s);

// Case-folded tokens split on any non-alphanumeric ASCII byte. UTF-8
// continuation and lead bytes count as word characters so accented words
// survive as single tokens. No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view s);

std::string trim(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

// Jaccard similarity of two token sets; 0 when both are empty.
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace hetqa

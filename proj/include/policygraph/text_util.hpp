#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pg {

// ASCII-only case folding; bytes outside A-Z pass through untouched.
std::string to_lower(std::string_view s);

std::string trim(std::string_view s);

// Trims and replaces every internal whitespace run with a single space.
std::string collapse_whitespace(std::string_view s);

// Lowercase maximal alphanumeric runs (ASCII). The single tokenizer shared by
// the scorers, keyword search and the hashed-token embedder.
std::vector<std::string> tokenize(std::string_view s);

// Lowercases and replaces every maximal run of non-alphanumeric characters
// with one underscore, stripping leading/trailing underscores. Idempotent.
// Throws Error(invalid_argument) when the result is empty.
std::string normalize_type_label(std::string_view raw);

std::size_t levenshtein(std::string_view a, std::string_view b);

std::uint64_t fnv1a(std::string_view s);

// Collapses whitespace to one line; truncates to max_chars (0 = no limit),
// appending "..." when truncated.
std::string one_line(std::string_view s, std::size_t max_chars = 0);

bool contains_ci(std::string_view haystack, std::string_view needle);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

bool starts_with_ci(std::string_view s, std::string_view prefix);

std::vector<std::string> split_lines(std::string_view s);

} // namespace pg

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace deckeval::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Whitespace-delimited tokens.
std::vector<std::string> split_words(std::string_view s);
std::size_t word_count(std::string_view s);
/// Keeps the first `max_words` whitespace tokens, joined by single spaces.
std::string truncate_words(std::string_view s, std::size_t max_words);

/// Lowercase, drop ASCII punctuation, split on whitespace.
std::vector<std::string> normalized_tokens(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix);
bool equals_ci(std::string_view a, std::string_view b);

}  // namespace deckeval::text

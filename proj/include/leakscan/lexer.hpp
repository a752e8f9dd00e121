#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>

#include "leakscan/corpus.hpp"

namespace leakscan {

/// Identifier/literal token fingerprint of one context: the multiset T1
/// (token -> occurrence count) whose support is the set T0.
struct Fingerprint {
    std::map<std::string, uint32_t> counts;

    bool empty() const { return counts.empty(); }
    size_t distinct_count() const { return counts.size(); }
    uint64_t total_count() const;
    bool contains(const std::string& token) const { return counts.count(token) != 0; }

    bool operator==(const Fingerprint&) const = default;
};

using KeywordSet = std::unordered_set<std::string>;
using FingerprintMap = std::map<std::string, Fingerprint>; // sample id -> fingerprint

/// Single-pass, language-agnostic lexer. Counts every occurrence of:
///  - identifiers: letter or underscore, then letters/digits/underscores
///    (bytes >= 0x80 are treated as letters so non-ASCII words survive);
///    tokens found in `keywords` are dropped;
///  - string literals: maximal runs between matching single or double
///    quotes, stored with the quotes stripped; an unterminated quote runs
///    to the end of the context; empty literals contribute nothing;
///  - numeric literals: digit runs with an optional single decimal point,
///    or 0x/0X followed by hex digits.
/// Everything else (operators, punctuation, whitespace) contributes nothing;
/// comments are not stripped and lex as ordinary text.
Fingerprint tokenize(std::string_view context, const KeywordSet& keywords);

/// One fingerprint per sample id; pure and deterministic.
FingerprintMap fingerprint_corpus(const Corpus& corpus, const KeywordSet& keywords);

/// Built-in stoplist: the union of reserved words of common object-oriented
/// languages. Shipped verbatim at data/default_keywords.txt.
const KeywordSet& default_keywords();

/// Stoplist file: one token per line, '#' starts a comment, blanks ignored.
KeywordSet load_keywords(const std::filesystem::path& path);

} // namespace leakscan

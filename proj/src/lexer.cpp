#include "leakscan/lexer.hpp"

#include <fstream>

#include "leakscan/error.hpp"

namespace leakscan {

uint64_t Fingerprint::total_count() const {
    uint64_t total = 0;
    for (const auto& [token, count] : counts) total += count;
    return total;
}

namespace {

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_hex_digit(unsigned char c) {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

bool is_identifier_start(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}

bool is_identifier_part(unsigned char c) { return is_identifier_start(c) || is_digit(c); }

} // namespace

Fingerprint tokenize(std::string_view context, const KeywordSet& keywords) {
    Fingerprint fp;
    const size_t n = context.size();
    size_t i = 0;
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(context[i]);
        if (c == '"' || c == '\'') {
            const size_t close = context.find(static_cast<char>(c), i + 1);
            const size_t end = close == std::string_view::npos ? n : close;
            if (end > i + 1) ++fp.counts[std::string(context.substr(i + 1, end - i - 1))];
            i = close == std::string_view::npos ? n : close + 1;
        } else if (is_identifier_start(c)) {
            size_t j = i + 1;
            while (j < n && is_identifier_part(static_cast<unsigned char>(context[j]))) ++j;
            std::string token(context.substr(i, j - i));
            if (keywords.count(token) == 0) ++fp.counts[std::move(token)];
            i = j;
        } else if (is_digit(c)) {
            size_t j = i + 1;
            if (c == '0' && j < n && (context[j] == 'x' || context[j] == 'X') && j + 1 < n &&
                is_hex_digit(static_cast<unsigned char>(context[j + 1]))) {
                j += 2;
                while (j < n && is_hex_digit(static_cast<unsigned char>(context[j]))) ++j;
            } else {
                while (j < n && is_digit(static_cast<unsigned char>(context[j]))) ++j;
                if (j + 1 < n && context[j] == '.' &&
                    is_digit(static_cast<unsigned char>(context[j + 1]))) {
                    ++j;
                    while (j < n && is_digit(static_cast<unsigned char>(context[j]))) ++j;
                }
            }
            ++fp.counts[std::string(context.substr(i, j - i))];
            i = j;
        } else {
            ++i;
        }
    }
    return fp;
}

FingerprintMap fingerprint_corpus(const Corpus& corpus, const KeywordSet& keywords) {
    FingerprintMap fingerprints;
    for (const Sample& s : corpus.samples) {
        fingerprints.emplace(s.id, tokenize(s.context, keywords));
    }
    return fingerprints;
}

const KeywordSet& default_keywords() {
    // Union of reserved words of common object-oriented languages (Java, C,
    // C++, C#, Python, JavaScript/TypeScript, Go, Ruby, PHP, Kotlin, Swift).
    // Mirrored verbatim in data/default_keywords.txt.
    static const KeywordSet keywords = [] {
        static constexpr const char* words[] = {
            "False", "None", "True", "abstract", "and", "as", "assert", "async", "await",
            "base", "begin", "bool", "boolean", "break", "byte", "case", "catch", "chan",
            "char", "checked", "class", "const", "continue", "debugger", "decimal", "def",
            "default", "defer", "del", "delegate", "delete", "do", "double", "elif", "else",
            "elsif", "end", "ensure", "enum", "event", "except", "explicit", "export",
            "extends", "extern", "fallthrough", "false", "final", "finally", "fixed",
            "float", "fn", "for", "foreach", "friend", "func", "function", "global", "go",
            "goto", "if", "implements", "implicit", "import", "in", "inline", "instanceof",
            "int", "interface", "internal", "is", "lambda", "let", "lock", "long", "map",
            "module", "mutable", "namespace", "native", "new", "nil", "none", "nonlocal",
            "not", "null", "nullptr", "object", "operator", "or", "out", "override",
            "package", "pass", "private", "protected", "public", "raise", "range",
            "readonly", "ref", "require", "rescue", "retry", "return", "sbyte", "sealed",
            "select", "self", "short", "signed", "sizeof", "static", "strictfp", "string",
            "struct", "super", "switch", "synchronized", "template", "then", "this",
            "throw", "throws", "trait", "transient", "true", "try", "type", "typedef",
            "typename", "typeof", "uint", "ulong", "unchecked", "unless", "unsafe",
            "unsigned", "until", "use", "ushort", "using", "var", "virtual", "void",
            "volatile", "when", "while", "with", "yield",
        };
        KeywordSet set;
        for (const char* w : words) set.insert(w);
        return set;
    }();
    return keywords;
}

KeywordSet load_keywords(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open keyword file: " + path.string());
    KeywordSet set;
    std::string line;
    while (std::getline(in, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const size_t last = line.find_last_not_of(" \t\r");
        set.insert(line.substr(first, last - first + 1));
    }
    return set;
}

} // namespace leakscan

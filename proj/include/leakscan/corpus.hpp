#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace leakscan {

/// One labeled corpus record, resolved to its secret context. Ingestion
/// accepts either a full file content plus the secret span, or a
/// pre-extracted context; after ingestion only the context is kept.
struct Sample {
    std::string id;
    std::string context;
    bool label = false; // true = real secret
    std::string language;
    std::optional<std::string> file_path;
};

struct Corpus {
    std::vector<Sample> samples; // ingestion order
    uint32_t window = 200;       // context half-width, in Unicode scalar values

    size_t size() const { return samples.size(); }

    /// id -> position in `samples`.
    std::unordered_map<std::string, size_t> index_by_id() const;

    /// id -> ground-truth label.
    std::unordered_map<std::string, bool> labels_by_id() const;
};

/// Number of Unicode scalar values in a UTF-8 string. Invalid bytes are
/// counted one scalar each so arbitrary byte content cannot derail offsets.
size_t utf8_length(std::string_view s);

/// Byte offsets where each scalar starts, plus a final entry at s.size().
std::vector<size_t> utf8_scalar_offsets(std::string_view s);

/// The up-to-`window` scalars before secret_start concatenated with the
/// up-to-`window` scalars after secret_end. The secret itself is excluded
/// and windows are clipped at the content boundaries, no padding.
/// Offsets and the window are measured in Unicode scalar values.
std::string extract_context(std::string_view content, size_t secret_start,
                            size_t secret_end, size_t window);

/// Reads a JSONL corpus file. Each line is one record:
///   {"id": str, "label": bool, "language": str, "file_path": str?,
///    "content": str?, "secret_start": int?, "secret_end": int?, "context": str?}
/// Exactly one of {content + offsets, context} must be present; unknown
/// fields are ignored. Throws ValidationError naming the line/record on
/// malformed JSON, duplicate ids, missing or ambiguous sources, or offsets
/// out of range; IoError if the file cannot be read.
Corpus ingest(const std::filesystem::path& path, uint32_t window = 200);

/// Stream variant of ingest; `source` names the input in error messages.
Corpus ingest_stream(std::istream& in, uint32_t window, const std::string& source);

/// Writes the canonical serialized corpus: always the `context` form.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

} // namespace leakscan

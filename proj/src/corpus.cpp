#include "leakscan/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "leakscan/error.hpp"

namespace leakscan {

using nlohmann::json;

std::unordered_map<std::string, size_t> Corpus::index_by_id() const {
    std::unordered_map<std::string, size_t> index;
    index.reserve(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) index.emplace(samples[i].id, i);
    return index;
}

std::unordered_map<std::string, bool> Corpus::labels_by_id() const {
    std::unordered_map<std::string, bool> labels;
    labels.reserve(samples.size());
    for (const Sample& s : samples) labels.emplace(s.id, s.label);
    return labels;
}

std::vector<size_t> utf8_scalar_offsets(std::string_view s) {
    std::vector<size_t> offsets;
    offsets.reserve(s.size() + 1);
    size_t i = 0;
    while (i < s.size()) {
        offsets.push_back(i);
        unsigned char lead = static_cast<unsigned char>(s[i]);
        size_t len = 1;
        if ((lead & 0xe0) == 0xc0) len = 2;
        else if ((lead & 0xf0) == 0xe0) len = 3;
        else if ((lead & 0xf8) == 0xf0) len = 4;
        size_t have = 1;
        while (have < len && i + have < s.size() &&
               (static_cast<unsigned char>(s[i + have]) & 0xc0) == 0x80) {
            ++have;
        }
        i += have == len ? len : 1; // truncated sequence: the lead byte counts alone
    }
    offsets.push_back(s.size());
    return offsets;
}

size_t utf8_length(std::string_view s) {
    return utf8_scalar_offsets(s).size() - 1;
}

std::string extract_context(std::string_view content, size_t secret_start,
                            size_t secret_end, size_t window) {
    const std::vector<size_t> offs = utf8_scalar_offsets(content);
    const size_t n = offs.size() - 1;
    if (secret_start >= secret_end || secret_end > n) {
        throw ValidationError("secret span [" + std::to_string(secret_start) + ", " +
                              std::to_string(secret_end) +
                              ") out of range for content of length " + std::to_string(n));
    }
    const size_t lo = secret_start > window ? secret_start - window : 0;
    const size_t hi = std::min(n, secret_end + window);
    std::string context;
    context.reserve(offs[secret_start] - offs[lo] + offs[hi] - offs[secret_end]);
    context.append(content.substr(offs[lo], offs[secret_start] - offs[lo]));
    context.append(content.substr(offs[secret_end], offs[hi] - offs[secret_end]));
    return context;
}

namespace {

[[noreturn]] void fail_record(const std::string& source, size_t line, const std::string& what) {
    throw ValidationError(source + ":" + std::to_string(line) + ": " + what);
}

} // namespace

Corpus ingest_stream(std::istream& in, uint32_t window, const std::string& source) {
    if (window == 0) throw ValidationError("window must be positive");
    Corpus corpus;
    corpus.window = window;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            fail_record(source, lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!record.is_object()) fail_record(source, lineno, "record is not a JSON object");

        Sample sample;
        try {
            sample.id = record.at("id").get<std::string>();
            sample.label = record.at("label").get<bool>();
            sample.language = record.at("language").get<std::string>();
            if (record.contains("file_path"))
                sample.file_path = record.at("file_path").get<std::string>();
        } catch (const json::exception& e) {
            fail_record(source, lineno, std::string("bad record field: ") + e.what());
        }

        const bool has_context = record.contains("context");
        const bool has_content = record.contains("content") || record.contains("secret_start") ||
                                 record.contains("secret_end");
        if (has_context && has_content) {
            fail_record(source, lineno, "record \"" + sample.id +
                        "\": ambiguous source (both context and content/offsets present)");
        }
        if (has_context) {
            try {
                sample.context = record.at("context").get<std::string>();
            } catch (const json::exception& e) {
                fail_record(source, lineno, std::string("bad record field: ") + e.what());
            }
        } else if (record.contains("content") && record.contains("secret_start") &&
                   record.contains("secret_end")) {
            std::string content;
            int64_t start = 0;
            int64_t end = 0;
            try {
                content = record.at("content").get<std::string>();
                start = record.at("secret_start").get<int64_t>();
                end = record.at("secret_end").get<int64_t>();
            } catch (const json::exception& e) {
                fail_record(source, lineno, std::string("bad record field: ") + e.what());
            }
            const size_t n = utf8_length(content);
            if (start < 0 || end < 0 || start >= end || static_cast<size_t>(end) > n) {
                fail_record(source, lineno, "record \"" + sample.id + "\": secret span [" +
                            std::to_string(start) + ", " + std::to_string(end) +
                            ") out of range for content of length " + std::to_string(n));
            }
            sample.context = extract_context(content, static_cast<size_t>(start),
                                             static_cast<size_t>(end), window);
        } else {
            fail_record(source, lineno, "record \"" + sample.id +
                        "\": no context source (need context or content + secret_start + secret_end)");
        }

        if (!seen.insert(sample.id).second) {
            fail_record(source, lineno, "duplicate id \"" + sample.id + "\"");
        }
        corpus.samples.push_back(std::move(sample));
    }
    return corpus;
}

Corpus ingest(const std::filesystem::path& path, uint32_t window) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file: " + path.string());
    return ingest_stream(in, window, path.string());
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus file: " + path.string());
    for (const Sample& s : corpus.samples) {
        json record{{"id", s.id},
                    {"label", s.label},
                    {"language", s.language},
                    {"context", s.context}};
        if (s.file_path) record["file_path"] = *s.file_path;
        out << record.dump() << '\n';
    }
    if (!out) throw IoError("failed writing corpus file: " + path.string());
}

} // namespace leakscan

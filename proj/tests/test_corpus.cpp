#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "leakscan/corpus.hpp"
#include "leakscan/error.hpp"

using namespace leakscan;
namespace fs = std::filesystem;

namespace {

Corpus ingest_text(const std::string& text, uint32_t window = 200) {
    std::istringstream in(text);
    return ingest_stream(in, window, "mem");
}

std::string error_of(const std::string& text, uint32_t window = 200) {
    try {
        ingest_text(text, window);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_SUITE("corpus") {

TEST_CASE("utf8_length counts scalars, not bytes") {
    CHECK(utf8_length("abc") == 3);
    CHECK(utf8_length("") == 0);
    CHECK(utf8_length("\xc3\xa9\xc3\xa9") == 2);  // "éé"
    CHECK(utf8_length("\xe4\xbd\xa0\xe5\xa5\xbd") == 2);
    // Invalid bytes count one scalar each so offsets stay well defined.
    CHECK(utf8_length("\xff\xff") == 2);
    CHECK(utf8_length("a\xff" "b") == 3);
}

TEST_CASE("utf8_scalar_offsets marks each scalar start") {
    const auto offs = utf8_scalar_offsets("a\xc3\xa9");  // "aé"
    CHECK(offs == std::vector<size_t>{0, 1, 3});
    CHECK(utf8_scalar_offsets("") == std::vector<size_t>{0});
}

TEST_CASE("extract_context clips windows and drops the secret") {
    CHECK(extract_context("abcdefKEYghijkl", 6, 9, 3) == "defghi");
    CHECK(extract_context("KEYtail", 0, 3, 200) == "tail");
    CHECK(extract_context("headKEY", 4, 7, 200) == "head");

    const std::string wide(500, 'x');
    const std::string ctx = extract_context(wide, 250, 260, 200);
    CHECK(ctx.size() == 400);

    // Window arithmetic is in scalars: one é before, one ü after.
    CHECK(extract_context("\xc3\xa9\xc3\xa9KEY\xc3\xbc\xc3\xbc", 2, 5, 1) ==
          "\xc3\xa9\xc3\xbc");
}

TEST_CASE("extract_context rejects bad spans") {
    CHECK_THROWS_WITH_AS(extract_context("abc", 2, 2, 5),
                         doctest::Contains("secret span"), ValidationError);
    CHECK_THROWS_WITH_AS(extract_context("abc", 1, 9, 5),
                         doctest::Contains("secret span"), ValidationError);
    CHECK_THROWS_WITH_AS(extract_context("abc", 3, 1, 5),
                         doctest::Contains("secret span"), ValidationError);
}

TEST_CASE("ingest accepts both record forms") {
    const std::string text =
        R"({"id":"a","label":true,"language":"java","content":"abcdefKEYghijkl","secret_start":6,"secret_end":9})"
        "\n"
        R"({"id":"b","label":false,"language":"python","context":"precooked text"})"
        "\n";
    const Corpus c = ingest_text(text, 3);
    REQUIRE(c.size() == 2);
    CHECK(c.window == 3);
    CHECK(c.samples[0].id == "a");
    CHECK(c.samples[0].context == "defghi");
    CHECK(c.samples[0].label);
    CHECK(c.samples[0].language == "java");
    CHECK(c.samples[1].context == "precooked text");
    CHECK_FALSE(c.samples[1].label);

    const auto idx = c.index_by_id();
    CHECK(idx.at("a") == 0);
    CHECK(idx.at("b") == 1);
    const auto labels = c.labels_by_id();
    CHECK(labels.at("a"));
    CHECK_FALSE(labels.at("b"));
}

TEST_CASE("ingest keeps file_path when present") {
    const Corpus c = ingest_text(
        R"({"id":"a","label":false,"language":"go","context":"x","file_path":"src/a.go"})"
        "\n");
    REQUIRE(c.size() == 1);
    REQUIRE(c.samples[0].file_path.has_value());
    CHECK(*c.samples[0].file_path == "src/a.go");
}

TEST_CASE("ingest skips blank lines") {
    const Corpus c = ingest_text(
        "\n"
        R"({"id":"a","label":false,"language":"go","context":"x"})"
        "\n\n");
    CHECK(c.size() == 1);
}

TEST_CASE("ingest reports the offending line") {
    const std::string good =
        R"({"id":"a","label":false,"language":"go","context":"x"})" "\n";
    CHECK(error_of(good + "{not json\n").find("mem:2:") != std::string::npos);
    CHECK(error_of(good + "{not json\n").find("malformed JSON") != std::string::npos);
}

TEST_CASE("ingest rejects duplicate ids") {
    const std::string rec =
        R"({"id":"a","label":false,"language":"go","context":"x"})" "\n";
    CHECK(error_of(rec + rec).find("duplicate id \"a\"") != std::string::npos);
}

TEST_CASE("ingest rejects ambiguous and missing sources") {
    CHECK(error_of(
              R"({"id":"a","label":false,"language":"go","context":"x","content":"abc","secret_start":0,"secret_end":1})"
              "\n")
              .find("ambiguous source") != std::string::npos);
    CHECK(error_of(
              R"({"id":"a","label":false,"language":"go"})" "\n")
              .find("no context source") != std::string::npos);
    // Offsets without content are not a usable source either.
    CHECK(error_of(
              R"({"id":"a","label":false,"language":"go","secret_start":0,"secret_end":1})"
              "\n")
              .find("no context source") != std::string::npos);
}

TEST_CASE("ingest rejects wrongly typed fields") {
    CHECK(error_of(
              R"({"id":7,"label":false,"language":"go","context":"x"})" "\n")
              .find("bad record field") != std::string::npos);
    CHECK(error_of(
              R"({"id":"a","label":"yes","language":"go","context":"x"})" "\n")
              .find("bad record field") != std::string::npos);
    // Negative offsets arrive as signed ints and must be caught as a span
    // error, not wrap around through an unsigned conversion.
    const std::string negative = error_of(
        R"({"id":"a","label":false,"language":"go","content":"abc","secret_start":-1,"secret_end":2})"
        "\n");
    CHECK(negative.find("secret span") != std::string::npos);
    CHECK(negative.find("[-1, 2)") != std::string::npos);
}

TEST_CASE("ingest validates the window") {
    CHECK_THROWS_WITH_AS(ingest_text("", 0),
                         doctest::Contains("window must be positive"),
                         ValidationError);
}

TEST_CASE("ingest propagates span errors with record context") {
    const std::string err = error_of(
        R"({"id":"a","label":false,"language":"go","content":"abc","secret_start":2,"secret_end":9})"
        "\n");
    CHECK(err.find("secret span") != std::string::npos);
    CHECK(err.find("mem:1:") != std::string::npos);
}

TEST_CASE("ingest on a missing file raises IoError naming the path") {
    try {
        ingest("/nonexistent/leakscan-test.jsonl");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("cannot open corpus file") != std::string::npos);
        CHECK(std::string(e.what()).find("leakscan-test.jsonl") != std::string::npos);
    }
}

TEST_CASE("save_corpus then ingest is an identity") {
    Corpus c;
    c.window = 50;
    c.samples.push_back({"s1", "password = \"hunter2\"", true, "python", std::nullopt});
    c.samples.push_back({"s2", "for (int i = 0; i < n; ++i)", false, "java",
                         std::optional<std::string>("Main.java")});

    const fs::path path =
        fs::temp_directory_path() / "leakscan_corpus_roundtrip.jsonl";
    save_corpus(c, path);
    const Corpus back = ingest(path, 50);
    fs::remove(path);

    REQUIRE(back.size() == c.size());
    for (size_t i = 0; i < c.size(); ++i) {
        CHECK(back.samples[i].id == c.samples[i].id);
        CHECK(back.samples[i].context == c.samples[i].context);
        CHECK(back.samples[i].label == c.samples[i].label);
        CHECK(back.samples[i].language == c.samples[i].language);
        CHECK(back.samples[i].file_path == c.samples[i].file_path);
    }
}

} // TEST_SUITE

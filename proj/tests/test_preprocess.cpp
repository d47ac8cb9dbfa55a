#include <doctest.h>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "cmox/preprocess.hpp"
#include "cmox/random.hpp"

using namespace cmox;

namespace {

void append_utf8(std::string& s, char32_t cp) {
    char buf[4];
    int32_t len = 0;
    UBool error = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, 4, static_cast<UChar32>(cp), error);
    if (!error) s.append(buf, static_cast<std::size_t>(len));
}

// Code points from the ranges that matter here: Latin, Dravidian scripts
// with their vowel signs, digits, punctuation, emoji, joiners, spaces.
std::string random_text(Rng& rng) {
    static const std::vector<std::pair<char32_t, char32_t>> ranges = {
        {0x20, 0x7e},     {0xc0, 0x17f},    {0x0b80, 0x0bff}, {0x0c80, 0x0cff}, {0x0d00, 0x0d7f},
        {0x0900, 0x097f}, {0x0300, 0x036f}, {0x1f300, 0x1f6ff}, {0x2000, 0x206f}, {0x0660, 0x0669},
        {0xff01, 0xff5e}, {0x3040, 0x30ff}, {0x200c, 0x200d}, {0x0009, 0x000d}};
    std::string s;
    const auto n = rng.uniform_int(30);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto& [lo, hi] = ranges[rng.uniform_int(ranges.size())];
        append_utf8(s, lo + static_cast<char32_t>(rng.uniform_int(hi - lo + 1)));
    }
    if (rng.uniform() < 0.1) s += "\xff\xfe";  // invalid bytes
    return s;
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("clean examples") {
    CHECK(clean("Trailer veratlevel!!! 👌👌 100%") == "trailer veratlevel");
    CHECK(clean("") == "");
    CHECK(clean("   ") == "");
    CHECK(clean("ENNA\tda\n\nidhu") == "enna da idhu");
    CHECK(clean("super2good") == "super good");
}

TEST_CASE("clean keeps Dravidian words whole") {
    // Vowel signs are combining marks; the word survives intact.
    CHECK(clean("வணக்கம்!!") == "வணக்கம்");
    CHECK(clean("ನಮಸ್ಕಾರ 123") == "ನಮಸ್ಕಾರ");
    CHECK(clean("നന്ദി") == "നന്ദി");
    // Joiners are dropped without splitting the word.
    CHECK(clean("ക്‍ക") == "ക്ക");
}

TEST_CASE("clean is idempotent and emits only letters, marks and single spaces") {
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const auto text = random_text(rng);
        const auto once = clean(text);
        CHECK(clean(once) == once);
        CHECK((once.empty() || (once.front() != ' ' && once.back() != ' ')));
        CHECK(once.find("  ") == std::string::npos);
        int32_t pos = 0;
        const auto* p = reinterpret_cast<const uint8_t*>(once.data());
        const auto len = static_cast<int32_t>(once.size());
        while (pos < len) {
            UChar32 c;
            U8_NEXT(p, pos, len, c);
            REQUIRE(c >= 0);
            if (c == ' ') continue;
            const auto mask = U_GET_GC_MASK(c);
            CHECK((mask & (U_GC_L_MASK | U_GC_M_MASK)) != 0);
        }
    }
}

TEST_CASE("tokenize") {
    CHECK(tokenize("enna da idhu") == std::vector<std::string>{"enna", "da", "idhu"});
    CHECK(tokenize("").empty());
    CHECK(clean_tokens("Hi!! there") == std::vector<std::string>{"hi", "there"});
}

TEST_CASE("vocabulary layout") {
    const TokenizedCorpus docs = {tokenize("a a b")};
    const auto v = Vocabulary::build(docs, 1);
    REQUIRE(v.size() == 4);
    CHECK(v.lookup("<pad>") == Vocabulary::kUnk);  // reserved tokens never come from text
    CHECK(v.token(0) == "<pad>");
    CHECK(v.token(1) == "<unk>");
    CHECK(v.lookup("a") == 2);
    CHECK(v.lookup("b") == 3);
    CHECK(v.frequency(2) == 2);

    const auto v2 = Vocabulary::build(docs, 2);
    CHECK(v2.size() == 3);
    CHECK(v2.lookup("a") == 2);
    CHECK(v2.lookup("b") == Vocabulary::kUnk);

    CHECK(Vocabulary::build({}, 1).size() == 2);
    CHECK_THROWS(v.token(9));
}

TEST_CASE("vocabulary ties are lexicographic") {
    const TokenizedCorpus docs = {{"z", "y", "x", "y"}};
    const auto v = Vocabulary::build(docs);
    CHECK(v.token(2) == "y");
    CHECK(v.token(3) == "x");
    CHECK(v.token(4) == "z");
    const auto r = Vocabulary::from_tokens(v.tokens());
    CHECK(r.tokens() == v.tokens());
    CHECK(r.lookup("z") == 4);
}

}

#include "cmox/preprocess.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <map>

#include "cmox/error.hpp"

namespace cmox {

namespace {

enum class CharClass { letter, mark, format, separator };

CharClass classify(UChar32 c) {
    switch (u_charType(c)) {
        case U_UPPERCASE_LETTER:
        case U_LOWERCASE_LETTER:
        case U_TITLECASE_LETTER:
        case U_MODIFIER_LETTER:
        case U_OTHER_LETTER:
            return CharClass::letter;
        case U_NON_SPACING_MARK:
        case U_ENCLOSING_MARK:
        case U_COMBINING_SPACING_MARK:
            return CharClass::mark;
        case U_FORMAT_CHAR:
            return CharClass::format;
        default:
            return CharClass::separator;
    }
}

void append_utf8(std::string& out, UChar32 c) {
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool error = false;
    U8_APPEND(buf, len, U8_MAX_LENGTH, c, error);
    if (!error) out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::string clean(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_break = false;
    bool in_word = false;  // last emitted code point is a letter or mark
    const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c = 0;
        U8_NEXT(bytes, i, length, c);
        if (c < 0) {
            pending_break = true;
            continue;
        }
        c = u_tolower(c);
        switch (classify(c)) {
            case CharClass::letter:
                if (pending_break && !out.empty()) out += ' ';
                pending_break = false;
                append_utf8(out, c);
                in_word = true;
                break;
            case CharClass::mark:
                // A mark only survives while attached to the current word.
                if (in_word && !pending_break) {
                    append_utf8(out, c);
                } else {
                    pending_break = true;
                }
                break;
            case CharClass::format:
                break;
            case CharClass::separator:
                pending_break = true;
                in_word = false;
                break;
        }
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view clean_text) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start < clean_text.size()) {
        auto end = clean_text.find(' ', start);
        if (end == std::string_view::npos) end = clean_text.size();
        if (end > start) tokens.emplace_back(clean_text.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

std::vector<std::string> clean_tokens(std::string_view text) { return tokenize(clean(text)); }

Vocabulary::Vocabulary() {
    add(std::string(kPadToken), 0);
    add(std::string(kUnkToken), 0);
}

void Vocabulary::add(std::string token, std::size_t freq) {
    const auto index = static_cast<int>(tokens_.size());
    if (!index_.emplace(token, index).second) {
        throw Error("vocabulary: duplicate token '" + token + "'");
    }
    tokens_.push_back(std::move(token));
    freqs_.push_back(freq);
}

Vocabulary Vocabulary::build(const TokenizedCorpus& docs, std::size_t min_freq) {
    if (min_freq < 1) throw Error("vocabulary: min_freq must be at least 1");
    std::map<std::string, std::size_t, std::less<>> counts;
    for (const auto& doc : docs) {
        for (const auto& tok : doc) ++counts[tok];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [tok, n] : counts) {
        if (n >= min_freq) kept.emplace_back(tok, n);
    }
    // counts is ordered lexicographically, so a stable sort keeps that as the tie-break.
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary vocab;
    for (auto& [tok, n] : kept) vocab.add(std::move(tok), n);
    return vocab;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens,
                                   std::vector<std::size_t> frequencies) {
    if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
        throw Error("vocabulary: token list must start with <pad>, <unk>");
    }
    if (!frequencies.empty() && frequencies.size() != tokens.size()) {
        throw Error("vocabulary: frequency list length mismatch");
    }
    Vocabulary vocab;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
        vocab.add(std::move(tokens[i]), frequencies.empty() ? 0 : frequencies[i]);
    }
    return vocab;
}

int Vocabulary::lookup(std::string_view token) const {
    const auto it = index_.find(token);
    if (it == index_.end() || it->second < 2) return kUnk;
    return it->second;
}

const std::string& Vocabulary::token(int index) const {
    if (index < 0 || static_cast<std::size_t>(index) >= tokens_.size()) {
        throw Error("vocabulary: index " + std::to_string(index) + " out of range");
    }
    return tokens_[static_cast<std::size_t>(index)];
}

}  // namespace cmox

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cmox {

/// Lowercases, then keeps letters (any script) and the combining marks
/// that attach to them. Invisible format characters are deleted; every
/// other code point (digits, punctuation, symbols, emoji, whitespace)
/// becomes a word break. Runs of breaks collapse to one space and the
/// result is trimmed. Invalid UTF-8 bytes are treated as breaks.
std::string clean(std::string_view text);

/// Splits cleaned text on single spaces. Never emits an empty token.
std::vector<std::string> tokenize(std::string_view clean_text);

/// clean() followed by tokenize().
std::vector<std::string> clean_tokens(std::string_view text);

using TokenizedCorpus = std::vector<std::vector<std::string>>;

class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr std::string_view kPadToken = "<pad>";
    static constexpr std::string_view kUnkToken = "<unk>";

    Vocabulary();

    /// Tokens with frequency >= min_freq, most frequent first, ties in
    /// lexicographic (byte) order. An empty corpus yields only PAD and UNK.
    static Vocabulary build(const TokenizedCorpus& docs, std::size_t min_freq = 1);

    /// Restores a vocabulary from its token list (index order, PAD/UNK first).
    static Vocabulary from_tokens(std::vector<std::string> tokens,
                                  std::vector<std::size_t> frequencies = {});

    int lookup(std::string_view token) const;
    const std::string& token(int index) const;
    std::size_t frequency(int index) const { return freqs_.at(static_cast<std::size_t>(index)); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::vector<std::size_t>& frequencies() const { return freqs_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    };

    void add(std::string token, std::size_t freq);

    std::vector<std::string> tokens_;
    std::vector<std::size_t> freqs_;
    std::unordered_map<std::string, int, Hash, std::equal_to<>> index_;
};

}  // namespace cmox

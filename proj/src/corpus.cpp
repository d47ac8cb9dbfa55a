#include "cmox/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <iostream>
#include <numeric>
#include <set>
#include <unordered_set>

#include "cmox/error.hpp"
#include "cmox/io.hpp"
#include "cmox/random.hpp"

namespace cmox {

namespace {

constexpr std::array<LabelCode, 6> kSixLabels = {LabelCode::nf,   LabelCode::otio,
                                                 LabelCode::otii, LabelCode::otig,
                                                 LabelCode::ou,   LabelCode::not_lang};
constexpr std::array<LabelCode, 5> kMalayalamLabels = {
    LabelCode::nf, LabelCode::otii, LabelCode::otig, LabelCode::ou, LabelCode::not_lang};

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::string_view to_string(Language lang) {
    switch (lang) {
        case Language::tamil: return "tamil";
        case Language::malayalam: return "malayalam";
        case Language::kannada: return "kannada";
    }
    return "?";
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "?";
}

Language parse_language(std::string_view name) {
    const auto n = lower_ascii(name);
    if (n == "tamil" || n == "ta") return Language::tamil;
    if (n == "malayalam" || n == "ml") return Language::malayalam;
    if (n == "kannada" || n == "kn") return Language::kannada;
    throw Error("unknown language '" + std::string(name) + "'");
}

Split parse_split(std::string_view name) {
    const auto n = lower_ascii(name);
    if (n == "train") return Split::train;
    if (n == "valid" || n == "dev") return Split::valid;
    if (n == "test") return Split::test;
    throw Error("unknown split '" + std::string(name) + "'");
}

std::span<const LabelCode> label_set(Language lang) {
    if (lang == Language::malayalam) return kMalayalamLabels;
    return kSixLabels;
}

std::string render_label(LabelCode code, Language lang) {
    switch (code) {
        case LabelCode::nf: return "Not_offensive";
        case LabelCode::otio: return "Offensive_Targeted_Insult_Other";
        case LabelCode::otii: return "Offensive_Targeted_Insult_Individual";
        case LabelCode::otig: return "Offensive_Targeted_Insult_Group";
        // The shared-task files spell it this way.
        case LabelCode::ou: return "Offensive_Untargetede";
        case LabelCode::not_lang:
            switch (lang) {
                case Language::tamil: return "not-Tamil";
                case Language::malayalam: return "not-malayalam";
                case Language::kannada: return "not-Kannada";
            }
    }
    return "?";
}

std::string short_code(LabelCode code, Language lang) {
    switch (code) {
        case LabelCode::nf: return "NF";
        case LabelCode::otio: return "OTIO";
        case LabelCode::otii: return "OTII";
        case LabelCode::otig: return "OTIG";
        case LabelCode::ou: return "OU";
        case LabelCode::not_lang:
            switch (lang) {
                case Language::tamil: return "NT";
                case Language::malayalam: return "NM";
                case Language::kannada: return "NK";
            }
    }
    return "?";
}

std::optional<LabelCode> parse_label(std::string_view text, Language lang) {
    const auto needle = lower_ascii(text);
    for (const auto code : label_set(lang)) {
        if (needle == lower_ascii(render_label(code, lang)) ||
            needle == lower_ascii(short_code(code, lang))) {
            return code;
        }
    }
    if (needle == "offensive_untargeted") return LabelCode::ou;
    return std::nullopt;
}

int label_index(Language lang, LabelCode code) {
    const auto labels = label_set(lang);
    const auto it = std::find(labels.begin(), labels.end(), code);
    if (it == labels.end()) {
        throw Error("label " + short_code(code, lang) + " is not valid for " +
                    std::string(to_string(lang)));
    }
    return static_cast<int>(it - labels.begin());
}

std::vector<std::string> codebook(Language lang) {
    std::vector<std::string> names;
    for (const auto code : label_set(lang)) names.push_back(render_label(code, lang));
    return names;
}

LabeledCorpus parse_tsv(std::string_view contents, Language lang, const TsvOptions& opts,
                        std::vector<std::string>* warnings) {
    auto warn = [&](std::string msg) {
        if (warnings) {
            warnings->push_back(std::move(msg));
        } else {
            std::cerr << "warning: " << msg << '\n';
        }
    };

    LabeledCorpus corpus;
    corpus.language = lang;
    corpus.split = opts.split;
    corpus.has_ids = opts.has_ids;
    corpus.labeled = opts.labeled;

    const auto lines = split_lines(contents);
    if (lines.empty()) {
        warn("empty corpus file");
        return corpus;
    }

    const std::size_t columns = (opts.has_ids ? 1 : 0) + 1 + (opts.labeled ? 1 : 0);
    std::string header = opts.has_ids ? "id\ttext" : "text";
    if (opts.labeled) header += "\tcategory";

    std::unordered_set<std::string> seen_ids;
    std::size_t data_row = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line_no = i + 1;
        if (i == 0 && lower_ascii(lines[i]) == header) continue;
        ++data_row;
        const auto fields = split(lines[i], '\t');
        if (fields.size() != columns) {
            throw Error("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(columns) + " tab-separated columns, found " +
                        std::to_string(fields.size()));
        }
        Record rec;
        std::size_t col = 0;
        rec.id = opts.has_ids ? std::string(fields[col++]) : "r" + std::to_string(data_row);
        rec.text = std::string(fields[col++]);
        if (opts.labeled) {
            const auto label = parse_label(fields[col], lang);
            if (!label) {
                throw Error("line " + std::to_string(line_no) + ": unknown label '" +
                            std::string(fields[col]) + "' for " + std::string(to_string(lang)));
            }
            rec.label = label;
        }
        if (!seen_ids.insert(rec.id).second) {
            throw Error("line " + std::to_string(line_no) + ": duplicate id '" + rec.id + "'");
        }
        if (rec.text.empty()) warn("line " + std::to_string(line_no) + ": empty text");
        corpus.records.push_back(std::move(rec));
    }
    if (corpus.records.empty()) warn("corpus has a header but no rows");
    return corpus;
}

LabeledCorpus load_tsv(const std::filesystem::path& path, Language lang, const TsvOptions& opts,
                       std::vector<std::string>* warnings) {
    try {
        return parse_tsv(read_file(path), lang, opts, warnings);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string to_tsv(const LabeledCorpus& corpus) {
    std::string out;
    if (corpus.has_ids) out += "id\t";
    out += "text";
    if (corpus.labeled) out += "\tcategory";
    out += '\n';
    for (const auto& rec : corpus.records) {
        if (corpus.has_ids) {
            out += rec.id;
            out += '\t';
        }
        out += rec.text;
        if (corpus.labeled) {
            if (!rec.label) throw Error("record '" + rec.id + "' has no label");
            out += '\t';
            out += render_label(*rec.label, corpus.language);
        }
        out += '\n';
    }
    return out;
}

void save_tsv(const LabeledCorpus& corpus, const std::filesystem::path& path) {
    write_file_atomic(path, to_tsv(corpus));
}

std::map<LabelCode, std::size_t> class_distribution(const LabeledCorpus& corpus) {
    std::map<LabelCode, std::size_t> counts;
    for (const auto code : label_set(corpus.language)) counts[code] = 0;
    for (const auto& rec : corpus.records) {
        if (!rec.label) throw Error("class_distribution: record '" + rec.id + "' is unlabeled");
        ++counts.at(*rec.label);
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

namespace {

// Class ratios of the shared-task training splits.
std::map<LabelCode, double> train_ratios(Language lang) {
    using L = LabelCode;
    switch (lang) {
        case Language::tamil:
            return {{L::nf, 25425}, {L::otio, 454}, {L::otii, 2343},
                    {L::otig, 2557}, {L::ou, 2906}, {L::not_lang, 1454}};
        case Language::malayalam:
            return {{L::nf, 14153}, {L::otii, 239}, {L::otig, 140}, {L::ou, 191}, {L::not_lang, 1287}};
        case Language::kannada:
            return {{L::nf, 3544}, {L::otio, 123}, {L::otii, 487},
                    {L::otig, 329}, {L::ou, 212}, {L::not_lang, 1522}};
    }
    return {};
}

std::vector<std::string> pseudo_words(Rng& rng, std::span<const std::string_view> syllables,
                                      std::size_t count, std::set<std::string>& taken) {
    std::vector<std::string> words;
    while (words.size() < count) {
        const auto n = 2 + rng.uniform_int(2);
        std::string w;
        for (std::uint64_t i = 0; i < n; ++i) w += syllables[rng.uniform_int(syllables.size())];
        if (taken.insert(w).second) words.push_back(std::move(w));
    }
    return words;
}

}  // namespace

SynthSpec default_synth_spec(Language lang, std::size_t size, std::uint64_t seed, Split split) {
    static constexpr std::string_view kLatin[] = {
        "ka", "ga", "ma", "da", "ra", "la", "na", "pa", "ta", "va", "ya", "sa", "ju",
        "hi", "bo", "ne", "lu", "ri", "ko", "chi", "the", "nu", "mo", "di", "sha"};
    static constexpr std::string_view kKannada[] = {"ಕ", "ಗ", "ಮ", "ದ", "ರ", "ಲ", "ನ", "ಪ",
                                                   "ತ", "ವ", "ಯ", "ಸ", "ಹ", "ಬ", "ಚ"};
    static constexpr std::string_view kTamil[] = {"க", "ங", "ம", "த", "ர", "ல", "ந", "ப",
                                                 "ட", "வ", "ய", "ச", "ழ", "ள", "ன"};
    static constexpr std::string_view kMalayalam[] = {"ക", "ഗ", "മ", "ദ", "ര", "ല", "ന", "പ",
                                                     "ത", "വ", "യ", "സ", "ഹ", "ബ", "ച"};
    static constexpr std::string_view kDevanagari[] = {"क", "ग", "म", "द", "र", "ल", "न", "प",
                                                      "त", "व", "य", "स", "ह", "ब", "च"};
    static const std::vector<std::string> kEnglish = {
        "movie", "trailer", "super", "bro", "sir", "waiting", "fans", "song", "mass",
        "video", "release", "hero", "level", "the", "is", "this", "for", "all", "from",
        "music", "director", "first", "day", "show", "like", "view", "team", "looks"};

    std::span<const std::string_view> script;
    switch (lang) {
        case Language::tamil: script = kTamil; break;
        case Language::malayalam: script = kMalayalam; break;
        case Language::kannada: script = kKannada; break;
    }

    // Pools depend only on the language, not on the corpus seed, so that
    // train/valid/test corpora generated with different seeds share a vocabulary.
    Rng rng(derive_seed(0x5eed, static_cast<std::uint64_t>(lang)));
    std::set<std::string> taken(kEnglish.begin(), kEnglish.end());

    SynthSpec spec;
    spec.language = lang;
    spec.split = split;
    spec.size = size;
    spec.seed = seed;
    spec.class_weights = train_ratios(lang);

    spec.shared_pool = kEnglish;
    for (auto& w : pseudo_words(rng, kLatin, 40, taken)) spec.shared_pool.push_back(std::move(w));
    for (auto& w : pseudo_words(rng, script, 20, taken)) spec.shared_pool.push_back(std::move(w));

    const auto offensive_common = pseudo_words(rng, kLatin, 10, taken);
    for (const auto& [code, weight] : spec.class_weights) {
        std::vector<std::string> pool;
        if (code == LabelCode::not_lang) {
            pool = pseudo_words(rng, kDevanagari, 20, taken);
        } else {
            pool = pseudo_words(rng, kLatin, 8, taken);
            for (auto& w : pseudo_words(rng, script, 4, taken)) pool.push_back(std::move(w));
            if (code != LabelCode::nf) {
                pool.insert(pool.end(), offensive_common.begin(), offensive_common.end());
            }
        }
        spec.class_pools[code] = std::move(pool);
    }
    return spec;
}

LabeledCorpus synth_generate(const SynthSpec& spec) {
    if (spec.size < 1) throw Error("synth_generate: size must be at least 1");
    if (spec.class_weights.empty()) throw Error("synth_generate: no class weights");
    if (spec.shared_pool.empty()) throw Error("synth_generate: shared token pool is empty");
    if (spec.min_tokens < 1 || spec.max_tokens < spec.min_tokens) {
        throw Error("synth_generate: invalid token length range");
    }
    const auto labels = label_set(spec.language);
    double total = 0.0;
    for (const auto& [code, weight] : spec.class_weights) {
        if (std::find(labels.begin(), labels.end(), code) == labels.end()) {
            throw Error("synth_generate: class " + short_code(code, spec.language) +
                        " is not valid for " + std::string(to_string(spec.language)));
        }
        if (!(weight > 0.0)) throw Error("synth_generate: class weights must be positive");
        const auto pool = spec.class_pools.find(code);
        if (pool == spec.class_pools.end() || pool->second.empty()) {
            throw Error("synth_generate: token pool for " + short_code(code, spec.language) +
                        " is empty");
        }
        total += weight;
    }

    // Largest-remainder apportionment of the record budget.
    struct Quota {
        LabelCode code;
        std::size_t count;
        double remainder;
    };
    std::vector<Quota> quotas;
    std::size_t assigned = 0;
    for (const auto& [code, weight] : spec.class_weights) {
        const double exact = static_cast<double>(spec.size) * weight / total;
        const auto whole = static_cast<std::size_t>(exact);
        quotas.push_back({code, whole, exact - static_cast<double>(whole)});
        assigned += whole;
    }
    std::vector<std::size_t> order(quotas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return quotas[a].remainder > quotas[b].remainder;
    });
    for (std::size_t i = 0; assigned < spec.size; ++i, ++assigned) ++quotas[order[i]].count;

    std::vector<LabelCode> assignment;
    assignment.reserve(spec.size);
    for (const auto& q : quotas) assignment.insert(assignment.end(), q.count, q.code);

    Rng rng(spec.seed);
    rng.shuffle(std::span(assignment));

    static const std::vector<std::string> kNoise = {"!!!", "😂😂", "👌", "100%", "...", "🔥🔥🔥",
                                                    "2021", "#trending", "??", "❤️"};
    LabeledCorpus corpus;
    corpus.language = spec.language;
    corpus.split = spec.split;
    corpus.has_ids = true;
    corpus.labeled = true;
    corpus.records.reserve(spec.size);
    const auto span = static_cast<std::uint64_t>(spec.max_tokens - spec.min_tokens + 1);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        const auto code = assignment[i];
        const auto& pool = spec.class_pools.at(code);
        const auto n_tokens = static_cast<std::size_t>(spec.min_tokens) + rng.uniform_int(span);
        std::string text;
        for (std::size_t t = 0; t < n_tokens; ++t) {
            if (t > 0) text += ' ';
            if (rng.uniform() < spec.class_token_rate) {
                text += pool[rng.uniform_int(pool.size())];
            } else {
                text += spec.shared_pool[rng.uniform_int(spec.shared_pool.size())];
            }
        }
        if (rng.uniform() < spec.noise_rate) {
            text += ' ';
            text += kNoise[rng.uniform_int(kNoise.size())];
        }
        Record rec;
        rec.id = std::string(to_string(spec.split)) + "-" + std::to_string(i + 1);
        rec.text = std::move(text);
        rec.label = code;
        corpus.records.push_back(std::move(rec));
    }
    return corpus;
}

}  // namespace cmox

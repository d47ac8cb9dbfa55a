#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cmox {

enum class Language : std::uint8_t { tamil, malayalam, kannada };
enum class Split : std::uint8_t { train, valid, test };

/// The six shared-task classes. `not_lang` renders as not-Tamil,
/// not-malayalam or not-Kannada depending on the corpus language.
enum class LabelCode : std::uint8_t { nf, otio, otii, otig, ou, not_lang };

std::string_view to_string(Language lang);
std::string_view to_string(Split split);
Language parse_language(std::string_view name);
Split parse_split(std::string_view name);

/// Labels valid for a language, in canonical codebook order.
/// Malayalam has no OTIO class.
std::span<const LabelCode> label_set(Language lang);

/// Dataset spelling of a label, e.g. "Offensive_Targeted_Insult_Group".
std::string render_label(LabelCode code, Language lang);
/// Short code: NF, OTIO, OTII, OTIG, OU, NT/NM/NK.
std::string short_code(LabelCode code, Language lang);
/// Accepts the dataset spelling or the short code, case-insensitively.
/// Returns nullopt when the string is not a label of this language.
std::optional<LabelCode> parse_label(std::string_view text, Language lang);

/// Position of `code` within label_set(lang); throws if absent.
int label_index(Language lang, LabelCode code);
/// Rendered names of label_set(lang), the codebook stored with models.
std::vector<std::string> codebook(Language lang);

struct Record {
    std::string id;
    std::string text;
    std::optional<LabelCode> label;

    bool operator==(const Record&) const = default;
};

struct LabeledCorpus {
    Language language = Language::tamil;
    Split split = Split::train;
    std::vector<Record> records;
    bool has_ids = false;  // ids came from the file (or generator) and are written back
    bool labeled = true;

    std::size_t size() const { return records.size(); }
};

struct TsvOptions {
    bool has_ids = false;
    bool labeled = true;
    Split split = Split::train;
};

/// Parses a corpus TSV. Rows are "text\tlabel" or "id\ttext\tlabel"
/// (label column absent when !labeled). A header row "text\tcategory"
/// (with a leading "id" column when has_ids) is skipped. Missing ids are
/// synthesized as "r<row>" with 1-based data-row numbers.
/// Non-fatal issues are appended to `warnings`, or printed to stderr when
/// `warnings` is null.
LabeledCorpus load_tsv(const std::filesystem::path& path, Language lang, const TsvOptions& opts,
                       std::vector<std::string>* warnings = nullptr);
LabeledCorpus parse_tsv(std::string_view contents, Language lang, const TsvOptions& opts,
                        std::vector<std::string>* warnings = nullptr);

std::string to_tsv(const LabeledCorpus& corpus);
void save_tsv(const LabeledCorpus& corpus, const std::filesystem::path& path);

/// Per-class record counts; every label of the language is present.
std::map<LabelCode, std::size_t> class_distribution(const LabeledCorpus& corpus);

struct SynthSpec {
    Language language = Language::kannada;
    Split split = Split::train;
    std::map<LabelCode, double> class_weights;
    std::vector<std::string> shared_pool;
    std::map<LabelCode, std::vector<std::string>> class_pools;
    double class_token_rate = 0.3;  // probability a token comes from the class pool
    double noise_rate = 0.1;        // probability of appending an emoji/number/punctuation run
    std::size_t size = 1000;
    std::uint64_t seed = 7;
    int min_tokens = 3;
    int max_tokens = 15;
};

/// Class weights equal to the training-split class ratios of the
/// shared-task data for `lang`, with generated code-mixed token pools.
SynthSpec default_synth_spec(Language lang, std::size_t size, std::uint64_t seed,
                             Split split = Split::train);

/// Deterministic synthetic corpus. Class counts are the largest-remainder
/// apportionment of `size` by weight (within one record of the exact
/// quota); record order is a seeded shuffle.
LabeledCorpus synth_generate(const SynthSpec& spec);

}  // namespace cmox

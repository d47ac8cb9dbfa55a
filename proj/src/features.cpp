#include "cmox/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_set>

#include "cmox/error.hpp"
#include "cmox/io.hpp"
#include "cmox/random.hpp"

namespace cmox {

double SparseVector::at(int index) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                     [](const SparseEntry& e, int i) { return e.index < i; });
    return (it != entries.end() && it->index == index) ? it->value : 0.0;
}

double SparseVector::norm() const {
    double sq = 0.0;
    for (const auto& e : entries) sq += e.value * e.value;
    return std::sqrt(sq);
}

double SparseVector::dot(std::span<const double> dense) const {
    double s = 0.0;
    for (const auto& e : entries) s += e.value * dense[static_cast<std::size_t>(e.index)];
    return s;
}

TfidfModel TfidfModel::fit(const TokenizedCorpus& docs) {
    if (docs.empty()) throw Error("fit_tfidf: empty corpus");
    TfidfModel model;
    model.vocab_ = Vocabulary::build(docs, 1);
    model.n_docs_ = docs.size();
    std::vector<std::size_t> df(model.vocab_.size(), 0);
    std::vector<int> seen;
    for (const auto& doc : docs) {
        seen.clear();
        for (const auto& tok : doc) seen.push_back(model.vocab_.lookup(tok));
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (const int idx : seen) ++df[static_cast<std::size_t>(idx)];
    }
    const double n = static_cast<double>(docs.size());
    model.idf_.resize(df.size());
    for (std::size_t i = 0; i < df.size(); ++i) {
        model.idf_[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
    }
    return model;
}

TfidfModel TfidfModel::restore(Vocabulary vocab, std::vector<double> idf, std::size_t n_docs) {
    if (idf.size() != vocab.size()) throw Error("tf-idf: idf table does not match vocabulary");
    TfidfModel model;
    model.vocab_ = std::move(vocab);
    model.idf_ = std::move(idf);
    model.n_docs_ = n_docs;
    return model;
}

SparseVector TfidfModel::transform(std::span<const std::string> tokens) const {
    std::map<int, double> counts;
    for (const auto& tok : tokens) counts[vocab_.lookup(tok)] += 1.0;
    SparseVector v;
    v.dim = dim();
    v.entries.reserve(counts.size());
    for (const auto& [idx, tf] : counts) {
        v.entries.push_back({idx, tf * idf_[static_cast<std::size_t>(idx)]});
    }
    const double norm = v.norm();
    if (norm > 0.0) {
        for (auto& e : v.entries) e.value /= norm;
    }
    return v;
}

std::vector<SparseVector> TfidfModel::transform_all(const TokenizedCorpus& docs) const {
    std::vector<SparseVector> out;
    out.reserve(docs.size());
    for (const auto& doc : docs) out.push_back(transform(doc));
    return out;
}

namespace {

bool parse_double(std::string_view s, double& out) {
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string_view> fields_of(std::string_view line) {
    std::vector<std::string_view> out;
    for (auto f : split(line, ' ')) {
        if (!f.empty()) out.push_back(f);
    }
    return out;
}

}  // namespace

EmbeddingTable parse_pretrained_vectors(std::string_view contents, const Vocabulary& vocab, int dim,
                                        std::uint64_t seed) {
    if (dim < 1) throw Error("pretrained vectors: dimension must be positive");
    const auto rows = static_cast<Eigen::Index>(vocab.size());
    EmbeddingTable table;
    table.matrix.resize(rows, dim);
    Rng rng(seed);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) table.matrix(r, c) = 0.01 * rng.normal();
    }

    const auto lines = split_lines(contents);
    std::vector<bool> found(vocab.size(), false);
    int file_dim = -1;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line_no = std::to_string(i + 1);
        const auto fields = fields_of(lines[i]);
        if (fields.empty()) continue;
        if (i == 0 && fields.size() == 2) {
            double count = 0.0;
            double header_dim = 0.0;
            if (parse_double(fields[0], count) && parse_double(fields[1], header_dim)) {
                if (static_cast<int>(header_dim) != dim) {
                    throw Error("pretrained vectors: header declares dimension " +
                                std::string(fields[1]) + ", expected " + std::to_string(dim));
                }
                file_dim = dim;
                continue;
            }
        }
        const int line_dim = static_cast<int>(fields.size()) - 1;
        if (file_dim < 0) {
            file_dim = line_dim;
            if (file_dim != dim) {
                throw Error("pretrained vectors: line " + line_no + " has dimension " +
                            std::to_string(line_dim) + ", expected " + std::to_string(dim));
            }
        } else if (line_dim != file_dim) {
            throw Error("pretrained vectors: line " + line_no + " has dimension " +
                        std::to_string(line_dim) + ", previous lines have " +
                        std::to_string(file_dim));
        }
        Eigen::RowVectorXd values(dim);
        for (int c = 0; c < dim; ++c) {
            if (!parse_double(fields[static_cast<std::size_t>(c) + 1], values(c))) {
                throw Error("pretrained vectors: line " + line_no + ": cannot parse value '" +
                            std::string(fields[static_cast<std::size_t>(c) + 1]) + "'");
            }
        }
        const int idx = vocab.lookup(fields[0]);
        if (idx < 2 || found[static_cast<std::size_t>(idx)]) continue;
        found[static_cast<std::size_t>(idx)] = true;
        table.matrix.row(idx) = values;
    }
    table.matrix.row(Vocabulary::kPad).setZero();
    const auto candidates = vocab.size() > 2 ? vocab.size() - 2 : 0;
    const auto hits = static_cast<std::size_t>(std::count(found.begin(), found.end(), true));
    table.coverage = candidates == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(candidates);
    return table;
}

EmbeddingTable load_pretrained_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                                       int dim, std::uint64_t seed) {
    try {
        return parse_pretrained_vectors(read_file(path), vocab, dim, seed);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

IdSequence encode_sequence(const Vocabulary& vocab, std::span<const std::string> tokens, int max_len) {
    if (max_len < 1) throw Error("encode_sequence: max_len must be at least 1");
    IdSequence seq;
    seq.ids.assign(static_cast<std::size_t>(max_len), Vocabulary::kPad);
    const auto n = std::min(tokens.size(), static_cast<std::size_t>(max_len));
    for (std::size_t i = 0; i < n; ++i) seq.ids[i] = vocab.lookup(tokens[i]);
    seq.true_length = static_cast<int>(n);
    return seq;
}

std::vector<std::string> decode_sequence(const Vocabulary& vocab, const IdSequence& seq) {
    std::vector<std::string> out;
    for (int i = 0; i < seq.true_length; ++i) out.push_back(vocab.token(seq.ids[static_cast<std::size_t>(i)]));
    return out;
}

}  // namespace cmox

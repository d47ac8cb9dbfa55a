#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cmox/preprocess.hpp"

namespace cmox {

struct SparseEntry {
    int index = 0;
    double value = 0.0;

    bool operator==(const SparseEntry&) const = default;
};

/// Sparse feature vector with strictly increasing indices.
struct SparseVector {
    std::size_t dim = 0;
    std::vector<SparseEntry> entries;

    double at(int index) const;
    double norm() const;
    double dot(std::span<const double> dense) const;
};

/// Unigram tf-idf: raw counts times smoothed idf ln((1+N)/(1+df)) + 1,
/// then L2 normalization. Out-of-vocabulary tokens count toward UNK.
class TfidfModel {
public:
    static TfidfModel fit(const TokenizedCorpus& docs);
    static TfidfModel restore(Vocabulary vocab, std::vector<double> idf, std::size_t n_docs);

    SparseVector transform(std::span<const std::string> tokens) const;
    std::vector<SparseVector> transform_all(const TokenizedCorpus& docs) const;

    double idf(int index) const { return idf_.at(static_cast<std::size_t>(index)); }
    const std::vector<double>& idf_table() const { return idf_; }
    const Vocabulary& vocabulary() const { return vocab_; }
    std::size_t n_docs() const { return n_docs_; }
    std::size_t dim() const { return vocab_.size(); }

private:
    Vocabulary vocab_;
    std::vector<double> idf_;
    std::size_t n_docs_ = 0;
};

struct EmbeddingTable {
    Eigen::MatrixXd matrix;  // rows = vocabulary indices, row 0 (PAD) is zero
    double coverage = 0.0;   // fraction of non-reserved tokens found in the file

    Eigen::Index dim() const { return matrix.cols(); }
};

/// Reads a word-vector text file ("token v1 ... vd" per line, optional
/// "count dim" header). Tokens missing from the file get N(0, 0.01^2)
/// rows drawn from `seed` in index order.
EmbeddingTable load_pretrained_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                                       int dim, std::uint64_t seed = 0);
EmbeddingTable parse_pretrained_vectors(std::string_view contents, const Vocabulary& vocab, int dim,
                                        std::uint64_t seed = 0);

struct IdSequence {
    std::vector<int> ids;  // length max_len, PAD after true_length
    int true_length = 0;
};

IdSequence encode_sequence(const Vocabulary& vocab, std::span<const std::string> tokens, int max_len);
std::vector<std::string> decode_sequence(const Vocabulary& vocab, const IdSequence& seq);

}  // namespace cmox

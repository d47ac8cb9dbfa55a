#pragma once

#include <vector>

#include "cmox/features.hpp"
#include "cmox/linear_models.hpp"

namespace testing {

inline cmox::SparseVector sparse(const std::vector<double>& dense) {
    cmox::SparseVector v;
    v.dim = dense.size();
    for (std::size_t j = 0; j < dense.size(); ++j) {
        if (dense[j] != 0.0) v.entries.push_back({static_cast<int>(j), dense[j]});
    }
    return v;
}

inline cmox::Dataset dataset(const std::vector<std::vector<double>>& rows, std::vector<int> y, int k) {
    cmox::Dataset d;
    for (const auto& r : rows) d.X.push_back(sparse(r));
    d.y = std::move(y);
    for (int c = 0; c < k; ++c) d.labels.push_back("c" + std::to_string(c));
    return d;
}

// Two well separated clusters in 2-D.
inline cmox::Dataset toy_separable() {
    return dataset({{1.0, 0.0}, {0.9, 0.2}, {0.0, 1.0}, {0.2, 0.9}}, {0, 0, 1, 1}, 2);
}

}  // namespace testing

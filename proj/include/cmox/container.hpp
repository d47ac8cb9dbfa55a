#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cmox {

inline constexpr std::string_view kContainerFormat = "cmox-model/1";

struct Tensor {
    std::string name;
    std::vector<std::int64_t> shape;
    std::vector<double> data;  // row-major
};

/// Model file pair: `<stem>.json` manifest and `<stem>.bin` payload of
/// little-endian 8-byte floats. Each tensor is listed in the manifest
/// with its shape and element offset into the payload.
class ModelContainer {
public:
    nlohmann::json manifest = nlohmann::json::object();

    void add(std::string name, std::vector<std::int64_t> shape, std::vector<double> data);
    void add_matrix(std::string name, const Eigen::MatrixXd& m);
    void add_vector(std::string name, const Eigen::VectorXd& v);

    const Tensor& get(std::string_view name) const;
    Eigen::MatrixXd matrix(std::string_view name) const;
    Eigen::VectorXd vector(std::string_view name) const;
    bool has(std::string_view name) const;
    const std::vector<Tensor>& tensors() const { return tensors_; }

    /// Writes `path` (the manifest) and a sibling payload with extension .bin.
    void write(const std::filesystem::path& path) const;
    static ModelContainer read(const std::filesystem::path& path);

private:
    std::vector<Tensor> tensors_;
};

}  // namespace cmox

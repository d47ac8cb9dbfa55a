#include "cmox/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "cmox/error.hpp"
#include "cmox/io.hpp"

namespace cmox {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
        return r;
    }
    return v;
}

std::int64_t element_count(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (const auto d : shape) n *= d;
    return n;
}

}  // namespace

void ModelContainer::add(std::string name, std::vector<std::int64_t> shape, std::vector<double> data) {
    if (has(name)) throw Error("container: duplicate tensor '" + name + "'");
    if (element_count(shape) != static_cast<std::int64_t>(data.size())) {
        throw Error("container: tensor '" + name + "' shape does not match its data");
    }
    tensors_.push_back({std::move(name), std::move(shape), std::move(data)});
}

void ModelContainer::add_matrix(std::string name, const Eigen::MatrixXd& m) {
    std::vector<double> data(static_cast<std::size_t>(m.size()));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        data.data(), m.rows(), m.cols()) = m;
    add(std::move(name), {m.rows(), m.cols()}, std::move(data));
}

void ModelContainer::add_vector(std::string name, const Eigen::VectorXd& v) {
    add(std::move(name), {v.size()}, std::vector<double>(v.data(), v.data() + v.size()));
}

bool ModelContainer::has(std::string_view name) const {
    return std::any_of(tensors_.begin(), tensors_.end(), [&](const Tensor& t) { return t.name == name; });
}

const Tensor& ModelContainer::get(std::string_view name) const {
    for (const auto& t : tensors_) {
        if (t.name == name) return t;
    }
    throw Error("container: missing tensor '" + std::string(name) + "'");
}

Eigen::MatrixXd ModelContainer::matrix(std::string_view name) const {
    const auto& t = get(name);
    if (t.shape.size() != 2) throw Error("container: tensor '" + t.name + "' is not a matrix");
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        t.data.data(), t.shape[0], t.shape[1]);
}

Eigen::VectorXd ModelContainer::vector(std::string_view name) const {
    const auto& t = get(name);
    if (t.shape.size() != 1) throw Error("container: tensor '" + t.name + "' is not a vector");
    return Eigen::Map<const Eigen::VectorXd>(t.data.data(), t.shape[0]);
}

void ModelContainer::write(const std::filesystem::path& path) const {
    auto payload_path = path;
    payload_path.replace_extension(".bin");

    nlohmann::json doc = manifest;
    doc["format"] = kContainerFormat;
    doc["payload"] = payload_path.filename().string();
    auto listing = nlohmann::json::array();
    std::string payload;
    std::int64_t offset = 0;
    for (const auto& t : tensors_) {
        listing.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
        for (const double v : t.data) {
            const auto bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
            char buf[8];
            std::memcpy(buf, &bits, 8);
            payload.append(buf, 8);
        }
        offset += static_cast<std::int64_t>(t.data.size());
    }
    doc["tensors"] = std::move(listing);
    write_file_atomic(payload_path, payload);
    write_file_atomic(path, doc.dump(2) + "\n");
}

ModelContainer ModelContainer::read(const std::filesystem::path& path) {
    ModelContainer c;
    try {
        c.manifest = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": invalid manifest: " + e.what());
    }
    if (c.manifest.value("format", "") != kContainerFormat) {
        throw Error(path.string() + ": not a " + std::string(kContainerFormat) + " manifest");
    }
    const auto payload_path = path.parent_path() / c.manifest.at("payload").get<std::string>();
    const auto payload = read_file(payload_path);
    for (const auto& entry : c.manifest.at("tensors")) {
        Tensor t;
        t.name = entry.at("name").get<std::string>();
        t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
        const auto offset = entry.at("offset").get<std::int64_t>();
        const auto n = element_count(t.shape);
        if (offset < 0 || static_cast<std::size_t>((offset + n) * 8) > payload.size()) {
            throw Error(path.string() + ": tensor '" + t.name + "' exceeds payload");
        }
        t.data.resize(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, payload.data() + (offset + i) * 8, 8);
            t.data[static_cast<std::size_t>(i)] = std::bit_cast<double>(to_little_endian(bits));
        }
        c.tensors_.push_back(std::move(t));
    }
    c.manifest.erase("tensors");
    c.manifest.erase("payload");
    c.manifest.erase("format");
    return c;
}

}  // namespace cmox

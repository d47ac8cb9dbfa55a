#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cmox/container.hpp"
#include "cmox/error.hpp"
#include "cmox/io.hpp"

using namespace cmox;
namespace fs = std::filesystem;

TEST_SUITE("container") {

TEST_CASE("write and read back") {
    const auto dir = fs::temp_directory_path() / "cmox_container_test";
    fs::remove_all(dir);
    ModelContainer c;
    c.manifest = {{"kind", "demo"}, {"C", 0.4}};
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, -0.1;
    c.add_matrix("w", m);
    c.add_vector("b", Eigen::Vector2d(0.5, -1e-300));
    c.write(dir / "model.json");
    CHECK(fs::exists(dir / "model.bin"));
    CHECK(fs::file_size(dir / "model.bin") == 8 * 8);

    const auto r = ModelContainer::read(dir / "model.json");
    CHECK(r.manifest.at("kind") == "demo");
    CHECK(r.manifest.at("C") == 0.4);
    CHECK(r.matrix("w") == m);
    CHECK(r.vector("b")(1) == -1e-300);
    CHECK(r.has("w"));
    CHECK_FALSE(r.has("nope"));
    CHECK_THROWS_AS(r.get("nope"), Error);

    // Identical content gives identical bytes.
    c.write(dir / "again.json");
    CHECK(read_file(dir / "model.bin") == read_file(dir / "again.bin"));
    fs::remove_all(dir);
}

TEST_CASE("corrupt files are rejected") {
    const auto dir = fs::temp_directory_path() / "cmox_container_bad";
    fs::remove_all(dir);
    ModelContainer c;
    c.add("t", {4}, {1, 2, 3, 4});
    c.write(dir / "m.json");
    write_file_atomic(dir / "m.bin", "short");
    CHECK_THROWS_AS(ModelContainer::read(dir / "m.json"), Error);
    write_file_atomic(dir / "x.json", R"({"format": "other"})");
    CHECK_THROWS_AS(ModelContainer::read(dir / "x.json"), Error);
    write_file_atomic(dir / "y.json", "{not json");
    CHECK_THROWS_AS(ModelContainer::read(dir / "y.json"), Error);
    CHECK_THROWS_AS(ModelContainer::read(dir / "missing.json"), Error);
    CHECK_THROWS_AS(c.add("bad", {3}, {1.0}), Error);
    fs::remove_all(dir);
}

}

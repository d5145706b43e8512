#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "svskit/rng.hpp"
#include "svskit/tensor.hpp"

using namespace svskit;

namespace {
std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
} // namespace

TEST_CASE("tensor shape helpers") {
    TensorData t = TensorData::matrix(3, 4, 1.5);
    CHECK(t.rank() == 2);
    CHECK(t.rows() == 3);
    CHECK(t.cols() == 4);
    CHECK(t.numel() == 12);
    CHECK(t(2, 3) == 1.5);
    t(1, 2) = -2.0;
    CHECK(t.data[1 * 4 + 2] == -2.0);
    CHECK(shape_string({3, 4}) == "[3, 4]");
    CHECK(shape_numel({2, 3, 4}) == 24);
    CHECK(same_shape(t, TensorData::matrix(3, 4)));
    CHECK_FALSE(same_shape(t, TensorData::matrix(4, 3)));
}

TEST_CASE("check_finite raises with context") {
    TensorData t = TensorData::matrix(2, 2, 0.0);
    CHECK_NOTHROW(check_finite(t, "ok"));
    t(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(check_finite(t, "badop"), doctest::Contains("badop"),
                         std::runtime_error);
    t(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(check_finite(t, "badop"), std::runtime_error);
}

TEST_CASE("tensor file round trip is bit exact for float32 payloads") {
    Rng rng(7);
    TensorData t = TensorData::matrix(5, 9);
    for (double& v : t.data) v = static_cast<double>(static_cast<float>(rng.gaussian()));
    const std::string path = temp_path("svskit_tensor_roundtrip.emb");
    write_tensor_file(path, t);
    const TensorData back = read_tensor_file(path);
    REQUIRE(back.shape == t.shape);
    for (std::size_t i = 0; i < t.numel(); ++i) CHECK(back.data[i] == t.data[i]);
    std::remove(path.c_str());
}

TEST_CASE("tensor file header layout: magic, rank, dims, little-endian f32") {
    TensorData t;
    t.shape = {2};
    t.data = {1.0, -2.0};
    const std::string path = temp_path("svskit_tensor_header.emb");
    write_tensor_file(path, t);
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() == 4 + 4 + 4 + 2 * 4);
    CHECK(bytes.substr(0, 4) == "EMB1");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // rank, little-endian u32
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);  // dim 0
    // 1.0f = 0x3f800000 little-endian
    CHECK(static_cast<unsigned char>(bytes[12]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[15]) == 0x3f);
    std::remove(path.c_str());
}

TEST_CASE("tensor file validation errors") {
    const std::string path = temp_path("svskit_tensor_bad.emb");
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE";
    }
    CHECK_THROWS(read_tensor_file(path));
    {
        std::ofstream out(path, std::ios::binary);
        out << "EMB1";  // truncated: no rank
    }
    CHECK_THROWS(read_tensor_file(path));
    CHECK_THROWS(read_tensor_file(temp_path("svskit_missing_file.emb")));
    std::remove(path.c_str());
}

TEST_CASE("stream-level tensor records concatenate") {
    TensorData a = TensorData::matrix(1, 2, 3.0);
    TensorData b = TensorData::matrix(2, 1, -1.0);
    std::ostringstream os(std::ios::binary);
    write_tensor(os, a);
    write_tensor(os, b);
    std::istringstream is(os.str(), std::ios::binary);
    const TensorData ra = read_tensor(is, "record a");
    const TensorData rb = read_tensor(is, "record b");
    CHECK(ra.shape == a.shape);
    CHECK(rb.shape == b.shape);
    CHECK(ra.data == a.data);
    CHECK(rb.data == b.data);
}

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace svskit {

/// Dense row-major tensor of doubles. Arithmetic runs in double precision;
/// the on-disk container stores 32-bit floats (see write_tensor).
struct TensorData {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    TensorData() = default;
    explicit TensorData(std::vector<std::size_t> s, double fill = 0.0);

    static TensorData vector(std::size_t n, double fill = 0.0);
    static TensorData matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }

    // rank-2 accessors
    std::size_t rows() const;
    std::size_t cols() const;
    double& operator()(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
};

bool same_shape(const TensorData& a, const TensorData& b);
std::string shape_string(const std::vector<std::size_t>& shape);
std::size_t shape_numel(const std::vector<std::size_t>& shape);

/// Raises std::runtime_error if any element is NaN or infinite.
void check_finite(const TensorData& t, const char* context);

// Tensor/embedding container: magic "EMB1", u32 rank, u32 per-dimension
// sizes, little-endian float32 payload, row-major.
void write_tensor(std::ostream& out, const TensorData& t);
TensorData read_tensor(std::istream& in, const std::string& context);
void write_tensor_file(const std::string& path, const TensorData& t);
TensorData read_tensor_file(const std::string& path);

} // namespace svskit

#include "svskit/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace svskit {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& context) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error("truncated tensor data while reading " + context);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint32_t float_bits(float f) {
    std::uint32_t u = 0;
    static_assert(sizeof(float) == 4, "float must be 32-bit");
    std::memcpy(&u, &f, 4);
    return u;
}

float bits_float(std::uint32_t u) {
    float f = 0.0f;
    std::memcpy(&f, &u, 4);
    return f;
}

} // namespace

TensorData::TensorData(std::vector<std::size_t> s, double fill)
    : shape(std::move(s)), data(shape_numel(shape), fill) {}

TensorData TensorData::vector(std::size_t n, double fill) {
    return TensorData(std::vector<std::size_t>{n}, fill);
}

TensorData TensorData::matrix(std::size_t rows, std::size_t cols, double fill) {
    return TensorData(std::vector<std::size_t>{rows, cols}, fill);
}

std::size_t TensorData::rows() const {
    if (rank() != 2) throw std::runtime_error("rows() requires a rank-2 tensor, got " + shape_string(shape));
    return shape[0];
}

std::size_t TensorData::cols() const {
    if (rank() != 2) throw std::runtime_error("cols() requires a rank-2 tensor, got " + shape_string(shape));
    return shape[1];
}

bool same_shape(const TensorData& a, const TensorData& b) { return a.shape == b.shape; }

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

void check_finite(const TensorData& t, const char* context) {
    for (double v : t.data) {
        if (!std::isfinite(v)) {
            throw std::runtime_error(std::string("non-finite value in ") + context);
        }
    }
}

void write_tensor(std::ostream& out, const TensorData& t) {
    if (t.rank() == 0) throw std::runtime_error("cannot serialize a rank-0 tensor");
    if (t.data.size() != shape_numel(t.shape)) {
        throw std::runtime_error("tensor payload does not match shape " + shape_string(t.shape));
    }
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.data) put_u32(out, float_bits(static_cast<float>(v)));
}

TensorData read_tensor(std::istream& in, const std::string& context) {
    std::uint32_t rank = get_u32(in, context);
    if (rank == 0 || rank > 8) {
        throw std::runtime_error("unreasonable tensor rank " + std::to_string(rank) + " in " + context);
    }
    TensorData t;
    t.shape.resize(rank);
    std::size_t numel = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        t.shape[i] = get_u32(in, context);
        numel *= t.shape[i];
    }
    if (numel > (std::size_t{1} << 31)) {
        throw std::runtime_error("tensor too large in " + context);
    }
    t.data.resize(numel);
    for (std::size_t i = 0; i < numel; ++i) {
        t.data[i] = static_cast<double>(bits_float(get_u32(in, context)));
    }
    return t;
}

void write_tensor_file(const std::string& path, const TensorData& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(kMagic, 4);
    write_tensor(out, t);
    if (!out) throw std::runtime_error("write failed: " + path);
}

TensorData read_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open tensor file: " + path);
    char magic[4] = {0, 0, 0, 0};
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("bad magic in tensor file: " + path);
    }
    return read_tensor(in, path);
}

} // namespace svskit

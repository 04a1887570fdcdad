#include "belong/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "belong/error.hpp"

namespace belong {

namespace {

constexpr char kMagic[4] = {'R', 'N', 'T', 'Z'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kDtypeF32 = 0;
constexpr std::uint32_t kMaxRank = 16;

static_assert(std::endian::native == std::endian::little, "RNTZ I/O assumes a little-endian host");

void check_finite(std::span<const float> values, const char* where) {
    for (float v : values) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(where) + ": non-finite value");
        }
    }
}

void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw FormatError("RNTZ: truncated header");
    }
    return v;
}

}  // namespace

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    for (std::size_t d : shape_) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_to_string(shape_));
    }
    if (shape_size(shape_) != data_.size()) {
        throw ShapeError("shape " + shape_to_string(shape_) + " does not match " + std::to_string(data_.size()) +
                         " values");
    }
    check_finite(data_, "Tensor");
}

Tensor Tensor::zeros(Shape shape) {
    const std::size_t n = shape_size(shape);
    return Tensor(std::move(shape), std::vector<float>(n, 0.0f));
}

Tensor Tensor::vector(std::vector<float> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
    std::vector<float> v(n * n, 0.0f);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0f;
    return Tensor({n, n}, std::move(v));
}

float Tensor::at(std::size_t row, std::size_t col) const {
    if (rank() != 2) throw ShapeError("at(row, col) needs a rank-2 tensor, got " + shape_to_string(shape_));
    return data_[row * shape_[1] + col];
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_size(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
    }
    return Tensor(std::move(shape), data_);
}

std::vector<double> Tensor::to_doubles() const { return {data_.begin(), data_.end()}; }

Tensor Tensor::from_doubles(Shape shape, std::span<const double> values) {
    std::vector<float> v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = static_cast<float>(values[i]);
    return Tensor(std::move(shape), std::move(v));
}

Tensor elementwise(BinaryOp op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("shape mismatch: " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
    }
    std::vector<float> out(a.size());
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        switch (op) {
            case BinaryOp::add: out[i] = x[i] + y[i]; break;
            case BinaryOp::sub: out[i] = x[i] - y[i]; break;
            case BinaryOp::mul: out[i] = x[i] * y[i]; break;
        }
    }
    return Tensor(a.shape(), std::move(out));
}

Tensor scale(const Tensor& a, double factor) {
    std::vector<float> out(a.size());
    const auto x = a.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(x[i] * factor);
    return Tensor(a.shape(), std::move(out));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw ShapeError("matmul needs rank-2 operands, got " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
    }
    const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    if (b.shape()[0] != k) {
        throw ShapeError("matmul inner dimensions differ: " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
    }
    const auto x = a.data();
    const auto y = b.data();
    std::vector<double> acc(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double xv = x[i * k + p];
            for (std::size_t j = 0; j < n; ++j) acc[i * n + j] += xv * y[p * n + j];
        }
    }
    return Tensor::from_doubles({m, n}, acc);
}

void write_tensor(const Tensor& t, std::ostream& sink) {
    sink.write(kMagic, sizeof kMagic);
    put_u32(sink, kVersion);
    put_u32(sink, kDtypeF32);
    put_u32(sink, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_u32(sink, static_cast<std::uint32_t>(d));
    const auto data = t.data();
    sink.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
    if (!sink) throw FormatError("RNTZ: write failed");
}

Tensor read_tensor(std::istream& source) {
    char magic[4] = {};
    if (!source.read(magic, sizeof magic)) throw FormatError("RNTZ: truncated magic");
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw FormatError("RNTZ: bad magic bytes");
    const std::uint32_t version = get_u32(source);
    if (version != kVersion) throw FormatError("RNTZ: unsupported version " + std::to_string(version));
    const std::uint32_t dtype = get_u32(source);
    if (dtype != kDtypeF32) throw FormatError("RNTZ: unsupported dtype " + std::to_string(dtype));
    const std::uint32_t rank = get_u32(source);
    if (rank > kMaxRank) throw FormatError("RNTZ: rank " + std::to_string(rank) + " too large");

    Shape shape(rank);
    std::uint64_t count = 1;
    constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;
    for (auto& d : shape) {
        d = get_u32(source);
        if (d == 0) throw FormatError("RNTZ: zero dimension");
        count *= d;
        if (count > kMaxElements) throw FormatError("RNTZ: dimension overflow");
    }
    std::vector<float> data(count);
    if (!source.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * sizeof(float)))) {
        throw FormatError("RNTZ: truncated payload");
    }
    try {
        return Tensor(std::move(shape), std::move(data));
    } catch (const NumericError&) {
        throw FormatError("RNTZ: payload contains non-finite values");
    }
}

void save_tensor(const Tensor& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_tensor(t, out);
}

Tensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError(path);
    return read_tensor(in);
}

}  // namespace belong

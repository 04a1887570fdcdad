#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace belong {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array of 32-bit floats.
///
/// A rank-0 tensor (empty shape) holds one scalar. Every constructor and
/// arithmetic helper rejects non-finite values, so a Tensor that exists is
/// always finite.
class Tensor {
public:
    Tensor() : data_(1, 0.0f) {}
    Tensor(Shape shape, std::vector<float> data);

    static Tensor zeros(Shape shape);
    static Tensor scalar(float value) { return Tensor({}, {value}); }
    static Tensor vector(std::vector<float> values);
    static Tensor identity(std::size_t n);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::span<const float> data() const { return data_; }

    float operator[](std::size_t i) const { return data_[i]; }
    float at(std::size_t row, std::size_t col) const;

    bool operator==(const Tensor& other) const = default;

    /// Same data viewed under a different shape of equal size.
    Tensor reshaped(Shape shape) const;

    std::vector<double> to_doubles() const;
    static Tensor from_doubles(Shape shape, std::span<const double> values);

private:
    Shape shape_;
    std::vector<float> data_;
};

enum class BinaryOp { add, sub, mul };

Tensor elementwise(BinaryOp op, const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::add, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::sub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::mul, a, b); }

/// Rank-2 matrix product with 64-bit accumulation.
Tensor matmul(const Tensor& a, const Tensor& b);

// RNTZ v1: "RNTZ", u32 version, u32 dtype (0 = f32), u32 rank, rank x u32 dims,
// then the f32 payload. Little-endian, no padding.
void write_tensor(const Tensor& t, std::ostream& sink);
Tensor read_tensor(std::istream& source);

void save_tensor(const Tensor& t, const std::string& path);
Tensor load_tensor(const std::string& path);

}  // namespace belong

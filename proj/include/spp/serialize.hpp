#ifndef SPP_SERIALIZE_HPP
#define SPP_SERIALIZE_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "spp/errors.hpp"
#include "spp/numerics.hpp"

namespace spp {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t len,
                           std::uint32_t crc = 0) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc ^= 0xffffffffu;
    for (std::size_t i = 0; i < len; ++i)
        crc = table[(crc ^ data[i]) & 0xffu] ^ (crc >> 8);
    return crc ^ 0xffffffffu;
}

// Little-endian append-only byte buffer.
class ByteWriter {
public:
    std::vector<std::uint8_t> bytes;

    void write_raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes.insert(bytes.end(), b, b + n);
    }

    template <typename T>
    void write_scalar(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        write_raw(&v, sizeof(T)); // host is little-endian (x86/arm64)
    }

    void write_u32(std::uint32_t v) { write_scalar(v); }
    void write_u64(std::uint64_t v) { write_scalar(v); }
    void write_i64(std::int64_t v) { write_scalar(v); }
    void write_f64(double v) { write_scalar(v); }
    void write_u8(std::uint8_t v) { write_scalar(v); }

    void write_string(const std::string& s) {
        write_u64(s.size());
        write_raw(s.data(), s.size());
    }

    void write_vector(const Vector& v) {
        write_u64(static_cast<std::uint64_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i)
            write_f64(v(i));
    }

    void write_matrix(const Matrix& m) {
        write_u64(static_cast<std::uint64_t>(m.rows()));
        write_u64(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                write_f64(m(i, j));
    }
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    void read_raw(void* p, std::size_t n) {
        if (pos_ + n > size_)
            throw CorruptModel("model file truncated");
        std::memcpy(p, data_ + pos_, n);
        pos_ += n;
    }

    template <typename T>
    T read_scalar() {
        T v;
        read_raw(&v, sizeof(T));
        return v;
    }

    std::uint32_t read_u32() { return read_scalar<std::uint32_t>(); }
    std::uint64_t read_u64() { return read_scalar<std::uint64_t>(); }
    std::int64_t read_i64() { return read_scalar<std::int64_t>(); }
    double read_f64() { return read_scalar<double>(); }
    std::uint8_t read_u8() { return read_scalar<std::uint8_t>(); }

    std::string read_string() {
        std::uint64_t n = read_u64();
        if (pos_ + n > size_)
            throw CorruptModel("model file truncated");
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }

    Vector read_vector() {
        std::uint64_t n = read_u64();
        if (n > (size_ - pos_) / sizeof(double))
            throw CorruptModel("model file truncated");
        Vector v(static_cast<Eigen::Index>(n));
        for (std::uint64_t i = 0; i < n; ++i)
            v(static_cast<Eigen::Index>(i)) = read_f64();
        return v;
    }

    Matrix read_matrix() {
        std::uint64_t rows = read_u64();
        std::uint64_t cols = read_u64();
        if (rows * cols > (size_ - pos_) / sizeof(double))
            throw CorruptModel("model file truncated");
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::uint64_t j = 0; j < cols; ++j)
            for (std::uint64_t i = 0; i < rows; ++i)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = read_f64();
        return m;
    }

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

} // namespace spp

#endif

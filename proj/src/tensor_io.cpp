#include "stemob/tensor_io.hpp"

#include <cstring>
#include <fstream>

namespace stemob {
namespace {

constexpr char kMagic[4] = {'S', 'T', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kDtypeFloat32 = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is, const std::string& what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("tensor container truncated while reading " + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& is, const std::string& what) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw std::runtime_error("tensor container truncated while reading " + what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void write_tensor(const Latent& x, const std::filesystem::path& path) {
    validate_latent(x, "tensor");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, kDtypeFloat32);
    put_u32(os, static_cast<std::uint32_t>(x.shape.size()));
    for (std::size_t d : x.shape) put_u64(os, d);
    for (float v : x.data) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_u32(os, bits);
    }
    if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Latent read_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open tensor '" + path.string() + "'");
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("'" + path.string() + "': bad magic, not a tensor container");
    const std::uint32_t version = get_u32(is, "version");
    if (version != kVersion)
        throw std::runtime_error("'" + path.string() + "': unsupported container version " +
                                 std::to_string(version));
    const std::uint32_t dtype = get_u32(is, "dtype");
    if (dtype != kDtypeFloat32)
        throw std::runtime_error("'" + path.string() + "': unsupported dtype code " +
                                 std::to_string(dtype));
    const std::uint32_t ndim = get_u32(is, "ndim");
    if (ndim == 0) throw std::runtime_error("'" + path.string() + "': zero-dimensional tensor");

    Latent out;
    out.shape.resize(ndim);
    std::size_t n = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
        const std::uint64_t d = get_u64(is, "dims");
        if (d == 0) throw std::runtime_error("'" + path.string() + "': zero dimension");
        out.shape[i] = static_cast<std::size_t>(d);
        n *= out.shape[i];
    }
    out.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t bits = get_u32(is, "payload");
        std::memcpy(&out.data[i], &bits, 4);
    }
    char extra;
    if (is.read(&extra, 1))
        throw std::runtime_error("'" + path.string() + "': trailing bytes after payload");
    return out;
}

}  // namespace stemob

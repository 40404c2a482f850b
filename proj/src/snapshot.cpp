#include "spinlab/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace spinlab {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw IoError("snapshot truncated while reading header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw IoError("snapshot truncated while reading payload");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void write_snapshot(const std::string& path, const VectorField& field) {
    const Grid& g = *field.grid;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open snapshot for writing: " + path);
    os.write("MAGF", 4);
    put_u32(os, kSnapshotVersion);
    for (int d = 0; d < 3; ++d) put_u32(os, static_cast<std::uint32_t>(g.n[d]));
    std::vector<unsigned char> bits((g.mask.size() + 7) / 8, 0);
    for (std::size_t f = 0; f < g.mask.size(); ++f) {
        if (g.mask[f]) bits[f / 8] |= static_cast<unsigned char>(1u << (f % 8));
    }
    os.write(reinterpret_cast<const char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
    for (double x : field.v) put_f64(os, x);
    if (!os) throw IoError("snapshot write failed: " + path);
}

VectorField read_snapshot(const std::string& path, GridPtr grid) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open snapshot: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "MAGF", 4) != 0) {
        throw IoError("bad snapshot magic in " + path);
    }
    const std::uint32_t version = get_u32(is);
    if (version != kSnapshotVersion) {
        throw IoError("unsupported snapshot version " + std::to_string(version));
    }
    const Grid& g = *grid;
    for (int d = 0; d < 3; ++d) {
        const std::uint32_t n = get_u32(is);
        if (n != static_cast<std::uint32_t>(g.n[d])) {
            throw IoError("snapshot cell counts do not match the configured grid");
        }
    }
    std::vector<unsigned char> bits((g.mask.size() + 7) / 8, 0);
    is.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
    if (!is) throw IoError("snapshot truncated while reading mask");
    for (std::size_t f = 0; f < g.mask.size(); ++f) {
        const bool bit = (bits[f / 8] >> (f % 8)) & 1u;
        if (bit != static_cast<bool>(g.mask[f])) {
            throw IoError("snapshot mask does not match the configured grid");
        }
    }
    VectorField field = make_field(std::move(grid));
    for (double& x : field.v) x = get_f64(is);
    is.peek();
    if (!is.eof()) throw IoError("snapshot has trailing bytes: " + path);
    if (max_unit_deviation(field) <= 1e-12) field.unit_flag = true;
    return field;
}

}  // namespace spinlab

#include "bbsi/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace bbsi {

namespace {

static_assert(std::endian::native == std::endian::little,
              "bbm serialization assumes a little-endian host");

using cd = std::complex<double>;

void for_each_inband(const BlockLayout& layout, auto&& fn) {
    for (int a = 0; a < layout.num_layers; ++a)
        for (int off = -layout.bandwidth; off <= layout.bandwidth; ++off)
            if (a + off >= 0 && a + off < layout.num_layers) fn(a, off);
}

}  // namespace

void write_bbm(const std::string& path, const BlockBandedMatrix<cd>& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_argument_error("write_bbm: cannot open " + path);
    nlohmann::json header{{"version", 1},
                          {"num_layers", m.num_layers()},
                          {"block_sizes", m.layout().block_sizes},
                          {"bandwidth", m.bandwidth()},
                          {"scalar", "c128"}};
    out << header.dump() << '\n';
    for_each_inband(m.layout(), [&](int a, int off) {
        const auto& blk = m.block(a, off);
        for (int j = 0; j < blk.cols(); ++j)
            for (int i = 0; i < blk.rows(); ++i) {
                const double re = blk(i, j).real(), im = blk(i, j).imag();
                out.write(reinterpret_cast<const char*>(&re), 8);
                out.write(reinterpret_cast<const char*>(&im), 8);
            }
    });
    if (!out) throw invalid_argument_error("write_bbm: write failed for " + path);
}

BlockBandedMatrix<cd> read_bbm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_argument_error("read_bbm: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw invalid_argument_error("read_bbm: missing header");
    nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded()) throw invalid_argument_error("read_bbm: malformed header");
    if (header.value("version", 0) != 1)
        throw invalid_argument_error("read_bbm: unsupported version");
    if (header.value("scalar", "") != std::string("c128"))
        throw invalid_argument_error("read_bbm: unsupported scalar type");

    BlockLayout layout(header.at("num_layers").get<int>(),
                       header.at("block_sizes").get<std::vector<int>>(),
                       header.at("bandwidth").get<int>());
    BlockBandedMatrix<cd> m(layout);
    for_each_inband(layout, [&](int a, int off) {
        auto& blk = m.block(a, off);
        for (int j = 0; j < blk.cols(); ++j)
            for (int i = 0; i < blk.rows(); ++i) {
                double re, im;
                in.read(reinterpret_cast<char*>(&re), 8);
                in.read(reinterpret_cast<char*>(&im), 8);
                blk(i, j) = {re, im};
            }
    });
    if (!in) throw invalid_argument_error("read_bbm: truncated block data in " + path);
    return m;
}

}  // namespace bbsi

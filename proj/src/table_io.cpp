#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "aleg/tables.hpp"

static_assert(std::endian::native == std::endian::little,
              "table format is little-endian; big-endian hosts unsupported");

namespace aleg::tables {

namespace {

constexpr char kMagic[4] = {'A', 'L', 'E', 'G'};

struct Crc32Table {
    uint32_t t[256];
    Crc32Table() {
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
    }
};

const Crc32Table kCrc;

class Writer {
  public:
    explicit Writer(std::ostream& out) : out_(out) {}
    void bytes(const void* p, size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        const uint8_t* b = static_cast<const uint8_t*>(p);
        for (size_t i = 0; i < n; ++i) crc_ = kCrc.t[(crc_ ^ b[i]) & 0xff] ^ (crc_ >> 8);
    }
    void u32(uint32_t v) { bytes(&v, 4); }
    void u64(uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void f64v(const std::vector<double>& v) {
        u32(static_cast<uint32_t>(v.size()));
        if (!v.empty()) bytes(v.data(), v.size() * 8);
    }
    void u32v(const std::vector<uint32_t>& v) {
        u32(static_cast<uint32_t>(v.size()));
        if (!v.empty()) bytes(v.data(), v.size() * 4);
    }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        if (!s.empty()) bytes(s.data(), s.size());
    }
    uint32_t crc() const { return crc_ ^ 0xffffffffu; }

  private:
    std::ostream& out_;
    uint32_t crc_ = 0xffffffffu;
};

class Reader {
  public:
    explicit Reader(std::istream& in) : in_(in) {}
    void bytes(void* p, size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) throw TableError("table load: truncated stream");
        const uint8_t* b = static_cast<const uint8_t*>(p);
        for (size_t i = 0; i < n; ++i) crc_ = kCrc.t[(crc_ ^ b[i]) & 0xff] ^ (crc_ >> 8);
    }
    uint32_t u32() {
        uint32_t v;
        bytes(&v, 4);
        return v;
    }
    uint64_t u64() {
        uint64_t v;
        bytes(&v, 8);
        return v;
    }
    double f64() {
        double v;
        bytes(&v, 8);
        return v;
    }
    std::vector<double> f64v() {
        uint32_t n = u32();
        if (n > (1u << 30)) throw TableError("table load: corrupt vector length");
        std::vector<double> v(n);
        if (n) bytes(v.data(), n * 8ull);
        return v;
    }
    std::vector<uint32_t> u32v() {
        uint32_t n = u32();
        if (n > (1u << 30)) throw TableError("table load: corrupt vector length");
        std::vector<uint32_t> v(n);
        if (n) bytes(v.data(), n * 4ull);
        return v;
    }
    std::string str() {
        uint32_t n = u32();
        if (n > (1u << 20)) throw TableError("table load: corrupt string length");
        std::string s(n, '\0');
        if (n) bytes(s.data(), n);
        return s;
    }
    uint32_t crc() const { return crc_ ^ 0xffffffffu; }

  private:
    std::istream& in_;
    uint32_t crc_ = 0xffffffffu;
};

void write_compressed(Writer& w, const cheb::CompressedTriExpansion& c) {
    w.u32(static_cast<uint32_t>(c.n));
    w.f64(c.box.x0);
    w.f64(c.box.x1);
    w.f64(c.box.y0);
    w.f64(c.box.y1);
    w.f64(c.box.z0);
    w.f64(c.box.z1);
    w.f64(c.epsilon);
    w.u32(c.M);
    w.u32v(c.m);
    w.u32v(c.nIdx);
    w.f64v(c.coeffs);
}

cheb::CompressedTriExpansion read_compressed(Reader& r) {
    cheb::CompressedTriExpansion c;
    c.n = static_cast<int>(r.u32());
    c.box.x0 = r.f64();
    c.box.x1 = r.f64();
    c.box.y0 = r.f64();
    c.box.y1 = r.f64();
    c.box.z0 = r.f64();
    c.box.z1 = r.f64();
    c.epsilon = r.f64();
    c.M = r.u32();
    c.m = r.u32v();
    c.nIdx = r.u32v();
    c.coeffs = r.f64v();
    if (c.m.size() != c.M + 1) throw TableError("table load: inconsistent index structure");
    size_t expectIdx = 0;
    for (uint32_t mi : c.m) expectIdx += mi + 1;
    if (c.nIdx.size() != expectIdx) throw TableError("table load: inconsistent ragged index");
    size_t expectCoeffs = 0;
    for (uint32_t nij : c.nIdx) expectCoeffs += nij + 1;
    if (c.coeffs.size() != expectCoeffs) throw TableError("table load: inconsistent payload");
    return c;
}

}  // namespace

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed) {
    uint32_t c = seed ^ 0xffffffffu;
    for (size_t i = 0; i < len; ++i) c = kCrc.t[(c ^ data[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

void save(const LegendreTable& table, std::ostream& out) {
    Writer w(out);
    w.bytes(kMagic, 4);
    w.u32(table.formatVersion);
    const TableProfile& p = table.profile;
    w.f64(p.nuMax);
    w.u32(static_cast<uint32_t>(p.order));
    w.u32(static_cast<uint32_t>(p.gridPoints));
    w.f64(p.epsilonSolve);
    w.f64(p.epsilonCompress);
    w.f64(p.epsilonCompressPhase);
    w.f64v(p.xiPartition);
    w.f64v(p.tauPartitionBig);
    w.f64v(p.tauPartitionSmall);
    w.f64v(p.nuSmallPartition);
    w.str(table.precisionMode);
    w.u64(table.buildTimestamp);
    for (const auto& reg : table.regions) {
        w.u32(static_cast<uint32_t>(reg.id));
        w.f64v(reg.axis1);
        w.f64v(reg.axis2);
        w.u32(static_cast<uint32_t>(reg.cells.size()));
        for (const auto& cell : reg.cells) {
            w.f64v(cell.uPartition);
            w.u32(static_cast<uint32_t>(cell.prisms.size()));
            for (const auto& prism : cell.prisms) {
                write_compressed(w, prism.first);
                write_compressed(w, prism.second);
            }
        }
    }
    uint32_t c = w.crc();
    out.write(reinterpret_cast<const char*>(&c), 4);
    if (!out) throw TableError("table save: write failure");
}

LegendreTable load(std::istream& in) {
    Reader r(in);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw TableError("table load: bad magic");
    LegendreTable table;
    table.formatVersion = r.u32();
    if (table.formatVersion != 1) throw TableError("table load: unsupported format version");
    TableProfile& p = table.profile;
    p.nuMax = r.f64();
    p.order = static_cast<int>(r.u32());
    p.gridPoints = static_cast<int>(r.u32());
    p.epsilonSolve = r.f64();
    p.epsilonCompress = r.f64();
    p.epsilonCompressPhase = r.f64();
    p.xiPartition = r.f64v();
    p.tauPartitionBig = r.f64v();
    p.tauPartitionSmall = r.f64v();
    p.nuSmallPartition = r.f64v();
    table.precisionMode = r.str();
    table.buildTimestamp = r.u64();
    for (auto& reg : table.regions) {
        reg.id = static_cast<Region>(r.u32());
        reg.axis1 = r.f64v();
        reg.axis2 = r.f64v();
        uint32_t ncells = r.u32();
        if (ncells != (reg.axis1.size() - 1) * (reg.axis2.size() - 1))
            throw TableError("table load: cell count mismatch");
        reg.cells.resize(ncells);
        for (auto& cell : reg.cells) {
            cell.uPartition = r.f64v();
            uint32_t nprisms = r.u32();
            if (nprisms + 1 != cell.uPartition.size())
                throw TableError("table load: prism count mismatch");
            cell.prisms.resize(nprisms);
            for (auto& prism : cell.prisms) {
                prism.first = read_compressed(r);
                prism.second = read_compressed(r);
            }
        }
    }
    uint32_t computed = r.crc();
    uint32_t stored;
    in.read(reinterpret_cast<char*>(&stored), 4);
    if (!in) throw TableError("table load: truncated stream");
    if (stored != computed) throw TableError("table load: checksum failure");
    return table;
}

void save_file(const LegendreTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TableError("table save: cannot open " + path);
    save(table, out);
}

LegendreTable load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TableError("table load: cannot open " + path);
    return load(in);
}

}  // namespace aleg::tables

#include "mfgn/io.hpp"

#include "mfgn/errors.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mfgn::io {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void KvBlock::set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}
void KvBlock::set(const std::string& key, double value) { set(key, format_double(value)); }
void KvBlock::set(const std::string& key, long value) { set(key, std::to_string(value)); }
void KvBlock::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

std::string KvBlock::to_text() const {
    std::ostringstream os;
    for (const auto& [k, v] : entries_) os << k << "=" << v << "\n";
    return os.str();
}

std::string KvBlock::to_json() const {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [k, v] : entries_) {
        if (!first) os << ",";
        first = false;
        os << "\"" << k << "\":\"" << v << "\"";
    }
    os << "}";
    return os.str();
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<double>& row) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) line += ",";
        line += format_double(row[i]);
    }
    rows_.push_back(std::move(line));
}

void CsvWriter::add_row_raw(const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) line += ",";
        line += row[i];
    }
    rows_.push_back(std::move(line));
}

std::string CsvWriter::to_text() const {
    std::string out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) out += ",";
        out += columns_[i];
    }
    out += "\n";
    for (const auto& r : rows_) {
        out += r;
        out += "\n";
    }
    return out;
}

void CsvWriter::write(const std::string& path) const { write_text_file(path, to_text()); }

void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}
void put_i64(std::vector<std::uint8_t>& buf, std::int64_t v) { put_u64(buf, static_cast<std::uint64_t>(v)); }
void put_f64(std::vector<std::uint8_t>& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}
std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}
std::int64_t get_i64(const std::uint8_t* p) { return static_cast<std::int64_t>(get_u64(p)); }
double get_f64(const std::uint8_t* p) {
    std::uint64_t bits = get_u64(p);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& buf) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("io: cannot open for writing: " + path);
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!os) throw ConfigError("io: short write: " + path);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("io: cannot open: " + path);
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return buf;
}

namespace {
constexpr std::uint64_t kSnapMagic = 0x3150414e53474d46ull; // "MFGSNAP1"

std::uint64_t kind_code(const std::string& kind) {
    if (kind == "cell") return 1;
    if (kind == "cellvec") return 2;
    if (kind == "face") return 3;
    if (kind == "boundary") return 4;
    throw ContractViolation("snapshot: unknown field kind '" + kind + "'");
}
std::string kind_name(std::uint64_t code) {
    switch (code) {
        case 1: return "cell";
        case 2: return "cellvec";
        case 3: return "face";
        case 4: return "boundary";
    }
    throw ConfigError("snapshot: unknown kind code " + std::to_string(code));
}
} // namespace

void write_snapshot(const std::string& path, const Snapshot& snap) {
    std::vector<std::uint8_t> buf;
    put_u64(buf, kSnapMagic);
    put_u64(buf, kind_code(snap.kind));
    put_u64(buf, snap.dims.size());
    for (auto d : snap.dims) put_i64(buf, d);
    put_u64(buf, snap.payload.size());
    for (double v : snap.payload) put_f64(buf, v);
    put_u64(buf, fnv1a(buf.data(), buf.size()));
    write_bytes(path, buf);
}

Snapshot read_snapshot(const std::string& path) {
    auto buf = read_bytes(path);
    if (buf.size() < 40) throw ConfigError("snapshot: truncated file: " + path);
    std::uint64_t stored = get_u64(buf.data() + buf.size() - 8);
    std::uint64_t actual = fnv1a(buf.data(), buf.size() - 8);
    if (stored != actual) throw ConfigError("snapshot: checksum mismatch: " + path);
    std::size_t off = 0;
    auto take_u64 = [&](const char* what) {
        if (off + 8 > buf.size() - 8) throw ConfigError(std::string("snapshot: truncated ") + what + ": " + path);
        auto v = get_u64(buf.data() + off);
        off += 8;
        return v;
    };
    if (take_u64("magic") != kSnapMagic) throw ConfigError("snapshot: bad magic: " + path);
    Snapshot snap;
    snap.kind = kind_name(take_u64("kind"));
    std::uint64_t ndims = take_u64("ndims");
    for (std::uint64_t i = 0; i < ndims; ++i) snap.dims.push_back(static_cast<std::int64_t>(take_u64("dim")));
    std::uint64_t count = take_u64("count");
    snap.payload.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        if (off + 8 > buf.size() - 8) throw ConfigError("snapshot: truncated payload: " + path);
        snap.payload[i] = get_f64(buf.data() + off);
        off += 8;
    }
    return snap;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("io: cannot open for writing: " + path);
    os << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("io: cannot open: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

} // namespace mfgn::io

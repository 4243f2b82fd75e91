#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mfgn::io {

/// FNV-1a 64-bit hash, used for snapshot checksums and manifest entries.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

/// Locale-independent shortest round-trip formatting for doubles.
std::string format_double(double v);

/// key=value block, one pair per line, insertion-ordered. This is the
/// machine-readable summary format shared by certificates and reports.
class KvBlock {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long value);
    void set(const std::string& key, bool value);
    std::string to_text() const;
    std::string to_json() const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Minimal CSV writer: header row then data rows, '\n' line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns);
    void add_row(const std::vector<double>& row);
    void add_row_raw(const std::vector<std::string>& row);
    void write(const std::string& path) const;
    std::string to_text() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

/// Grid snapshot container: little-endian float64 payload plus a small
/// header carrying the field kind and shape. See README for the layout.
struct Snapshot {
    std::string kind;               // "cell", "cellvec", "face", "boundary"
    std::vector<std::int64_t> dims; // kind-specific shape descriptor
    std::vector<double> payload;    // row-major, slowest index first
};

void write_snapshot(const std::string& path, const Snapshot& snap);
Snapshot read_snapshot(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);
bool file_exists(const std::string& path);

/// Raw little-endian serialization helpers used by snapshots and checkpoints.
void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v);
void put_i64(std::vector<std::uint8_t>& buf, std::int64_t v);
void put_f64(std::vector<std::uint8_t>& buf, double v);
std::uint64_t get_u64(const std::uint8_t* p);
std::int64_t get_i64(const std::uint8_t* p);
double get_f64(const std::uint8_t* p);
void write_bytes(const std::string& path, const std::vector<std::uint8_t>& buf);
std::vector<std::uint8_t> read_bytes(const std::string& path);

} // namespace mfgn::io

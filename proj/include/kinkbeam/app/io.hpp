#pragma once

// Persistence: CSV writers, the KINKWF01 snapshot matrix, and SHA-256 checksums.

#include <array>
#include <bit>
#include <charconv>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "kinkbeam/errors.hpp"
#include "kinkbeam/tridiagonal.hpp"

namespace kinkbeam::app {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

/// Shortest round-trip decimal form; locale independent.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

/// Row-by-row CSV writer; fields are numbers or bare identifiers, never quoted.
class CsvWriter {
public:
  explicit CsvWriter(const fs::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("cannot write " + path.string());
  }
  void comment(std::string_view text) { out_ << "# " << text << '\n'; }
  void header(const std::vector<std::string>& names) { row_strings(names); }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << format_number(values[i]);
    }
    out_ << '\n';
  }
  void row_strings(const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << values[i];
    }
    out_ << '\n';
  }
  void close() {
    out_.close();
    if (!out_) throw IoError("write failed for " + path_.string());
  }

private:
  std::ofstream out_;
  fs::path path_;
};

inline std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_number(v[i]);
  }
  return s;
}

// KINKWF01: 8-byte magic, uint32 rows, uint32 cols, float64 dzeta (um),
// float64 dtau (um), then rows*cols complex128 as (re, im) pairs, all little-endian.
inline constexpr std::string_view kSnapshotMagic = "KINKWF01";
inline constexpr std::size_t kSnapshotHeaderBytes = 32;

namespace detail {

template <class T>
void put_le(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace detail

/// Streams snapshot rows; the row count in the header is patched on close().
class SnapshotWriter {
public:
  SnapshotWriter(const fs::path& path, std::uint32_t cols, double dzeta, double dtau)
      : out_(path, std::ios::binary), path_(path), cols_(cols) {
    if (!out_) throw IoError("cannot write " + path.string());
    out_.write(kSnapshotMagic.data(), 8);
    detail::put_le<std::uint32_t>(out_, 0);
    detail::put_le<std::uint32_t>(out_, cols);
    detail::put_le<double>(out_, dzeta);
    detail::put_le<double>(out_, dtau);
  }
  void append(const std::vector<cplx>& row) {
    if (row.size() != cols_) throw IoError("snapshot row has the wrong length");
    out_.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(cplx)));
    ++rows_;
  }
  void close() {
    out_.seekp(8);
    detail::put_le<std::uint32_t>(out_, rows_);
    out_.close();
    if (!out_) throw IoError("write failed for " + path_.string());
  }
  std::uint32_t rows() const noexcept { return rows_; }

private:
  std::ofstream out_;
  fs::path path_;
  std::uint32_t cols_;
  std::uint32_t rows_ = 0;
};

struct SnapshotMatrix {
  std::uint32_t rows = 0, cols = 0;
  double delta_zeta = 0.0, tau_step = 0.0;
  std::vector<cplx> data;  // row-major

  const cplx* row(std::size_t r) const { return data.data() + r * cols; }
};

inline SnapshotMatrix read_snapshots(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string_view(magic, 8) != kSnapshotMagic) throw IoError(path.string() + " is not a KINKWF01 file");
  SnapshotMatrix m;
  m.rows = detail::get_le<std::uint32_t>(in);
  m.cols = detail::get_le<std::uint32_t>(in);
  m.delta_zeta = detail::get_le<double>(in);
  m.tau_step = detail::get_le<double>(in);
  m.data.resize(static_cast<std::size_t>(m.rows) * m.cols);
  in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(cplx)));
  if (!in) throw IoError(path.string() + " is truncated");
  return m;
}

/// Reads a numeric CSV with one header row; '#' lines are skipped.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw IoError("missing column " + std::string(name));
  }
};

inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!have_header) {
      t.columns = std::move(fields);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& f : fields) {
      if (f == "nan") row.push_back(std::numeric_limits<double>::quiet_NaN());
      else {
        double v = 0.0;
        auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc{}) v = std::numeric_limits<double>::quiet_NaN();
        row.push_back(v);
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace kinkbeam::app

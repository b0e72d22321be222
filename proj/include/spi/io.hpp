#pragma once

// File formats: 8-bit PGM (P5), PBM (P1/P4), the ordering text listing,
// measurement CSV with its key = value sidecar, and the flat config format.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spi/grid.hpp"
#include "spi/orderings.hpp"
#include "spi/simulation.hpp"

namespace spi {

/// Malformed or missing user input (files, flags, config values).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Numbers

/// Shortest text that parses back to the same double; "inf"/"-inf"/"nan".
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format double");
  return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view text, std::string_view what) {
  const auto s = trim(text);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw InputError("invalid number for " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

template <typename Int>
Int parse_integer(std::string_view text, std::string_view what) {
  const auto s = trim(text);
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw InputError("invalid integer for " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Netpbm

namespace detail {

// Next whitespace-separated header token, skipping '#' comments.
inline std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

}  // namespace detail

/// Writes pixels rounded and clamped to [0, 255] as binary PGM.
inline void write_pgm(std::ostream& out, const Image& img) {
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::vector<char> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = std::clamp(std::round(img.values()[i]), 0.0, 255.0);
    bytes[i] = static_cast<char>(static_cast<std::uint8_t>(v));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline void write_pgm(const std::filesystem::path& path, const Image& img) {
  auto out = open_output(path);
  write_pgm(out, img);
}

inline Image read_pgm(std::istream& in, const std::string& name = "image") {
  if (detail::pnm_token(in) != "P5") throw InputError(name + ": not a binary PGM (P5)");
  const auto cols = parse_integer<std::size_t>(detail::pnm_token(in), "PGM width");
  const auto rows = parse_integer<std::size_t>(detail::pnm_token(in), "PGM height");
  const auto maxval = parse_integer<int>(detail::pnm_token(in), "PGM maxval");
  if (maxval < 1 || maxval > 255) throw InputError(name + ": only 8-bit PGM is supported");
  std::vector<char> bytes(rows * cols);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw InputError(name + ": truncated pixel data");
  }
  Image img(rows, cols);
  const double scale = 255.0 / maxval;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    img.values()[i] = static_cast<std::uint8_t>(bytes[i]) * scale;
  }
  return img;
}

inline Image read_pgm(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_pgm(in, path.string());
}

enum class PbmFormat { ascii, binary };

/// +1 cells are written white (PBM bit 0), -1 cells black (bit 1).
inline void write_pbm(std::ostream& out, const Grid<std::int8_t>& cells, PbmFormat format) {
  if (format == PbmFormat::ascii) {
    out << "P1\n" << cells.cols() << ' ' << cells.rows() << '\n';
    for (std::size_t r = 0; r < cells.rows(); ++r) {
      for (std::size_t c = 0; c < cells.cols(); ++c) {
        if (c) out << ' ';
        out << (cells(r, c) > 0 ? '0' : '1');
      }
      out << '\n';
    }
    return;
  }
  out << "P4\n" << cells.cols() << ' ' << cells.rows() << '\n';
  const std::size_t stride = (cells.cols() + 7) / 8;
  std::vector<char> row(stride);
  for (std::size_t r = 0; r < cells.rows(); ++r) {
    std::fill(row.begin(), row.end(), 0);
    for (std::size_t c = 0; c < cells.cols(); ++c) {
      if (cells(r, c) < 0) row[c / 8] = static_cast<char>(row[c / 8] | (0x80 >> (c % 8)));
    }
    out.write(row.data(), static_cast<std::streamsize>(stride));
  }
}

/// Reads P1 or P4 back into +1 (white) / -1 (black) cells.
inline Grid<std::int8_t> read_pbm(std::istream& in, const std::string& name = "bitmap") {
  const auto magic = detail::pnm_token(in);
  if (magic != "P1" && magic != "P4") throw InputError(name + ": not a PBM");
  const auto cols = parse_integer<std::size_t>(detail::pnm_token(in), "PBM width");
  const auto rows = parse_integer<std::size_t>(detail::pnm_token(in), "PBM height");
  Grid<std::int8_t> cells(rows, cols);
  if (magic == "P1") {
    for (auto& v : cells.values()) {
      int ch;
      do {
        ch = in.get();
      } while (ch != EOF && ch != '0' && ch != '1');
      if (ch == EOF) throw InputError(name + ": truncated P1 data");
      v = ch == '0' ? 1 : -1;
    }
    return cells;
  }
  const std::size_t stride = (cols + 7) / 8;
  std::vector<char> row(stride);
  for (std::size_t r = 0; r < rows; ++r) {
    in.read(row.data(), static_cast<std::streamsize>(stride));
    if (in.gcount() != static_cast<std::streamsize>(stride)) throw InputError(name + ": truncated P4 data");
    for (std::size_t c = 0; c < cols; ++c) {
      cells(r, c) = (static_cast<unsigned char>(row[c / 8]) & (0x80 >> (c % 8))) ? -1 : 1;
    }
  }
  return cells;
}

inline Grid<std::int8_t> read_pbm(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_pbm(in, path.string());
}

// ---------------------------------------------------------------------------
// Ordering listing: "# scheme k N" then one 1-based serial per line.

inline void write_permutation(std::ostream& out, const OrderingPermutation& p) {
  out << "# " << to_string(p.scheme) << ' ' << p.order << ' ' << p.size() << '\n';
  for (auto s : p.ranks) out << s << '\n';
}

inline OrderingPermutation read_permutation(std::istream& in, const std::string& name = "ordering") {
  std::string line;
  if (!std::getline(in, line)) throw InputError(name + ": empty file");
  const auto fields = split(trim(line), ' ');
  if (fields.size() != 4 || fields[0] != "#") throw InputError(name + ": bad header '" + line + "'");
  const auto scheme = parse_scheme(fields[1]);
  if (!scheme) throw InputError(name + ": unknown scheme '" + fields[1] + "'");
  OrderingPermutation p;
  p.scheme = *scheme;
  p.order = parse_integer<unsigned>(fields[2], "order");
  const auto n = parse_integer<std::size_t>(fields[3], "N");
  if (p.order == 0 || p.order > kMaxOrder || n != (std::size_t{1} << p.order)) {
    throw InputError(name + ": N does not equal 2^k");
  }
  p.ranks.reserve(n);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    p.ranks.push_back(parse_integer<std::uint32_t>(line, name + " line " + std::to_string(line_no)));
  }
  if (!permutation_is_valid(p)) throw InputError(name + ": listing is not a permutation of 1..N");
  return p;
}

// ---------------------------------------------------------------------------
// Flat "key = value" files (experiment configs and measurement sidecars).

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in, const std::string& name = "config") {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(name + " line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    kv[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
  }
  return kv;
}

inline KeyValues read_key_values(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_key_values(in, path.string());
}

inline void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

// ---------------------------------------------------------------------------
// Measurement CSV: rank,serial,y_plus,y_minus,y_diff (plus/minus empty in
// direct mode). Plan and noise provenance go to "<csv>.meta".

inline constexpr std::string_view kMeasurementHeader = "rank,serial,y_plus,y_minus,y_diff";

inline std::filesystem::path meta_path(const std::filesystem::path& csv) {
  auto p = csv;
  p += ".meta";
  return p;
}

inline KeyValues measurement_meta(const MeasurementSet& m) {
  return KeyValues{{"scheme", std::string(to_string(m.plan.ordering->scheme))},
                   {"k", std::to_string(m.plan.ordering->order)},
                   {"samples", std::to_string(m.plan.sample_count)},
                   {"mode", std::string(to_string(m.plan.mode))},
                   {"noise", std::string(to_string(m.noise.model))},
                   {"snri_db", format_double(m.noise.snri_db)},
                   {"seed", std::to_string(m.noise.seed)},
                   {"od", format_double(m.noise.od)}};
}

inline void write_measurements(std::ostream& out, const MeasurementSet& m) {
  out << kMeasurementHeader << "\r\n";
  for (std::size_t r = 0; r < m.values.size(); ++r) {
    out << (r + 1) << ',' << m.plan.ordering->ranks[r] << ',';
    if (m.raw_pairs) {
      out << format_double((*m.raw_pairs)[2 * r]) << ',' << format_double((*m.raw_pairs)[2 * r + 1]);
    } else {
      out << ',';
    }
    out << ',' << format_double(m.values[r]) << "\r\n";
  }
}

inline void write_measurements(const std::filesystem::path& csv, const MeasurementSet& m) {
  {
    auto out = open_output(csv);
    write_measurements(out, m);
  }
  auto meta = open_output(meta_path(csv));
  write_key_values(meta, measurement_meta(m));
}

/// Reads a measurement CSV. The ordering comes from `meta` (scheme, k), and
/// every row's serial must agree with it.
inline MeasurementSet read_measurements(std::istream& in, const KeyValues& meta,
                                        const std::string& name = "measurements") {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw InputError(name + ": metadata lacks '" + key + "'");
    return it->second;
  };
  const auto scheme = parse_scheme(get("scheme"));
  if (!scheme) throw InputError(name + ": unknown scheme '" + get("scheme") + "'");
  const auto k = parse_integer<unsigned>(get("k"), "k");
  const auto mode = parse_mode(get("mode"));
  if (!mode) throw InputError(name + ": unknown mode '" + get("mode") + "'");
  std::shared_ptr<const OrderingPermutation> ordering;
  try {
    ordering = cached_ordering(*scheme, k);
  } catch (const std::invalid_argument& e) {
    throw InputError(name + ": " + e.what());
  }

  MeasurementSet m;
  m.plan.ordering = ordering;
  m.plan.mode = *mode;
  if (auto it = meta.find("noise"); it != meta.end()) {
    const auto model = parse_noise_model(it->second);
    if (!model) throw InputError(name + ": unknown noise model '" + it->second + "'");
    m.noise.model = *model;
  }
  if (auto it = meta.find("snri_db"); it != meta.end()) m.noise.snri_db = parse_double(it->second, "snri_db");
  if (auto it = meta.find("seed"); it != meta.end()) m.noise.seed = parse_integer<std::uint64_t>(it->second, "seed");
  if (auto it = meta.find("od"); it != meta.end()) m.noise.od = parse_double(it->second, "od");

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || trim(line) != kMeasurementHeader) {
    throw InputError(name + " line 1: expected header '" + std::string(kMeasurementHeader) + "'");
  }
  std::vector<double> raw;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const std::string where = name + " line " + std::to_string(line_no);
    const auto fields = split(body, ',');
    if (fields.size() != 5) throw InputError(where + ": expected 5 fields");
    const auto rank = parse_integer<std::size_t>(fields[0], where);
    const auto serial = parse_integer<std::uint32_t>(fields[1], where);
    if (rank != m.values.size() + 1) throw InputError(where + ": ranks must be consecutive from 1");
    if (rank > ordering->size() || ordering->ranks[rank - 1] != serial) {
      throw InputError(where + ": serial does not match the " + std::string(to_string(*scheme)) +
                       " ordering");
    }
    if (m.plan.mode == MeasurementMode::complementary_differential) {
      raw.push_back(parse_double(fields[2], where));
      raw.push_back(parse_double(fields[3], where));
    } else if (!trim(fields[2]).empty() || !trim(fields[3]).empty()) {
      throw InputError(where + ": direct mode rows must leave y_plus/y_minus empty");
    }
    m.values.push_back(parse_double(fields[4], where));
  }
  if (m.values.empty()) throw InputError(name + ": no measurement rows");
  m.plan.sample_count = m.values.size();
  if (auto it = meta.find("samples"); it != meta.end()) {
    if (parse_integer<std::size_t>(it->second, "samples") != m.values.size()) {
      throw InputError(name + ": row count disagrees with metadata samples");
    }
  }
  if (m.plan.mode == MeasurementMode::complementary_differential) m.raw_pairs = std::move(raw);
  return m;
}

inline MeasurementSet read_measurements(const std::filesystem::path& csv) {
  auto in = open_input(csv);
  const auto meta_file = meta_path(csv);
  if (!std::filesystem::exists(meta_file)) {
    throw InputError("missing metadata file '" + meta_file.string() + "'");
  }
  return read_measurements(in, read_key_values(meta_file), csv.string());
}

}  // namespace spi

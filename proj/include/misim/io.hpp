#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "misim/bits.hpp"
#include "misim/cell_array.hpp"
#include "misim/errors.hpp"

namespace misim {
namespace io {

// --- bit-matrix images ------------------------------------------------

// Plain text: one row per line, characters '0'/'1'.
inline std::vector<Bits> load_bit_matrix(std::istream& is) {
  std::vector<Bits> out;
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    out.push_back(bits_from_string(line));
  }
  return out;
}

inline std::vector<Bits> load_bit_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::vector<Bits> m;
  // CSV variant: rows of comma-separated 0/1
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      Bits row;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) {
        if (cell == "0")
          row.push_back(0);
        else if (cell == "1")
          row.push_back(1);
        else
          throw IoError(path + ": bit cells must be 0 or 1");
      }
      m.push_back(row);
    }
    return m;
  }
  return load_bit_matrix(f);
}

inline void save_bit_matrix(std::ostream& os, const std::vector<Bits>& m, bool csv = false) {
  for (const Bits& row : m) {
    if (csv) {
      for (size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << unsigned(row[c]);
      os << '\n';
    } else {
      os << bits_to_string(row) << '\n';
    }
  }
}

inline void save_bit_matrix_file(const std::string& path, const std::vector<Bits>& m) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  bool csv = path.size() > 4 && path.substr(path.size() - 4) == ".csv";
  save_bit_matrix(f, m, csv);
}

// --- integer CSV vectors / matrices -------------------------------------

inline int64_t parse_int(const std::string& cell, const std::string& where) {
  int64_t v = 0;
  auto first = cell.data();
  auto last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto [p, ec] = std::from_chars(first, last, v);
  while (p != last && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
  if (ec != std::errc() || p != last)
    throw MalformedCsv(where + ": not an integer: '" + cell + "'");
  return v;
}

inline double parse_double(const std::string& cell, const std::string& where) {
  try {
    size_t used = 0;
    double v = std::stod(cell, &used);
    while (used < cell.size() &&
           (cell[used] == ' ' || cell[used] == '\t' || cell[used] == '\r'))
      ++used;
    if (used != cell.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw MalformedCsv(where + ": not a number: '" + cell + "'");
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ls(line);
  std::string cell;
  while (std::getline(ls, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline std::vector<std::vector<int64_t>> load_int_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::vector<std::vector<int64_t>> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::vector<int64_t> row;
    auto cells = split_csv_line(line);
    for (size_t c = 0; c < cells.size(); ++c)
      row.push_back(parse_int(cells[c], path + ":" + std::to_string(lineno) + ":col" +
                                            std::to_string(c + 1)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<int64_t> load_int_vector(const std::string& path) {
  std::vector<int64_t> out;
  for (const auto& row : load_int_csv(path))
    for (int64_t v : row) out.push_back(v);
  return out;
}

// --- key=value config ----------------------------------------------------

inline std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto strip = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError(path + ":" + std::to_string(lineno) + ": expected key=value");
    kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  return kv;
}

// --- grayscale images ------------------------------------------------

// 8-bit grayscale, PGM (P2/P5) or CSV matrix by extension.
struct Image {
  size_t width = 0;
  size_t height = 0;
  std::vector<uint8_t> pixels;  // row-major

  uint8_t at(size_t r, size_t c) const { return pixels[r * width + c]; }
};

inline Image load_image(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  Image img;
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    auto rows = load_int_csv(path);
    img.height = rows.size();
    img.width = img.height ? rows[0].size() : 0;
    for (const auto& row : rows) {
      if (row.size() != img.width) throw MalformedCsv(path + ": ragged image rows");
      for (int64_t v : row) {
        if (v < 0 || v > 255) throw MalformedCsv(path + ": pixel out of [0,255]");
        img.pixels.push_back(static_cast<uint8_t>(v));
      }
    }
    return img;
  }
  std::string magic;
  f >> magic;
  if (magic != "P2" && magic != "P5") throw IoError(path + ": expected PGM (P2/P5)");
  auto next_token = [&]() {
    std::string t;
    while (f >> t) {
      if (t[0] == '#') {
        std::string rest;
        std::getline(f, rest);
        continue;
      }
      return t;
    }
    throw IoError(path + ": truncated PGM header");
  };
  img.width = std::stoul(next_token());
  img.height = std::stoul(next_token());
  unsigned maxval = static_cast<unsigned>(std::stoul(next_token()));
  if (maxval == 0 || maxval > 255) throw IoError(path + ": only 8-bit PGM supported");
  img.pixels.resize(img.width * img.height);
  if (magic == "P5") {
    f.get();  // single whitespace after maxval
    f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!f) throw IoError(path + ": truncated PGM data");
  } else {
    for (auto& px : img.pixels) {
      unsigned v;
      if (!(f >> v)) throw IoError(path + ": truncated PGM data");
      px = static_cast<uint8_t>(v);
    }
  }
  return img;
}

inline void save_image(const std::string& path, const Image& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    for (size_t r = 0; r < img.height; ++r) {
      for (size_t c = 0; c < img.width; ++c) f << (c ? "," : "") << unsigned(img.at(r, c));
      f << '\n';
    }
    return;
  }
  f << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
}

}  // namespace io
}  // namespace misim

#include "blc/network_io.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "blc/error.hpp"
#include "blc/text.hpp"

namespace blc {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return is;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

void write_sweep_csv(std::ostream& os, std::span<const PropertyPoint> sweep) {
  os << kSweepCsvHeader << '\n';
  for (const auto& p : sweep) {
    os << text::format_double(p.f_ghz);
    for (double v : p.props) os << ',' << text::format_double(v);
    os << ',' << text::format_double(wrap_degrees(p.props[kPh21Deg] - p.props[kPh31Deg])) << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const PropertyPoint> sweep) {
  auto os = open_out(path);
  write_sweep_csv(os, sweep);
}

std::vector<PropertyPoint> read_sweep_csv(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<PropertyPoint> out;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view view = text::trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (!have_header) {
      if (view != kSweepCsvHeader) {
        parse_fail(line_no, std::string("expected header '") + kSweepCsvHeader + "'");
      }
      have_header = true;
      continue;
    }
    const auto fields = text::split(view, ',');
    if (fields.size() != 8) {
      parse_fail(line_no, "expected 8 columns, found " + std::to_string(fields.size()));
    }
    std::array<double, 8> v{};
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (!text::parse_double(fields[k], v[k]) || !std::isfinite(v[k])) {
        parse_fail(line_no, "column " + std::to_string(k + 1) + " is not a finite number");
      }
    }
    PropertyPoint p;
    p.f_ghz = v[0];
    for (std::size_t k = 0; k < kNumOutputs; ++k) p.props[k] = v[k + 1];
    out.push_back(p);
  }
  if (!have_header) throw Error(ErrorKind::Parse, "sweep file is empty");
  return out;
}

std::vector<PropertyPoint> read_sweep_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_sweep_csv(is);
}

void write_touchstone(std::ostream& os, const FourPortResponse& resp) {
  os << "! 4-port branch-line coupler response, rebuilt from s11/s21/s31/s41 by symmetry\n";
  os << "# GHz S RI R 50\n";
  for (std::size_t i = 0; i < resp.points.size(); ++i) {
    const FourPortS& s = resp.points[i];
    const std::array<std::array<Complex, 4>, 4> m{{{s.s11, s.s21, s.s31, s.s41},
                                                   {s.s21, s.s11, s.s41, s.s31},
                                                   {s.s31, s.s41, s.s11, s.s21},
                                                   {s.s41, s.s31, s.s21, s.s11}}};
    for (std::size_t r = 0; r < 4; ++r) {
      if (r == 0) {
        os << text::format_double(resp.sweep.frequency(static_cast<int>(i)));
      } else {
        os << ' ';
      }
      for (const Complex& z : m[r]) {
        os << ' ' << text::format_double(z.real()) << ' ' << text::format_double(z.imag());
      }
      os << '\n';
    }
  }
}

void write_touchstone(const std::filesystem::path& path, const FourPortResponse& resp) {
  auto os = open_out(path);
  write_touchstone(os, resp);
}

TouchstoneData read_touchstone(std::istream& is) {
  enum class Format { RI, MA, DB };
  Format format = Format::MA;  // Touchstone v1 default
  double f_scale = 1.0;         // default unit GHz
  bool have_options = false;
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto bang = line.find('!'); bang != std::string::npos) line.erase(bang);
    std::string_view view = text::trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (have_options) parse_fail(line_no, "duplicate option line");
      have_options = true;
      std::istringstream opts{std::string(view.substr(1))};
      std::string tok;
      while (opts >> tok) {
        for (auto& ch : tok) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (tok == "HZ") f_scale = 1e-9;
        else if (tok == "KHZ") f_scale = 1e-6;
        else if (tok == "MHZ") f_scale = 1e-3;
        else if (tok == "GHZ") f_scale = 1.0;
        else if (tok == "RI") format = Format::RI;
        else if (tok == "MA") format = Format::MA;
        else if (tok == "DB") format = Format::DB;
        else if (tok == "S") continue;
        else if (tok == "R") {
          double r = 0.0;
          if (!(opts >> r)) parse_fail(line_no, "missing reference resistance");
        } else {
          parse_fail(line_no, "unsupported option '" + tok + "'");
        }
      }
      continue;
    }
    std::istringstream row{std::string(view)};
    std::string tok;
    while (row >> tok) {
      double v = 0.0;
      if (!text::parse_double(tok, v)) parse_fail(line_no, "bad number '" + tok + "'");
      values.push_back(v);
    }
  }
  constexpr std::size_t kPerPoint = 1 + 2 * 16;
  if (values.empty() || values.size() % kPerPoint != 0) {
    throw Error(ErrorKind::Parse, "touchstone data is not a whole number of 4-port records");
  }
  const auto to_complex = [format](double x, double y) {
    switch (format) {
      case Format::RI: return Complex{x, y};
      case Format::MA: return std::polar(x, y * std::numbers::pi / 180.0);
      case Format::DB: return std::polar(std::pow(10.0, x / 20.0), y * std::numbers::pi / 180.0);
    }
    return Complex{};
  };
  TouchstoneData out;
  for (std::size_t base = 0; base < values.size(); base += kPerPoint) {
    out.f_ghz.push_back(values[base] * f_scale);
    // Row-major: entry (r, c) starts at base + 1 + 2*(4r + c).
    const auto entry = [&](std::size_t r, std::size_t c) {
      const std::size_t k = base + 1 + 2 * (4 * r + c);
      return to_complex(values[k], values[k + 1]);
    };
    out.points.push_back({entry(0, 0), entry(1, 0), entry(2, 0), entry(3, 0)});
  }
  return out;
}

TouchstoneData read_touchstone(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_touchstone(is);
}

}  // namespace blc

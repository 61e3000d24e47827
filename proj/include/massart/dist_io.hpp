#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "massart/domain.hpp"

namespace massart {

// Line-oriented text format for finite distributions:
//
//   <d> <eta_bound>
//   <x_1> ... <x_d> <p> <f> <eta>      (one atom per line)
//
// Reals are written with 17 significant digits, so a write/read cycle is
// bit-exact. Bit-string points are one unsigned decimal coordinate (d = 1).

std::string format_real(double v);
double parse_real(std::string_view token, std::size_t line);
std::uint64_t parse_u64(std::string_view token, std::size_t line);
std::vector<std::string_view> split_tokens(std::string_view line);

namespace detail {
inline void write_point(std::ostream& out, const RealPoint& x) {
  for (Eigen::Index j = 0; j < x.size(); ++j) out << (j ? " " : "") << format_real(x[j]);
}
inline void write_point(std::ostream& out, BitPoint x) { out << x; }

inline RealPoint read_point(std::span<const std::string_view> tokens, int d, std::size_t line,
                            const RealPoint*) {
  RealPoint x(d);
  for (int j = 0; j < d; ++j) x[j] = parse_real(tokens[static_cast<std::size_t>(j)], line);
  return x;
}
inline BitPoint read_point(std::span<const std::string_view> tokens, int d, std::size_t line,
                           const BitPoint*) {
  if (d != 1) throw Error(ErrorCode::kParse, "bit-string distributions have d = 1");
  return parse_u64(tokens[0], line);
}
}  // namespace detail

template <class Point>
void write_distribution(std::ostream& out, const FiniteMassartDist<Point>& dist) {
  out << dist.dim() << ' ' << format_real(dist.eta_bound()) << '\n';
  for (const auto& a : dist.atoms()) {
    detail::write_point(out, a.x);
    out << ' ' << format_real(a.p) << ' ' << to_int(a.f) << ' ' << format_real(a.eta) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "failed writing distribution");
}

template <class Point>
FiniteMassartDist<Point> read_distribution(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  int d = -1;
  double eta_bound = 0.0;
  std::vector<Atom<Point>> atoms;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_tokens(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (d < 0) {
      if (tokens.size() != 2) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected '<d> <eta_bound>'");
      d = static_cast<int>(parse_u64(tokens[0], line_no));
      eta_bound = parse_real(tokens[1], line_no);
      continue;
    }
    if (tokens.size() != static_cast<std::size_t>(d) + 3)
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(d + 3) + " fields");
    Atom<Point> a;
    a.x = detail::read_point(std::span<const std::string_view>(tokens), d, line_no,
                             static_cast<const Point*>(nullptr));
    a.p = parse_real(tokens[d], line_no);
    const auto f = tokens[d + 1];
    if (f == "1" || f == "+1") a.f = Label::kPositive;
    else if (f == "-1") a.f = Label::kNegative;
    else throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": label must be +1 or -1");
    a.eta = parse_real(tokens[d + 2], line_no);
    atoms.push_back(std::move(a));
  }
  if (d < 0) throw Error(ErrorCode::kParse, "missing header");
  return make_massart(std::move(atoms), eta_bound);
}

template <class Point>
std::string to_text(const FiniteMassartDist<Point>& dist) {
  std::ostringstream out;
  write_distribution(out, dist);
  return out.str();
}

template <class Point>
FiniteMassartDist<Point> distribution_from_text(const std::string& text) {
  std::istringstream in(text);
  return read_distribution<Point>(in);
}

}  // namespace massart

#include <charconv>
#include <cmath>
#include <string>

#include "massart/dist_io.hpp"

namespace massart {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicatePoint: return "DuplicatePoint";
    case ErrorCode::kNoiseExceedsBound: return "NoiseExceedsBound";
    case ErrorCode::kBoundNotBelowHalf: return "BoundNotBelowHalf";
    case ErrorCode::kBadProbability: return "BadProbability";
    case ErrorCode::kNonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kEpsilonTooSmall: return "EpsilonTooSmall";
    case ErrorCode::kDegenerateThreshold: return "DegenerateThreshold";
    case ErrorCode::kEtaZero: return "EtaZero";
    case ErrorCode::kDrawBudgetExceeded: return "DrawBudgetExceeded";
    case ErrorCode::kConditionalDrawBudgetExceeded: return "ConditionalDrawBudgetExceeded";
    case ErrorCode::kMaxRoundsExceeded: return "MaxRoundsExceeded";
    case ErrorCode::kZeroMass: return "ZeroMass";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kRhoOutOfRange: return "RhoOutOfRange";
    case ErrorCode::kSampleSourceExhausted: return "SampleSourceExhausted";
    case ErrorCode::kExactModeNeedsFiniteSupport: return "ExactModeNeedsFiniteSupport";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kConfigParse: return "ConfigParse";
    case ErrorCode::kUnknownWeakLearner: return "UnknownWeakLearner";
    case ErrorCode::kIoFailure: return "IoFailure";
  }
  return "Unknown";
}

std::string format_real(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view token, std::size_t line) {
  double v = 0.0;
  const char* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  auto res = std::from_chars(first, token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view token, std::size_t line) {
  std::uint64_t v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw Error(ErrorCode::kParse,
                "line " + std::to_string(line) + ": bad unsigned integer '" + std::string(token) + "'");
  return v;
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace massart

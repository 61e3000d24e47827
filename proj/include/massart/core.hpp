#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace massart {

/// Dense real-valued domain point (rectangle benchmark).
using RealPoint = Eigen::VectorXd;
/// n-bit string domain point, n <= 64 (adversarial harness).
using BitPoint = std::uint64_t;

enum class ErrorCode {
  kDuplicatePoint,
  kNoiseExceedsBound,
  kBoundNotBelowHalf,
  kBadProbability,
  kNonFiniteCoordinate,
  kInvalidParameter,
  kEpsilonTooSmall,
  kDegenerateThreshold,
  kEtaZero,
  kDrawBudgetExceeded,
  kConditionalDrawBudgetExceeded,
  kMaxRoundsExceeded,
  kZeroMass,
  kEmptySample,
  kRhoOutOfRange,
  kSampleSourceExhausted,
  kExactModeNeedsFiniteSupport,
  kParse,
  kConfigParse,
  kUnknownWeakLearner,
  kIoFailure,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Binary label. Stored as the signed value so that `y * g(x)` reads naturally.
enum class Label : int { kNegative = -1, kPositive = 1 };

constexpr int to_int(Label y) { return static_cast<int>(y); }
constexpr double to_real(Label y) { return static_cast<double>(static_cast<int>(y)); }
constexpr Label flip(Label y) { return y == Label::kPositive ? Label::kNegative : Label::kPositive; }
/// sign with sign(0) = +1.
constexpr Label sign_label(double v) { return v >= 0.0 ? Label::kPositive : Label::kNegative; }
constexpr double sign_real(double v) { return v >= 0.0 ? 1.0 : -1.0; }

inline constexpr std::size_t kNoAtom = std::numeric_limits<std::size_t>::max();

template <class Point>
struct LabeledExample {
  Point x;
  Label y = Label::kPositive;
  /// Index into the generating finite distribution, or kNoAtom.
  std::size_t atom = kNoAtom;
};

/// A (possibly confidence-valued) hypothesis x -> [-1, 1]. Must be pure.
template <class Point>
using Hypothesis = std::function<double(const Point&)>;

/// Seeded 64-bit generator. Every randomized routine takes one explicitly;
/// split() hands out an independent child stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  Rng split() { return Rng(engine_() ^ 0xD1B54A32D192ED03ULL); }

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace massart

#pragma once

#include <span>
#include <string>
#include <vector>

#include "massart/core.hpp"

namespace massart {

/// Supplies i.i.d. labeled examples to a weak learner.
template <class Point>
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual std::vector<LabeledExample<Point>> draw(std::size_t n, Rng& rng) = 0;
};

/// Serves a fixed sample in order; running past its end is an error.
template <class Point>
class FixedSample final : public ExampleSource<Point> {
 public:
  explicit FixedSample(std::vector<LabeledExample<Point>> examples) : examples_(std::move(examples)) {}

  std::vector<LabeledExample<Point>> draw(std::size_t n, Rng&) override {
    if (next_ + n > examples_.size())
      throw Error(ErrorCode::kSampleSourceExhausted,
                  "requested " + std::to_string(n) + " examples, " +
                      std::to_string(examples_.size() - next_) + " left");
    std::vector<LabeledExample<Point>> out(examples_.begin() + static_cast<std::ptrdiff_t>(next_),
                                           examples_.begin() + static_cast<std::ptrdiff_t>(next_ + n));
    next_ += n;
    return out;
  }

  std::size_t remaining() const { return examples_.size() - next_; }

 private:
  std::vector<LabeledExample<Point>> examples_;
  std::size_t next_ = 0;
};

/// Massart (alpha, gamma) weak learner: given examples from a Massart
/// distribution with noise bound below 1/2 - alpha, returns h with advantage
/// at least gamma with probability at least 2/3.
template <class Point>
class WeakLearner {
 public:
  virtual ~WeakLearner() = default;
  virtual std::string name() const = 0;
  /// m_wkl: examples consumed per call (upper bound for learners that draw in stages).
  virtual std::size_t sample_size() const = 0;
  virtual Hypothesis<Point> learn(ExampleSource<Point>& source, Rng& rng) = 0;
};

}  // namespace massart

#include "massart/rectangles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "massart/dist_io.hpp"

namespace massart {

Label rect_union_eval(const RectangleUnion& u, const RealPoint& x) {
  for (const auto& r : u.rects)
    if (r.contains(x)) return Label::kPositive;
  return Label::kNegative;
}

std::size_t wkl_box_sample_size(int d, int k, double alpha, double C, double scale) {
  const double raw = k * std::pow(C * d, k) / (alpha * alpha);
  const double n = std::ceil(scale * raw);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

double wkl_box_mass_floor(int d, int k, double alpha) { return alpha / (8.0 * std::pow(2.0 * d, k)); }

namespace {

using Term = std::pair<int, int>;  // (signed axis, threshold rank)

// Fewer terms first, then lexicographic.
bool key_less(std::span<const Term> a, const std::vector<Term>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Candidate {
  std::size_t cnt = 0;
  std::size_t pos = 0;
  std::vector<Term> key;
};

// Smaller positive fraction, then more mass, then smaller key.
inline bool better(std::size_t cnt, std::size_t pos, std::span<const Term> key, const Candidate& best) {
  const auto lhs = static_cast<unsigned __int128>(pos) * best.cnt;
  const auto rhs = static_cast<unsigned __int128>(best.pos) * cnt;
  if (lhs != rhs) return lhs < rhs;
  if (cnt != best.cnt) return cnt > best.cnt;
  return key_less(key, best.key);
}

class BoxSearch {
 public:
  BoxSearch(const std::vector<LabeledExample<RealPoint>>& sample, int d, double floor)
      : n_(sample.size()), axes_(2 * d), floor_count_(floor * static_cast<double>(sample.size())) {
    positive_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) positive_[i] = sample[i].y == Label::kPositive;
    values_.resize(axes_);
    rank_.assign(axes_, std::vector<int>(n_));
    for (int a = 0; a < axes_; ++a) {
      const int axis = a / 2;
      const double dir = a % 2 ? -1.0 : 1.0;
      std::vector<double> proj(n_);
      for (std::size_t i = 0; i < n_; ++i) proj[i] = dir * sample[i].x[axis];
      auto& vals = values_[a];
      vals = proj;
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      for (std::size_t i = 0; i < n_; ++i)
        rank_[a][i] = static_cast<int>(std::lower_bound(vals.begin(), vals.end(), proj[i]) - vals.begin());
    }
  }

  void offer(std::size_t cnt, std::size_t pos, std::span<const Term> key) {
    ++stats.candidates;
    if (!(static_cast<double>(cnt) > floor_count_)) return;
    ++stats.admissible;
    if (!have_ || better(cnt, pos, key, best_)) {
      best_.cnt = cnt;
      best_.pos = pos;
      best_.key.assign(key.begin(), key.end());
      have_ = true;
    }
  }

  // Boxes of exactly one inequality.
  void singles() {
    for (int a = 0; a < axes_; ++a) {
      const int R = static_cast<int>(values_[a].size());
      std::vector<std::size_t> cnt(R, 0), pos(R, 0);
      for (std::size_t i = 0; i < n_; ++i) {
        ++cnt[rank_[a][i]];
        pos[rank_[a][i]] += positive_[i];
      }
      std::size_t c = 0, p = 0;
      for (int r = R - 1; r >= 1; --r) {
        c += cnt[r];
        p += pos[r];
        const Term key[] = {{a, r}};
        offer(c, p, key);
      }
    }
  }

  // Boxes of exactly two inequalities on distinct signed axes a < b.
  void pairs() {
    for (int a = 0; a < axes_; ++a) {
      const int Ra = static_cast<int>(values_[a].size());
      std::vector<std::vector<std::size_t>> by_rank(Ra);
      for (std::size_t i = 0; i < n_; ++i) by_rank[rank_[a][i]].push_back(i);
      for (int b = a + 1; b < axes_; ++b) {
        const int Rb = static_cast<int>(values_[b].size());
        std::vector<std::size_t> cnt(Rb, 0), pos(Rb, 0);
        for (int ra = Ra - 1; ra >= 1; --ra) {
          for (std::size_t i : by_rank[ra]) {
            ++cnt[rank_[b][i]];
            pos[rank_[b][i]] += positive_[i];
          }
          std::size_t c = 0, p = 0;
          for (int rb = Rb - 1; rb >= 1; --rb) {
            c += cnt[rb];
            p += pos[rb];
            const Term key[] = {{a, ra}, {b, rb}};
            offer(c, p, key);
          }
        }
      }
    }
  }

  // Generic enumeration for larger boxes (sizes 3..k).
  void deeper(int k) {
    std::vector<std::size_t> all(n_);
    for (std::size_t i = 0; i < n_; ++i) all[i] = i;
    std::vector<Term> key;
    recurse(all, 0, key, k);
  }

  bool have() const { return have_; }
  const Candidate& best() const { return best_; }
  double threshold(int a, int r) const { return values_[a][r]; }

  BoxSearchStats stats;

 private:
  void recurse(const std::vector<std::size_t>& members, int start, std::vector<Term>& key, int k) {
    if (static_cast<int>(key.size()) >= 3) {
      std::size_t pos = 0;
      for (std::size_t i : members) pos += positive_[i];
      offer(members.size(), pos, key);
    }
    if (static_cast<int>(key.size()) == k) return;
    for (int a = start; a < axes_; ++a) {
      const int R = static_cast<int>(values_[a].size());
      for (int r = 1; r < R; ++r) {
        std::vector<std::size_t> next;
        for (std::size_t i : members)
          if (rank_[a][i] >= r) next.push_back(i);
        key.emplace_back(a, r);
        recurse(next, a + 1, key, k);
        key.pop_back();
      }
    }
  }

  std::size_t n_;
  int axes_;
  double floor_count_;
  std::vector<char> positive_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<int>> rank_;
  Candidate best_;
  bool have_ = false;
};

}  // namespace

BoxHypothesis wkl_box(const std::vector<LabeledExample<RealPoint>>& sample, int d, int k, double alpha,
                      BoxSearchStats* stats) {
  if (sample.empty()) throw Error(ErrorCode::kEmptySample, "wkl_box needs at least one example");
  if (d <= 0 || k < 0) throw Error(ErrorCode::kInvalidParameter, "wkl_box needs d >= 1 and k >= 0");
  for (const auto& e : sample)
    if (e.x.size() != d) throw Error(ErrorCode::kInvalidParameter, "example dimension differs from d");

  const std::size_t n = sample.size();
  std::size_t positives = 0;
  for (const auto& e : sample) positives += e.y == Label::kPositive;
  BoxSearchStats local;
  BoxHypothesis h;

  if (static_cast<double>(n - positives) < alpha / 2.0 * static_cast<double>(n)) {
    h.constant = true;
    if (stats) *stats = local;
    return h;
  }

  BoxSearch search(sample, d, wkl_box_mass_floor(d, k, alpha));
  search.offer(n, positives, {});
  if (k >= 1) search.singles();
  if (k >= 2) search.pairs();
  if (k >= 3) search.deeper(k);
  local = search.stats;

  if (!search.have()) {
    // Only reachable for alpha >= 1: the empty box has full mass. Majority constant.
    local.no_candidate = true;
    h.constant = positives * 2 >= n;
    if (stats) *stats = local;
    return h;
  }

  const auto& best = search.best();
  for (const auto& [a, r] : best.key)
    h.box.ineqs.push_back({a / 2, a % 2 ? -1 : 1, search.threshold(a, r)});
  local.inside = best.cnt;
  local.inside_positive = best.pos;

  const std::size_t out_pos = positives - best.pos;
  const std::size_t out_neg = (n - best.cnt) - out_pos;
  h.z = out_pos >= out_neg ? Label::kPositive : Label::kNegative;
  if (stats) *stats = local;
  return h;
}

Hypothesis<RealPoint> BoxWeakLearner::learn(ExampleSource<RealPoint>& source, Rng& rng) {
  const auto sample = source.draw(m_, rng);
  BoxHypothesis h = wkl_box(sample, d_, k_, alpha_, &last_);
  return [h = std::move(h)](const RealPoint& x) { return h(x); };
}

NegativeBox enumerate_negative_subrectangles(const RectangleUnion& u, const FiniteMassartDist<RealPoint>& dist) {
  NegativeBox best;
  for (const auto& r : u.rects)
    if (r.ineqs.empty()) return best;  // some rectangle is the whole space

  const std::size_t k = u.rects.size();
  std::vector<std::size_t> choice(k, 0);
  bool first = true;
  while (true) {
    ClosedBox box;
    for (std::size_t i = 0; i < k; ++i) box.ineqs.push_back(u.rects[i].ineqs[choice[i]]);
    double mass = 0.0;
    for (const auto& a : dist.atoms()) {
      if (!box.contains(a.x)) continue;
      if (rect_union_eval(u, a.x) != Label::kNegative)
        throw Error(ErrorCode::kInvalidParameter, "product box meets the positive region");
      mass += a.p;
    }
    if (first || mass > best.mass) {
      best = {box, mass};
      first = false;
    }
    std::size_t i = 0;
    while (i < k && ++choice[i] == u.rects[i].ineqs.size()) choice[i++] = 0;
    if (i == k) break;
  }
  return best;
}

double negative_mass(const RectangleUnion& u, const FiniteMassartDist<RealPoint>& dist) {
  double m = 0.0;
  for (const auto& a : dist.atoms())
    if (rect_union_eval(u, a.x) == Label::kNegative) m += a.p;
  return m;
}

RectangleUnion random_rectangle_union(int d, int k, Rng& rng, double min_side, double max_side) {
  RectangleUnion u;
  u.d = d;
  for (int i = 0; i < k; ++i) {
    Rectangle r;
    for (int j = 0; j < d; ++j) {
      const double side = rng.uniform(min_side, max_side);
      const double lo = rng.uniform(0.0, 1.0 - side);
      r.ineqs.push_back({j, 1, lo + side});
      r.ineqs.push_back({j, -1, -lo});
    }
    u.rects.push_back(std::move(r));
  }
  return u;
}

namespace {
double point_noise(const RealPoint& x, double eta, NoiseModel noise) {
  if (noise == NoiseModel::kConstant) return eta;
  // Smooth deterministic profile with values in [0, eta].
  double s = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) s += (j + 1) * x[j];
  return eta * 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * 3.0 * s));
}
}  // namespace

FiniteMassartDist<RealPoint> discretize_union(const RectangleUnion& u, std::size_t atoms, double eta,
                                              NoiseModel noise, Rng& rng) {
  std::vector<Atom<RealPoint>> list;
  list.reserve(atoms);
  for (std::size_t i = 0; i < atoms; ++i) {
    Atom<RealPoint> a;
    a.x = RealPoint(u.d);
    for (int j = 0; j < u.d; ++j) a.x[j] = rng.uniform();
    a.p = 1.0 / static_cast<double>(atoms);
    a.f = rect_union_eval(u, a.x);
    a.eta = noise == NoiseModel::kConstant ? eta : rng.uniform(0.0, eta);
    list.push_back(std::move(a));
  }
  return make_massart(std::move(list), eta);
}

GenerativeSource<RealPoint> union_source(const RectangleUnion& u, double eta, NoiseModel noise) {
  GenerativeSource<RealPoint> src;
  src.sample_x = [d = u.d](Rng& rng) {
    RealPoint x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.uniform();
    return x;
  };
  src.label = [u](const RealPoint& x) { return rect_union_eval(u, x); };
  src.noise = [eta, noise](const RealPoint& x) { return point_noise(x, eta, noise); };
  src.eta_bound = eta;
  return src;
}

void write_union(std::ostream& out, const RectangleUnion& u) {
  out << u.d << ' ' << u.k() << '\n';
  for (std::size_t i = 0; i < u.rects.size(); ++i)
    for (const auto& q : u.rects[i].ineqs)
      out << i << ' ' << q.axis << ' ' << (q.direction > 0 ? '+' : '-') << ' ' << format_real(q.threshold) << '\n';
  if (!out) throw Error(ErrorCode::kIoFailure, "failed writing rectangle union");
}

RectangleUnion read_union(std::istream& in) {
  RectangleUnion u;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_tokens(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!header) {
      if (tokens.size() != 2) throw Error(ErrorCode::kParse, where + "expected '<d> <k>'");
      u.d = static_cast<int>(parse_u64(tokens[0], line_no));
      u.rects.resize(parse_u64(tokens[1], line_no));
      header = true;
      continue;
    }
    if (tokens.size() != 4) throw Error(ErrorCode::kParse, where + "expected 'rect_id axis direction threshold'");
    const auto id = parse_u64(tokens[0], line_no);
    const auto axis = parse_u64(tokens[1], line_no);
    if (id >= u.rects.size()) throw Error(ErrorCode::kParse, where + "rect_id out of range");
    if (axis >= static_cast<std::uint64_t>(u.d)) throw Error(ErrorCode::kParse, where + "axis out of range");
    int dir;
    if (tokens[2] == "+" || tokens[2] == "+1" || tokens[2] == "1") dir = 1;
    else if (tokens[2] == "-" || tokens[2] == "-1") dir = -1;
    else throw Error(ErrorCode::kParse, where + "direction must be + or -");
    u.rects[id].ineqs.push_back({static_cast<int>(axis), dir, parse_real(tokens[3], line_no)});
  }
  if (!header) throw Error(ErrorCode::kParse, "missing header");
  return u;
}

}  // namespace massart

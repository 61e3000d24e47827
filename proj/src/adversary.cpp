#include "massart/adversary.hpp"

#include <sodium.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <map>
#include <unordered_set>

#include "massart/dist_io.hpp"

namespace massart {

namespace {

std::array<unsigned char, crypto_shorthash_KEYBYTES> derive_key(std::uint64_t seed) {
  static_assert(crypto_shorthash_KEYBYTES == 16);
  std::array<unsigned char, crypto_shorthash_KEYBYTES> key{};
  const std::uint64_t a = Rng::mix(seed);
  const std::uint64_t b = Rng::mix(seed ^ 0x5DEECE66DULL);
  for (int i = 0; i < 8; ++i) {
    key[i] = static_cast<unsigned char>(a >> (8 * i));
    key[8 + i] = static_cast<unsigned char>(b >> (8 * i));
  }
  return key;
}

std::size_t ceil_count(double v) {
  const double c = std::ceil(v);
  return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

}  // namespace

double keyed_uniform(std::uint64_t seed, char tag, BitPoint x) {
  static const int sodium_ready = sodium_init();
  (void)sodium_ready;
  const auto key = derive_key(seed);
  unsigned char msg[9];
  msg[0] = static_cast<unsigned char>(tag);
  for (int i = 0; i < 8; ++i) msg[1 + i] = static_cast<unsigned char>(x >> (8 * i));
  unsigned char out[crypto_shorthash_BYTES];
  crypto_shorthash(out, msg, sizeof msg, key.data());
  std::uint64_t h = 0;
  for (int i = 0; i < 8; ++i) h |= static_cast<std::uint64_t>(out[i]) << (8 * i);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Label biased_function(std::uint64_t seed, BitPoint x, double p) {
  return keyed_uniform(seed, 'F', x) < p ? Label::kPositive : Label::kNegative;
}

FiniteMassartDist<BitPoint> hard_distribution(const HardDistSpec& spec, std::size_t support_size) {
  if (!(spec.rho >= 0.0) || spec.rho >= spec.alpha / 1000.0)
    throw Error(ErrorCode::kRhoOutOfRange, "rho must lie in [0, alpha/1000)");
  if (spec.n < 1 || spec.n > 64) throw Error(ErrorCode::kInvalidParameter, "n must lie in [1, 64]");
  if (!(spec.eta >= 0.0 && spec.eta < 0.5)) throw Error(ErrorCode::kBoundNotBelowHalf, "eta must lie in [0, 1/2)");
  if (support_size == 0) throw Error(ErrorCode::kInvalidParameter, "support_size must be positive");
  if (spec.n < 64 && support_size > (std::uint64_t{1} << spec.n))
    throw Error(ErrorCode::kInvalidParameter, "support_size exceeds 2^n");

  const std::uint64_t mask = spec.n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << spec.n) - 1;
  const double eta_prime = spec.eta_prime();
  const double noisy = spec.noisy_fraction();
  Rng rng(spec.seed ^ 0x9A3D0C5E7B2F4811ULL);

  std::unordered_set<BitPoint> seen;
  seen.reserve(support_size * 2);
  std::vector<Atom<BitPoint>> atoms;
  atoms.reserve(support_size);
  while (atoms.size() < support_size) {
    const BitPoint x = rng.next_u64() & mask;
    if (!seen.insert(x).second) continue;
    Atom<BitPoint> a;
    a.x = x;
    a.p = 1.0 / static_cast<double>(support_size);
    a.f = biased_function(spec.seed, x, eta_prime);
    a.eta = (a.f == Label::kNegative && keyed_uniform(spec.seed, 'N', x) < noisy) ? spec.eta : 0.0;
    atoms.push_back(a);
  }
  return make_massart(std::move(atoms), spec.eta);
}

double exsim_negative_probability(const HardDistSpec& spec) {
  return 1.0 - spec.eta_prime() - spec.rho + spec.rho * spec.eta;
}

LabeledExample<BitPoint> exsim(const HardDistSpec& spec, Rng& rng) {
  const std::uint64_t mask = spec.n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << spec.n) - 1;
  LabeledExample<BitPoint> e;
  e.x = rng.next_u64() & mask;
  e.y = rng.bernoulli(exsim_negative_probability(spec)) ? Label::kNegative : Label::kPositive;
  return e;
}

void write_hard_spec(std::ostream& out, const HardDistSpec& spec) {
  out << "n = " << spec.n << '\n'
      << "eta = " << format_real(spec.eta) << '\n'
      << "alpha = " << format_real(spec.alpha) << '\n'
      << "rho = " << format_real(spec.rho) << '\n'
      << "seed = " << spec.seed << '\n';
  if (!out) throw Error(ErrorCode::kIoFailure, "failed writing hard distribution spec");
}

HardDistSpec read_hard_spec(std::istream& in) {
  HardDistSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto eq = line.find('=');
    auto tokens = split_tokens(line.substr(0, eq == std::string::npos ? line.size() : eq));
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (eq == std::string::npos || tokens.size() != 1)
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(tokens.front());
    const auto rhs = split_tokens(std::string_view(line).substr(eq + 1));
    if (rhs.size() != 1) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": missing value");
    if (key == "n") spec.n = static_cast<int>(parse_u64(rhs[0], line_no));
    else if (key == "eta") spec.eta = parse_real(rhs[0], line_no);
    else if (key == "alpha") spec.alpha = parse_real(rhs[0], line_no);
    else if (key == "rho") spec.rho = parse_real(rhs[0], line_no);
    else if (key == "seed") spec.seed = parse_u64(rhs[0], line_no);
    else throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return spec;
}

// ---------------------------------------------------------------------------

std::size_t RudeConfig::candidate_size() const {
  const double md = static_cast<double>(m);
  return ceil_count(scale * md * md / gamma);
}
std::size_t RudeConfig::mass_size() const {
  return ceil_count(scale * static_cast<double>(m) * static_cast<double>(T) / gamma);
}
std::size_t RudeConfig::label_size() const {
  const double md = static_cast<double>(m);
  return ceil_count(scale * md * md / (20.0 * gamma * gamma * gamma));
}

Label RudeState::operator()(BitPoint x) const {
  auto it = std::lower_bound(hh.begin(), hh.end(), x, [](const auto& e, BitPoint v) { return e.first < v; });
  return (it != hh.end() && it->first == x) ? it->second : Label::kNegative;
}

RudeState wkl_rude(ExampleSource<BitPoint>& source, const RudeConfig& config, Rng& rng) {
  if (config.m == 0 || config.T == 0 || !(config.gamma > 0.0) || !(config.scale > 0.0))
    throw Error(ErrorCode::kInvalidParameter, "rude learner needs m, T, gamma, scale > 0");
  RudeState st;
  st.m = config.m;
  st.T = config.T;
  st.gamma = config.gamma;
  st.scale = config.scale;
  const double md = static_cast<double>(config.m);

  // Step 1: candidates.
  std::vector<BitPoint> candidates;
  for (const auto& e : source.draw(config.candidate_size(), rng)) candidates.push_back(e.x);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Step 2: mass estimates on a fresh batch, then prune below v_h.
  const std::size_t n2 = config.mass_size();
  std::map<BitPoint, std::size_t> hits;
  for (const auto& e : source.draw(n2, rng))
    if (std::binary_search(candidates.begin(), candidates.end(), e.x)) ++hits[e.x];
  st.v_h = config.fixed_vh ? *config.fixed_vh : rng.uniform(config.gamma / (20.0 * md), config.gamma / (10.0 * md));
  std::vector<BitPoint> kept;
  for (BitPoint x : candidates) {
    auto it = hits.find(x);
    const double p_hat = it == hits.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n2);
    if (!(p_hat < st.v_h)) kept.push_back(x);
  }

  // Step 3: majority labels from one shared fresh batch.
  st.v_y = config.fixed_vy ? *config.fixed_vy : rng.uniform(0.5, 0.5 + config.gamma / (10.0 * md));
  std::map<BitPoint, std::pair<std::size_t, std::size_t>> labels;  // (positives, total)
  for (const auto& e : source.draw(config.label_size(), rng)) {
    if (!std::binary_search(kept.begin(), kept.end(), e.x)) continue;
    auto& c = labels[e.x];
    c.first += e.y == Label::kPositive;
    ++c.second;
  }
  for (BitPoint x : kept) {
    Label y = Label::kNegative;
    auto it = labels.find(x);
    if (it != labels.end() && it->second.second > 0) {
      const double p1 = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
      if (p1 >= st.v_y) y = Label::kPositive;
    }
    st.hh.emplace_back(x, y);
  }
  return st;
}

Hypothesis<BitPoint> RudeWeakLearner::learn(ExampleSource<BitPoint>& source, Rng& rng) {
  last_ = wkl_rude(source, config_, rng);
  return [st = last_](BitPoint x) { return to_real(st(x)); };
}

}  // namespace massart

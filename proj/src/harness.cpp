#include "massart/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "massart/adversary.hpp"
#include "massart/dist_io.hpp"
#include "massart/rectangles.hpp"

namespace massart {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"distribution",
       {"kind", "d", "k", "atoms", "eta", "noise", "min_side", "max_side", "n", "alpha", "rho", "path",
        "union_path", "instance_seed"}},
      {"learner", {"name", "k", "alpha", "C", "scale", "m", "T", "gamma", "vh", "vy"}},
      {"boost",
       {"eta", "alpha", "gamma", "epsilon", "delta", "sample_scale", "mode", "max_rounds", "wkl_calls", "s_max",
        "kappa_min", "withhold", "test_size"}},
      {"run", {"seeds", "out"}},
  };
  return keys;
}

class Fields {
 public:
  explicit Fields(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  void real(const std::string& section, const std::string& key, double& out) const {
    if (auto v = raw(section, key)) out = convert_real(section, key, *v);
  }
  void real(const std::string& section, const std::string& key, std::optional<double>& out) const {
    if (auto v = raw(section, key)) out = convert_real(section, key, *v);
  }
  template <class Int>
  void integer(const std::string& section, const std::string& key, Int& out) const {
    if (auto v = raw(section, key)) out = static_cast<Int>(convert_u64(section, key, *v));
  }
  template <class Int>
  void integer(const std::string& section, const std::string& key, std::optional<Int>& out) const {
    if (auto v = raw(section, key)) out = static_cast<Int>(convert_u64(section, key, *v));
  }
  void text(const std::string& section, const std::string& key, std::string& out) const {
    if (auto v = raw(section, key)) out = *v;
  }
  void flag(const std::string& section, const std::string& key, bool& out) const {
    auto v = raw(section, key);
    if (!v) return;
    if (*v == "true" || *v == "1" || *v == "yes") out = true;
    else if (*v == "false" || *v == "0" || *v == "no") out = false;
    else fail(section, key, *v, "expected true or false");
  }

  [[noreturn]] static void fail(const std::string& section, const std::string& key, const std::string& value,
                                const std::string& why) {
    throw Error(ErrorCode::kConfigParse, "field " + section + "." + key + " = '" + value + "': " + why);
  }

 private:
  static double convert_real(const std::string& section, const std::string& key, const std::string& v) {
    try {
      return parse_real(v, 0);
    } catch (const Error&) {
      fail(section, key, v, "expected a real number");
    }
  }
  static std::uint64_t convert_u64(const std::string& section, const std::string& key, const std::string& v) {
    try {
      return parse_u64(v, 0);
    } catch (const Error&) {
      fail(section, key, v, "expected a non-negative integer");
    }
  }

  const pt::ptree& tree_;
};

}  // namespace

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) return {parse_u64(text, 0)};
    const auto a = parse_u64(std::string_view(text).substr(0, dots), 0);
    const auto b = parse_u64(std::string_view(text).substr(dots + 2), 0);
    if (b < a) throw Error(ErrorCode::kParse, "empty range");
    std::vector<std::uint64_t> out;
    for (auto s = a; s <= b; ++s) {
      out.push_back(s);
      if (s == b) break;
    }
    return out;
  } catch (const Error&) {
    throw Error(ErrorCode::kConfigParse, "seed range '" + text + "' is not 'a..b'");
  }
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfigParse, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    auto it = known_keys().find(section);
    if (it == known_keys().end())
      throw Error(ErrorCode::kConfigParse, "unknown section [" + section + "]");
    if (!body.data().empty())
      throw Error(ErrorCode::kConfigParse, "key '" + section + "' must live inside a section");
    for (const auto& kv : body)
      if (!it->second.count(kv.first))
        throw Error(ErrorCode::kConfigParse, "unknown field " + section + "." + kv.first);
  }

  const Fields f(tree);
  RunConfig c;
  auto& d = c.distribution;
  f.text("distribution", "kind", d.kind);
  f.integer("distribution", "d", d.d);
  f.integer("distribution", "k", d.k);
  f.integer("distribution", "atoms", d.atoms);
  f.real("distribution", "eta", d.eta);
  f.text("distribution", "noise", d.noise);
  f.real("distribution", "min_side", d.min_side);
  f.real("distribution", "max_side", d.max_side);
  f.integer("distribution", "n", d.n);
  f.real("distribution", "alpha", d.alpha);
  f.real("distribution", "rho", d.rho);
  f.text("distribution", "path", d.path);
  f.text("distribution", "union_path", d.union_path);
  f.integer("distribution", "instance_seed", d.instance_seed);
  if (d.kind != "rectangles" && d.kind != "hard" && d.kind != "file")
    Fields::fail("distribution", "kind", d.kind, "expected rectangles, hard or file");
  if (d.noise != "uniform" && d.noise != "constant")
    Fields::fail("distribution", "noise", d.noise, "expected uniform or constant");
  if (d.kind == "file" && d.path.empty()) Fields::fail("distribution", "path", "", "required for kind = file");

  auto& l = c.learner;
  f.text("learner", "name", l.name);
  f.integer("learner", "k", l.k);
  f.real("learner", "alpha", l.alpha);
  f.real("learner", "C", l.C);
  f.real("learner", "scale", l.scale);
  f.integer("learner", "m", l.m);
  f.integer("learner", "T", l.T);
  f.real("learner", "gamma", l.gamma);
  f.real("learner", "vh", l.vh);
  f.real("learner", "vy", l.vy);

  auto& b = c.boost;
  f.real("boost", "eta", b.eta);
  f.real("boost", "alpha", b.alpha);
  f.real("boost", "gamma", b.gamma);
  f.real("boost", "epsilon", b.epsilon);
  f.real("boost", "delta", b.delta);
  f.real("boost", "sample_scale", b.sample_scale);
  if (auto m = f.raw("boost", "mode")) {
    try {
      b.mode = parse_mode(*m);
    } catch (const Error&) {
      Fields::fail("boost", "mode", *m, "expected exact or mc");
    }
  }
  f.integer("boost", "max_rounds", b.max_rounds);
  f.integer("boost", "wkl_calls", b.wkl_calls);
  f.real("boost", "s_max", b.s_max);
  f.real("boost", "kappa_min", b.kappa_min);
  f.flag("boost", "withhold", b.withhold);
  f.integer("boost", "test_size", b.test_size);

  if (auto s = f.raw("run", "seeds")) {
    try {
      c.seeds = s->empty() ? std::vector<std::uint64_t>{} : parse_seed_range(*s);
    } catch (const Error&) {
      Fields::fail("run", "seeds", *s, "expected 'a..b'");
    }
  }
  f.text("run", "out", c.out);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

BoostParams resolve_params(const RunConfig& config) {
  const auto& b = config.boost;
  ParamOverrides o;
  o.s_max = b.s_max;
  o.kappa_min = b.kappa_min;
  o.max_rounds = b.max_rounds;
  BoostParams p = compute_params(b.eta, b.alpha, b.gamma, b.epsilon, b.delta, b.sample_scale, b.mode, o);
  p.wkl_calls = b.wkl_calls;
  p.withhold = b.withhold;
  return p;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kInstanceSalt = 0x6C8E9CF570932BD5ULL;
constexpr std::uint64_t kOracleSalt = 0x2545F4914F6CDD1DULL;
constexpr std::uint64_t kBoostSalt = 0x9E6C63D0676A9A99ULL;
constexpr std::uint64_t kTestSalt = 0xB492B66FBE98F273ULL;

std::uint64_t instance_seed(const RunConfig& c, std::uint64_t seed) {
  return c.distribution.instance_seed ? *c.distribution.instance_seed : Rng::mix(seed ^ kInstanceSalt);
}

void summarize_trace(SeedResult& r) {
  for (const auto& rec : r.trace.rounds) {
    if (rec.max_abs_g) r.max_abs_g = std::max(r.max_abs_g, *rec.max_abs_g);
    if (rec.max_noise_rate) r.max_noise_rate = std::max(r.max_noise_rate, *rec.max_noise_rate);
    r.recalibrations += rec.overconfident;
    r.draws.samp += rec.draws.samp;
    r.draws.density += rec.draws.density;
    r.draws.overconfident += rec.draws.overconfident;
  }
  r.rounds = r.trace.rounds_used();
  r.total_draws = r.trace.total_draws;
  r.terminated = r.trace.terminated;
}

template <class Point>
SeedResult run_boost(MassartOracle<Point>& oracle, WeakLearner<Point>& learner, const BoostParams& params,
                     const RunConfig& config, std::uint64_t seed) {
  SeedResult r;
  r.seed = seed;
  Rng rng(Rng::mix(seed ^ kBoostSalt));
  try {
    auto result = boost(oracle, learner, params, rng);
    r.trace = std::move(result.trace);
    if (const auto* dist = oracle.finite()) {
      r.lerr_exact = exact_lerr(*dist, std::span<const double>(result.atom_g));
      r.ferr_exact = exact_ferr(*dist, std::span<const double>(result.atom_g));
      r.opt = exact_opt(*dist);
    } else {
      MassartOracle<Point> test(*oracle.generative(), Rng::mix(seed ^ kTestSalt));
      std::size_t wrong = 0;
      for (std::size_t i = 0; i < config.boost.test_size; ++i) {
        const auto e = test.draw();
        wrong += predict(result.hypothesis, e.x) != e.y;
      }
      r.lerr_heldout = static_cast<double>(wrong) / static_cast<double>(std::max<std::size_t>(1, config.boost.test_size));
    }
  } catch (const MaxRoundsExceeded& e) {
    r.status = to_string(e.code());
    r.message = e.what();
    r.trace = e.trace();
  } catch (const Error& e) {
    r.status = to_string(e.code());
    r.message = e.what();
  }
  summarize_trace(r);
  return r;
}

NoiseModel noise_model(const DistributionConfig& d) {
  return d.noise == "constant" ? NoiseModel::kConstant : NoiseModel::kUniform;
}

RectangleUnion make_union(const DistributionConfig& d, Rng& rng) {
  if (!d.union_path.empty()) {
    std::ifstream in(d.union_path);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + d.union_path);
    return read_union(in);
  }
  return random_rectangle_union(d.d, d.k, rng, d.min_side, d.max_side);
}

std::unique_ptr<WeakLearner<RealPoint>> real_learner(const RunConfig& c,
                                                     std::shared_ptr<const FiniteMassartDist<RealPoint>> dist,
                                                     std::optional<RectangleUnion> target, int d) {
  const auto& l = c.learner;
  if (l.name == "box") return std::make_unique<BoxWeakLearner>(d, l.k, l.alpha, l.C, l.scale);
  if (l.name == "target") {
    struct Target final : WeakLearner<RealPoint> {
      Hypothesis<RealPoint> h;
      std::string name() const override { return "target"; }
      std::size_t sample_size() const override { return 0; }
      Hypothesis<RealPoint> learn(ExampleSource<RealPoint>&, Rng&) override { return h; }
    };
    auto t = std::make_unique<Target>();
    if (target) t->h = [u = *target](const RealPoint& x) { return to_real(rect_union_eval(u, x)); };
    else t->h = target_hypothesis(std::move(dist));
    return t;
  }
  if (l.name == "rude") throw Error(ErrorCode::kConfigParse, "learner rude needs distribution kind = hard");
  throw Error(ErrorCode::kUnknownWeakLearner, "'" + l.name + "'");
}

}  // namespace

SeedResult run_seed(const RunConfig& config, std::uint64_t seed) {
  const BoostParams params = resolve_params(config);
  const auto& d = config.distribution;
  const std::uint64_t oracle_seed = Rng::mix(seed ^ kOracleSalt);
  Rng irng(instance_seed(config, seed));

  if (d.kind == "hard") {
    HardDistSpec spec{d.n, d.eta, d.alpha, d.rho, instance_seed(config, seed)};
    auto dist = std::make_shared<const FiniteMassartDist<BitPoint>>(hard_distribution(spec, d.atoms));
    std::unique_ptr<WeakLearner<BitPoint>> learner;
    const auto& l = config.learner;
    if (l.name == "rude") {
      RudeConfig rc;
      rc.m = l.m;
      rc.T = l.T;
      rc.gamma = l.gamma;
      rc.scale = l.scale;
      rc.fixed_vh = l.vh;
      rc.fixed_vy = l.vy;
      learner = std::make_unique<RudeWeakLearner>(rc);
    } else if (l.name == "target") {
      struct Target final : WeakLearner<BitPoint> {
        Hypothesis<BitPoint> h;
        std::string name() const override { return "target"; }
        std::size_t sample_size() const override { return 0; }
        Hypothesis<BitPoint> learn(ExampleSource<BitPoint>&, Rng&) override { return h; }
      };
      auto t = std::make_unique<Target>();
      t->h = [s = spec](BitPoint x) { return to_real(biased_function(s.seed, x, s.eta_prime())); };
      learner = std::move(t);
    } else if (l.name == "box") {
      throw Error(ErrorCode::kConfigParse, "learner box needs real-valued points");
    } else {
      throw Error(ErrorCode::kUnknownWeakLearner, "'" + l.name + "'");
    }
    MassartOracle<BitPoint> oracle(dist, oracle_seed);
    return run_boost(oracle, *learner, params, config, seed);
  }

  std::shared_ptr<const FiniteMassartDist<RealPoint>> dist;
  std::optional<RectangleUnion> target;
  int dim = d.d;
  if (d.kind == "file") {
    std::ifstream in(d.path);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + d.path);
    dist = std::make_shared<const FiniteMassartDist<RealPoint>>(read_distribution<RealPoint>(in));
    dim = dist->dim();
    if (!d.union_path.empty()) target = make_union(d, irng);
  } else {
    target = make_union(d, irng);
    dim = target->d;
    if (d.atoms > 0)
      dist = std::make_shared<const FiniteMassartDist<RealPoint>>(
          discretize_union(*target, d.atoms, d.eta, noise_model(d), irng));
  }
  auto learner = real_learner(config, dist, target, dim);
  if (dist) {
    MassartOracle<RealPoint> oracle(dist, oracle_seed);
    return run_boost(oracle, *learner, params, config, seed);
  }
  MassartOracle<RealPoint> oracle(union_source(*target, d.eta, noise_model(d)), oracle_seed);
  return run_boost(oracle, *learner, params, config, seed);
}

std::string materialize(const RunConfig& config, std::uint64_t seed) {
  const auto& d = config.distribution;
  Rng irng(instance_seed(config, seed));
  if (d.kind == "hard") {
    HardDistSpec spec{d.n, d.eta, d.alpha, d.rho, instance_seed(config, seed)};
    return to_text(hard_distribution(spec, d.atoms));
  }
  if (d.kind == "file") {
    std::ifstream in(d.path);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + d.path);
    return to_text(read_distribution<RealPoint>(in));
  }
  if (d.atoms == 0) throw Error(ErrorCode::kConfigParse, "field distribution.atoms = '0': no finite support");
  const auto u = make_union(d, irng);
  return to_text(discretize_union(u, d.atoms, d.eta, noise_model(d), irng));
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MB_THREADS")) {
    try {
      const auto cap = parse_u64(env, 0);
      if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const Error&) {
    }
  }
  return n;
}

RunReport run_experiment(const RunConfig& config) {
  RunReport report;
  report.params = resolve_params(config);
  report.seeds.resize(config.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.seeds.size()) return;
      try {
        report.seeds[i] = run_seed(config, config.seeds[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.seeds.size();
      }
    }
  };
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(1, config.seeds.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return report;
}

// ---------------------------------------------------------------------------

namespace {
std::vector<double> measured_lerr(const RunReport& r) {
  std::vector<double> v;
  for (const auto& s : r.seeds) {
    if (s.status != "ok") continue;
    if (s.lerr_exact) v.push_back(*s.lerr_exact);
    else if (s.lerr_heldout) v.push_back(*s.lerr_heldout);
  }
  return v;
}
double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}
}  // namespace

std::size_t RunReport::completed() const {
  return static_cast<std::size_t>(
      std::count_if(seeds.begin(), seeds.end(), [](const SeedResult& s) { return s.status == "ok"; }));
}

double RunReport::success_fraction() const {
  if (seeds.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& s : seeds) {
    if (s.status != "ok") continue;
    const auto e = s.lerr_exact ? s.lerr_exact : s.lerr_heldout;
    if (e && *e <= params.eta + params.epsilon) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(seeds.size());
}

double RunReport::mean_lerr() const { return mean_of(measured_lerr(*this)); }

double RunReport::mean_ferr() const {
  std::vector<double> v;
  for (const auto& s : seeds)
    if (s.status == "ok" && s.ferr_exact) v.push_back(*s.ferr_exact);
  return mean_of(v);
}

double RunReport::mean_rounds() const {
  std::vector<double> v;
  for (const auto& s : seeds)
    if (s.status == "ok") v.push_back(static_cast<double>(s.rounds));
  return mean_of(v);
}

double RunReport::rounds_percentile(double q) const {
  std::vector<double> v;
  for (const auto& s : seeds)
    if (s.status == "ok") v.push_back(static_cast<double>(s.rounds));
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) ;
  return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
}

double RunReport::round_bound() const {
  return 128.0 / (effective_eta(params) * params.gamma * params.gamma);
}

double RunReport::log_squared_bound() const {
  const double l = std::log(1.0 / effective_eta(params));
  return l * l / (params.gamma * params.gamma);
}

namespace {
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
nlohmann::json number(const std::optional<double>& v) { return v ? number(*v) : nlohmann::json(nullptr); }
}  // namespace

std::string summary_json(const RunReport& report) {
  using nlohmann::json;
  const auto& p = report.params;
  json params = {
      {"eta", p.eta},         {"alpha", p.alpha},         {"gamma", p.gamma},
      {"epsilon", p.epsilon}, {"delta", p.delta},         {"c", p.c},
      {"s", number(p.s)},     {"lambda", p.lambda},       {"kappa", p.kappa},
      {"delta_err", p.delta_err}, {"delta_dens", p.delta_dens}, {"delta_wkl", p.delta_wkl},
      {"max_rounds", p.max_rounds}, {"sample_scale", p.sample_scale}, {"mode", to_string(p.mode)},
      {"wkl_calls", wkl_call_count(p)}, {"withhold", p.withhold},
  };
  json aggregate = {
      {"seeds", report.seeds.size()},
      {"completed", report.completed()},
      {"success_fraction", report.success_fraction()},
      {"mean_lerr", number(report.mean_lerr())},
      {"mean_ferr", number(report.mean_ferr())},
      {"mean_rounds", number(report.mean_rounds())},
      {"rounds_p50", number(report.rounds_percentile(0.5))},
      {"rounds_p90", number(report.rounds_percentile(0.9))},
      {"rounds_max", number(report.rounds_percentile(1.0))},
      {"round_bound", report.round_bound()},
      {"log_squared_bound", report.log_squared_bound()},
      {"mean_rounds_over_log_squared_bound", number(report.mean_rounds() / report.log_squared_bound())},
  };
  json seeds = json::array();
  for (const auto& s : report.seeds) {
    seeds.push_back({
        {"seed", s.seed},
        {"status", s.status},
        {"message", s.message},
        {"terminated", s.terminated},
        {"rounds", s.rounds},
        {"total_draws", s.total_draws},
        {"draws", {{"samp", s.draws.samp}, {"density", s.draws.density}, {"overconfident", s.draws.overconfident}}},
        {"lerr_exact", number(s.lerr_exact)},
        {"ferr_exact", number(s.ferr_exact)},
        {"lerr_heldout", number(s.lerr_heldout)},
        {"opt", number(s.opt)},
        {"max_abs_g", s.max_abs_g},
        {"max_noise_rate", s.max_noise_rate},
        {"recalibrations", s.recalibrations},
        {"trace", "round_trace_" + std::to_string(s.seed) + ".csv"},
    });
  }
  json out = {{"params", params}, {"aggregate", aggregate}, {"seeds", seeds}};
  return out.dump(2) + "\n";
}

void emit_metrics(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "summary.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + (dir / "summary.json").string());
    out << summary_json(report);
    if (!out) throw Error(ErrorCode::kIoFailure, "failed writing summary.json");
  }
  for (const auto& s : report.seeds) {
    const auto path = dir / ("round_trace_" + std::to_string(s.seed) + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
    write_trace_csv(out, s.trace);
  }
}

}  // namespace massart

// rcm: command-line driver for critical random-cluster models on
// isoradial graphs.  Every run is a pure function of (config, seed):
// replicas draw their generators from the documented splitting rule and
// results are merged in replica-index order.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "isorc/builders.hpp"
#include "isorc/estimate.hpp"
#include "isorc/events.hpp"
#include "isorc/exchange.hpp"
#include "isorc/json_io.hpp"
#include "isorc/periodic.hpp"
#include "isorc/pushforward.hpp"
#include "isorc/quantum.hpp"
#include "isorc/rcm.hpp"
#include "isorc/sigma.hpp"
#include "isorc/stats.hpp"
#include "isorc/stt.hpp"
#include "isorc/weights.hpp"

using namespace isorc;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  int threads = 0;
  std::string out_dir = ".";
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RCM_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

json load_config(const GlobalOptions& opts) {
  if (opts.config_path.empty()) throw std::runtime_error("--config is required for this command");
  std::ifstream in(opts.config_path);
  if (!in) throw std::runtime_error("cannot open config: " + opts.config_path);
  json cfg = json::parse(in);
  if (cfg.value("schema", "") != "rcm-exp/1")
    throw std::runtime_error("config schema must be \"rcm-exp/1\"");
  if (!cfg.contains("seed") && !opts.seed_override)
    throw std::runtime_error("config must carry a seed (or pass --seed)");
  return cfg;
}

std::uint64_t seed_of(const json& cfg, const GlobalOptions& opts) {
  if (opts.seed_override) return *opts.seed_override;
  return cfg.at("seed").get<std::uint64_t>();
}

std::vector<double> angle_list(const json& spec, const std::string& key, int count,
                               double fallback) {
  std::vector<double> out;
  if (spec.contains(key)) {
    if (spec.at(key).is_array()) {
      auto period = spec.at(key).get<std::vector<double>>();
      for (int i = 0; i < count; ++i) out.push_back(periodic_angle(period, i));
      return out;
    }
    fallback = spec.at(key).get<double>();
  }
  out.assign(count, fallback);
  return out;
}

IsoradialGraph build_lattice_from(const json& cfg) {
  const auto& spec = cfg.at("lattice");
  std::string kind = spec.value("kind", "square");
  if (kind == "square") {
    int width = spec.at("width").get<int>();
    int height = spec.at("height").get<int>();
    AngleSequences seqs;
    seqs.alpha = angle_list(spec, "alpha", width, 0.0);
    seqs.beta = angle_list(spec, "beta", height, kPi / 2.0);
    int base_row = spec.value("base_row", height / 2);
    int base_col = spec.value("base_col", width / 2);
    return build_square_lattice(seqs, base_row, base_col);
  }
  if (kind == "geps") {
    QuantumRegion region{spec.at("columns").get<int>(), spec.at("height").get<double>()};
    return build_geps(spec.at("eps").get<double>(), region);
  }
  if (kind == "mixed") {
    MixedSpec ms;
    ms.alpha_period = spec.value("alpha", std::vector<double>{0.0});
    ms.beta1_period = spec.at("beta1").get<std::vector<double>>();
    ms.beta2_period = spec.at("beta2").get<std::vector<double>>();
    ms.M = spec.at("M").get<int>();
    ms.N1 = spec.at("N1").get<int>();
    ms.N2 = spec.at("N2").get<int>();
    ms.symmetric = spec.value("symmetric", false);
    return build_mixed(ms).graph;
  }
  if (kind == "rhombille") {
    PeriodicPatch patch;
    auto at = [](double deg) {
      double rad = deg * kPi / 180.0;
      return Vec2{std::cos(rad), std::sin(rad)};
    };
    Vec2 o{0.0, 0.0};
    Vec2 d1 = at(90), d2 = at(210), d3 = at(330);
    patch.rhombi.push_back({{d3, d3 + d1, d1, o}});
    patch.rhombi.push_back({{d1, d1 + d2, d2, o}});
    patch.rhombi.push_back({{d2, d2 + d3, d3, o}});
    patch.tau1 = {std::sqrt(3.0), 0.0};
    patch.tau2 = {std::sqrt(3.0) / 2.0, 1.5};
    double r = spec.value("radius", 6.0);
    return build_periodic_graph(patch, WindowBox{-r, r, -r, r});
  }
  throw std::runtime_error("unknown lattice kind: " + kind);
}

BoundaryCondition bc_from(const json& cfg) {
  std::string kind = cfg.contains("measure") ? cfg.at("measure").value("bc", "free") : "free";
  if (kind == "free") return BoundaryCondition::free();
  if (kind == "wired") return BoundaryCondition::wired();
  throw std::runtime_error("unsupported boundary condition: " + kind);
}

struct EventSpec {
  std::string id;
  std::function<bool(const IsoradialGraph&, const Configuration&)> detect;
};

std::vector<EventSpec> events_from(const json& cfg) {
  std::vector<EventSpec> out;
  if (!cfg.contains("events")) return out;
  int counter = 0;
  for (const auto& ev : cfg.at("events")) {
    std::string kind = ev.at("kind").get<std::string>();
    std::string id = ev.value("id", kind + "_" + std::to_string(counter++));
    if (kind == "crossing") {
      LatticeDomain dom{ev.at("domain").at("i").get<int>(), ev.at("domain").at("j").get<int>(),
                        ev.at("domain").at("k").get<int>(), ev.at("domain").at("l").get<int>()};
      Orientation orientation = ev.value("orientation", "horizontal") == std::string("horizontal")
                                    ? Orientation::Horizontal
                                    : Orientation::Vertical;
      Color color =
          ev.value("color", "primal") == std::string("primal") ? Color::Primal : Color::Dual;
      out.push_back({id, [=](const IsoradialGraph& g, const Configuration& c) {
                       return crossing(g, c, dom, orientation, color);
                     }});
    } else if (kind == "circuit") {
      int m1 = ev.at("m1").get<int>(), m2 = ev.at("m2").get<int>(), n = ev.at("n").get<int>();
      Color color =
          ev.value("color", "primal") == std::string("primal") ? Color::Primal : Color::Dual;
      out.push_back({id, [=](const IsoradialGraph& g, const Configuration& c) {
                       return circuit(g, c, m1, m2, n, color);
                     }});
    } else if (kind == "radius") {
      int n = ev.at("n").get<int>();
      RadiusMetric metric = ev.value("metric", "tracks") == std::string("tracks")
                                ? RadiusMetric::Tracks
                                : RadiusMetric::Euclidean;
      out.push_back({id, [=](const IsoradialGraph& g, const Configuration& c) {
                       return radius(g, c, n, metric);
                     }});
    } else if (kind == "arm") {
      int k = ev.at("k").get<int>(), n = ev.at("n").get<int>(), N = ev.at("N").get<int>();
      ArmStyle style = ev.value("style", "euclidean") == std::string("euclidean")
                           ? ArmStyle::Euclidean
                           : ArmStyle::BaseAnchored;
      out.push_back({id, [=](const IsoradialGraph& g, const Configuration& c) {
                       return arm_event(g, c, k, n, N, style);
                     }});
    } else {
      throw std::runtime_error("unknown event kind: " + kind);
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct EstimateRun {
  std::vector<EstimateRecord> records;
  double wall = 0.0;
};

EstimateRun run_event_estimates(const json& cfg, std::uint64_t seed, int threads) {
  StopWatch watch;
  IsoradialGraph g = build_lattice_from(cfg);
  double q = cfg.at("measure").at("q").get<double>();
  double beta = cfg.at("measure").value("beta", 1.0);
  BoundaryCondition bc = bc_from(cfg);
  WeightedView view = make_view(g, ModelParams{q, beta});
  auto events = events_from(cfg);
  if (events.empty()) throw std::runtime_error("no events configured");

  const auto& sp = cfg.at("sampler");
  int replicas = sp.value("replicas", 64);
  int burn_in = sp.value("burn_in", 100);
  int samples_each = sp.value("samples_per_replica", 1);
  int thin = sp.value("thin", 2);

  struct ReplicaOut {
    std::vector<std::int64_t> successes;
    std::int64_t count = 0;
    std::vector<double> series;
  };
  auto fn = std::function<ReplicaOut(int, Rng&)>([&](int replica, Rng& rng) {
    ReplicaOut out;
    out.successes.assign(events.size(), 0);
    HeatBathSampler sampler(view, q, bc, 0xc0ffee);
    Configuration c = Configuration::zeros(static_cast<int>(view.edges.size()), g.version);
    for (int s = 0; s < burn_in; ++s) sampler.sweep(c, rng);
    for (int s = 0; s < samples_each; ++s) {
      for (int t = 0; t < thin; ++t) sampler.sweep(c, rng);
      for (std::size_t e = 0; e < events.size(); ++e) {
        bool hit = events[e].detect(g, c);
        out.successes[e] += hit ? 1 : 0;
        if (replica == 0 && e == 0) out.series.push_back(hit ? 1.0 : 0.0);
      }
      ++out.count;
    }
    return out;
  });
  auto results = run_replicas<ReplicaOut>(replicas, threads, seed, fn);

  EstimateRun run;
  for (std::size_t e = 0; e < events.size(); ++e) {
    std::vector<ReplicaIndicator> indicators;
    for (const auto& r : results) {
      ReplicaIndicator ind;
      ind.successes = r.successes[e];
      ind.count = r.count;
      if (e == 0 && !r.series.empty()) ind.series = r.series;
      indicators.push_back(std::move(ind));
    }
    run.records.push_back(summarize(events[e].id, indicators, watch.seconds()));
  }
  run.wall = watch.seconds();
  return run;
}

std::string records_csv(const std::vector<EstimateRecord>& records) {
  std::string csv = "event,estimate,wilson_lo,wilson_hi,successes,count,tau_int\n";
  for (const auto& r : records) {
    csv += r.event_id + "," + format_double(r.estimate) + "," + format_double(r.wilson.lo) +
           "," + format_double(r.wilson.hi) + "," + std::to_string(r.successes) + "," +
           std::to_string(r.count) + "," + format_double(r.tau_int) + "\n";
  }
  return csv;
}

json run_decay(const json& cfg, std::uint64_t seed, int threads) {
  double q = cfg.at("measure").at("q").get<double>();
  double beta = cfg.at("measure").value("beta", 1.0);
  BoundaryCondition bc = bc_from(cfg);
  const auto& dc = cfg.at("decay");
  auto n_values = dc.at("n_values").get<std::vector<int>>();
  int replicas = dc.value("replicas", 200);
  int samples_each = dc.value("samples_per_replica", 16);
  int thin = dc.value("thin", 3);
  int burn_in = dc.value("burn_in", 100);

  json table = json::array();
  std::vector<double> xs, ys;
  for (std::size_t idx = 0; idx < n_values.size(); ++idx) {
    int n = n_values[idx];
    AngleSequences seqs;
    seqs.alpha.assign(2 * n + 1, 0.0);
    seqs.beta.assign(2 * n + 1, kPi / 2.0);
    IsoradialGraph g = build_square_lattice(seqs, n, n);
    WeightedView view = make_view(g, ModelParams{q, beta});

    auto fn = std::function<std::pair<std::int64_t, std::int64_t>(int, Rng&)>([&](int, Rng& rng) {
      HeatBathSampler sampler(view, q, bc, 0xdecaf);
      Configuration c = Configuration::zeros(static_cast<int>(view.edges.size()), g.version);
      for (int s = 0; s < burn_in; ++s) sampler.sweep(c, rng);
      std::int64_t hits = 0, total = 0;
      for (int s = 0; s < samples_each; ++s) {
        for (int t = 0; t < thin; ++t) sampler.sweep(c, rng);
        hits += radius(g, c, n) ? 1 : 0;
        ++total;
      }
      return std::make_pair(hits, total);
    });
    auto results = run_replicas<std::pair<std::int64_t, std::int64_t>>(
        replicas, threads, seed + static_cast<std::uint64_t>(idx + 1) * 0x9e3779b9ULL, fn);
    std::int64_t hits = 0, total = 0;
    for (auto [h, t] : results) {
      hits += h;
      total += t;
    }
    json row = {{"n", n}, {"successes", hits}, {"count", total}};
    if (hits == 0) {
      row["censored"] = true;  // zero-count events never enter the log fit
    } else {
      double p = static_cast<double>(hits) / static_cast<double>(total);
      row["estimate"] = p;
      auto iv = wilson_interval(hits, total);
      row["wilson"] = {iv.lo, iv.hi};
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(p));
    }
    table.push_back(std::move(row));
  }
  json out;
  out["table"] = std::move(table);
  if (xs.size() >= 2) {
    auto fit = least_squares(xs, ys);
    out["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
  } else {
    out["fit"] = nullptr;
  }
  return out;
}

json run_track_exchange_demo(const json& cfg, std::uint64_t seed) {
  const auto& spec = cfg.at("lattice");
  MixedSpec ms;
  ms.alpha_period = spec.value("alpha", std::vector<double>{0.0});
  ms.beta1_period = spec.at("beta1").get<std::vector<double>>();
  ms.beta2_period = spec.at("beta2").get<std::vector<double>>();
  ms.M = spec.at("M").get<int>();
  ms.N1 = spec.at("N1").get<int>();
  ms.N2 = spec.at("N2").get<int>();
  ms.symmetric = spec.value("symmetric", false);
  double q = cfg.at("measure").at("q").get<double>();

  auto built = build_mixed(ms);
  if (built.graph.edge_count() > 22)
    throw std::runtime_error("track-exchange-demo: window too large for exact enumeration");

  IsoradialGraph dry = built.graph;
  Rng rng(seed);
  auto sig = sigma_up(dry, nullptr, ms, q, &rng);
  std::vector<int> centres;
  for (const auto& r : sig.records) centres.push_back(r.center);

  json report;
  report["moves"] = centres.size();
  json move_log = json::array();
  for (const auto& r : sig.records) move_log.push_back(record_to_json(r));
  report["log"] = std::move(move_log);

  IsoradialGraph work = built.graph;
  auto before = exact_law_vector(work, q, BoundaryCondition::free());

  std::vector<int> marked;
  for (int v : built.graph.square->base_vertices)
    if (built.graph.verts[v].primal) marked.push_back(v);
  auto law_before = connection_law_from_vector(work, before, marked);

  auto pushed = push_through_centres(work, centres, q, before);
  auto target = exact_law_vector(work, q, BoundaryCondition::free());

  double worst = 0.0;
  for (std::size_t m = 0; m < pushed.size(); ++m)
    worst = std::max(worst, std::fabs(static_cast<double>(pushed[m] - target[m])));
  report["max_law_deviation"] = worst;
  report["law_preserved"] = worst < 1e-10;

  auto law_after = connection_law_from_vector(work, pushed, marked);
  json marginals = json::array();
  double worst_event = 0.0;
  for (const auto& [sig_key, p] : law_before) {
    auto it = law_after.find(sig_key);
    double pa = it == law_after.end() ? 0.0 : it->second;
    worst_event = std::max(worst_event, std::fabs(p - pa));
    marginals.push_back({{"partition", sig_key}, {"before", p}, {"after", pa}});
  }
  report["boundary_connection_events"] = std::move(marginals);
  report["max_event_deviation"] = worst_event;
  if (worst >= 1e-10) throw std::runtime_error("track-exchange-demo: exact law not preserved");
  return report;
}

json check(const std::string& name, bool pass, const std::string& detail = "") {
  return json{{"name", name}, {"pass", pass}, {"detail", detail}};
}

json verify_weights(bool inject_bad_r) {
  json checks = json::array();
  bool all = true;
  {
    bool ok = true;
    for (double q : {1.0, 2.0, 3.0, 4.0, 6.0, 10.0})
      for (double th = 0.15; th < kPi; th += 0.15) {
        ModelParams params{q, 1.0};
        double prod = edge_weight(th, params).y * edge_weight(kPi - th, params).y;
        if (std::fabs(prod - q) > 1e-12) ok = false;
      }
    checks.push_back(check("self_duality_y_product", ok));
    all &= ok;
  }
  {
    bool ok = true;
    double r_used = spectral_r(2.0) + (inject_bad_r ? 1e-3 : 0.0);
    double th = 2.0 * kPi / 3.0;
    double y = std::sqrt(2.0) * std::sin(r_used * (kPi - th)) / std::sin(r_used * th);
    if (std::fabs(edge_weight(th, ModelParams{2.0, 1.0}).y - y) > 1e-12) ok = false;
    for (double q : {1.0, 2.0, 3.0, 3.9}) {
      for (double A = 0.3; A < kPi - 0.3; A += 0.3)
        for (double B = A + 0.2; B < std::min(kPi - 0.05, A + kPi); B += 0.3) {
          double p = drift_eta(A, B, q);
          if (std::fabs(p - drift_eta_sine_form(A, B, q)) > 1e-12) ok = false;
          if (std::fabs(p - drift_eta_cosine_form(A, B, q)) > 1e-12) ok = false;
        }
    }
    checks.push_back(
        check("drift_eta_three_forms", ok, inject_bad_r ? "spectral r perturbed by 1e-3" : ""));
    all &= ok;
  }
  {
    bool ok = true;
    for (double q = 1.0; q <= 10.0; q += 0.5) {
      auto rates = quantum_rates(q);
      if (std::fabs(rates.mu0 / rates.lambda0 - q) > 1e-12) ok = false;
    }
    checks.push_back(check("quantum_rate_ratio", ok));
    all &= ok;
  }
  {
    bool ok = std::fabs(quantum_rates(4.0 - 1e-4).lambda0 - 1.0 / (2.0 * kPi)) < 1e-5 &&
              std::fabs(quantum_rates(4.0 + 1e-4).lambda0 - 1.0 / (2.0 * kPi)) < 1e-5;
    checks.push_back(check("q4_continuity", ok));
    all &= ok;
  }
  return json{{"suite", "weights"}, {"pass", all}, {"checks", checks}};
}

json verify_stt(std::uint64_t seed) {
  json checks = json::array();
  bool all = true;
  Rng rng(seed);
  {
    bool ok = true;
    for (int trial = 0; trial < 10 && ok; ++trial) {
      double q = 1.0 + 7.0 * rng.uniform01();
      double ya, yb;
      do {
        ya = 0.1 + rng.uniform01();
        yb = 0.1 + rng.uniform01();
      } while (ya * yb >= q);
      double yc = (q - ya * yb) / (ya * yb + ya + yb);
      if (std::fabs(triangle_residual({ya, yb, yc}, q)) > 1e-12) ok = false;
      auto st = star_from_triangle({ya, yb, yc}, q);
      if (std::fabs(star_residual(st, q)) > 1e-10) ok = false;
    }
    checks.push_back(check("critical_triples", ok));
    all &= ok;
  }
  {
    bool ok = true;
    std::array<double, 3> y{1.3, 0.8, 2.1};
    for (bool tri : {true, false})
      for (int in = 0; in < 8; ++in) {
        double total = 0.0;
        for (auto& o : stt_kernel_row(tri, y, 2.0, in)) total += o.prob;
        if (std::fabs(total - 1.0) > 1e-12) ok = false;
      }
    checks.push_back(check("kernel_rows_normalised", ok));
    all &= ok;
  }
  {
    MixedSpec ms;
    ms.alpha_period = {0.0};
    ms.beta1_period = {kPi / 2.0};
    ms.beta2_period = {2.1};
    ms.M = 1;
    ms.N1 = 0;
    ms.N2 = 0;
    auto built = build_mixed(ms);
    IsoradialGraph dry = built.graph;
    Rng r2(seed + 1);
    auto sig = sigma_up(dry, nullptr, ms, 2.0, &r2);
    std::vector<int> centres;
    for (const auto& r : sig.records) centres.push_back(r.center);
    IsoradialGraph work = built.graph;
    auto law = exact_law_vector(work, 2.0, BoundaryCondition::free());
    law = push_through_centres(work, centres, 2.0, law);
    auto target = exact_law_vector(work, 2.0, BoundaryCondition::free());
    double worst = 0.0;
    for (std::size_t m = 0; m < law.size(); ++m)
      worst = std::max(worst, std::fabs(static_cast<double>(law[m] - target[m])));
    checks.push_back(
        check("sigma_measure_preserved", worst < 1e-10, "max deviation " + format_double(worst)));
    all &= worst < 1e-10;
  }
  return json{{"suite", "stt"}, {"pass", all}, {"checks", checks}};
}

json verify_duality(std::uint64_t seed) {
  json checks = json::array();
  bool all = true;
  {
    AngleSequences s;
    s.alpha.assign(2, 0.0);
    s.beta.assign(3, kPi / 2.0);
    auto g = build_square_lattice(s);
    LatticeDomain dom{0, 1, 0, 2};
    bool ok = true;
    for (std::uint64_t mask = 0; mask < 64; ++mask) {
      Configuration c = Configuration::zeros(6, g.version);
      for (int e = 0; e < 6; ++e) c.open[e] = (mask >> e) & 1;
      if (crossing(g, c, dom, Orientation::Horizontal, Color::Primal) ==
          crossing(g, c, dom, Orientation::Vertical, Color::Dual))
        ok = false;
    }
    checks.push_back(check("xor_exhaustive_2x3", ok, "64/64 configurations"));
    all &= ok;
  }
  {
    AngleSequences s;
    s.alpha.assign(8, 0.0);
    s.beta.assign(8, kPi / 2.0);
    auto g = build_square_lattice(s, 4, 4);
    LatticeDomain dom{-4, 3, -4, 3};
    Rng rng(seed);
    bool ok = true;
    for (int trial = 0; trial < 20000; ++trial) {
      Configuration c = Configuration::zeros(g.edge_count(), g.version);
      double density = rng.uniform01();
      for (auto& b : c.open) b = rng.bernoulli(density);
      if (crossing(g, c, dom, Orientation::Horizontal, Color::Primal) ==
          crossing(g, c, dom, Orientation::Vertical, Color::Dual))
        ok = false;
    }
    checks.push_back(check("xor_sampled_8x8", ok, "20000 configurations"));
    all &= ok;
  }
  return json{{"suite", "duality"}, {"pass", all}, {"checks", checks}};
}

json verify_quantum(std::uint64_t seed) {
  json checks = json::array();
  bool all = true;
  Rng rng(seed);
  {
    auto res = poisson_limit_check(0.05, 4.0, 2.0, 200000, rng);
    checks.push_back(check("poisson_limit_tv", res.tv < 0.05, "tv " + format_double(res.tv)));
    all &= res.tv < 0.05;
  }
  {
    bool ok = true;
    for (double q = 1.0; q <= 10.0; q += 0.5) {
      auto rates = quantum_rates(q);
      if (std::fabs(rates.mu0 / rates.lambda0 - q) > 1e-12) ok = false;
    }
    checks.push_back(check("critical_ratio", ok));
    all &= ok;
  }
  {
    double eps = 0.1;
    QuantumRegion region{3, 1.0};
    auto g = build_geps(eps, region);
    const auto& meta = *g.square;
    bool ok = true;
    for (int trial = 0; trial < 10; ++trial) {
      Configuration c = Configuration::zeros(g.edge_count(), g.version);
      for (auto& b : c.open) b = rng.bernoulli(0.5);
      auto cc = map_to_continuum(g, c, eps, region);
      ContinuumClusters cl(cc);
      UnionFind uf(g.vertex_count());
      for (int e = 0; e < g.edge_count(); ++e) {
        if (!c.is_open(e)) continue;
        auto [u, v] = g.primal_edge(e);
        uf.merge(u, v);
      }
      for (int j = 0; j + 4 <= meta.height; j += 4)
        for (int i = 0; i <= meta.width; i += 2) {
          int va = meta.vid(i, j), vb = meta.vid(i, j + 4);
          if (!g.verts[va].primal) continue;
          if (uf.connected(va, vb) !=
              cl.connected(i / 2, j * eps / 2.0, i / 2, (j + 4) * eps / 2.0))
            ok = false;
        }
    }
    checks.push_back(check("mapping_connectivity", ok));
    all &= ok;
  }
  return json{{"suite", "quantum"}, {"pass", all}, {"checks", checks}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critical random-cluster models on isoradial graphs"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "experiment config (JSON, schema rcm-exp/1)");
  std::uint64_t seed_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "override the config seed");
  app.add_option("--threads", opts.threads, "worker threads (default: RCM_THREADS or hardware)");
  app.add_option("--out", opts.out_dir, "output directory");

  auto* cmd_verify = app.add_subcommand("verify", "run a module verification suite");
  std::string suite;
  cmd_verify->add_option("suite", suite, "stt | weights | duality | quantum")->required();
  bool inject_bad_r = false;
  cmd_verify->add_flag("--inject-bad-r", inject_bad_r,
                       "fault injection: perturb the spectral parameter");

  auto* cmd_build = app.add_subcommand("build-lattice", "construct and validate a lattice");
  auto* cmd_sample = app.add_subcommand("sample", "sample configurations to a JSONL log");
  auto* cmd_cross = app.add_subcommand("estimate-crossing", "Monte Carlo crossing estimates");
  auto* cmd_decay = app.add_subcommand("estimate-decay", "radius-event decay fit over an n-ladder");
  auto* cmd_arm = app.add_subcommand("estimate-arm", "Monte Carlo arm-event estimates");
  auto* cmd_quantum =
      app.add_subcommand("quantum", "sample the quantum model and run the Poisson check");
  auto* cmd_demo =
      app.add_subcommand("track-exchange-demo", "exact law preservation on a small mixture");
  auto* cmd_export = app.add_subcommand("export", "materialise lattice and experiment metadata");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) opts.seed_override = seed_val;
  int threads = resolve_threads(opts.threads);
  std::filesystem::path out_dir(opts.out_dir);

  try {
    if (*cmd_verify) {
      json report;
      std::uint64_t seed = opts.seed_override.value_or(0x15feed);
      if (suite == "weights") report = verify_weights(inject_bad_r);
      else if (suite == "stt") report = verify_stt(seed);
      else if (suite == "duality") report = verify_duality(seed);
      else if (suite == "quantum") report = verify_quantum(seed);
      else throw std::runtime_error("unknown suite: " + suite);
      std::cout << report.dump(2) << "\n";
      return report.at("pass").get<bool>() ? 0 : 1;
    }

    if (*cmd_build) {
      json cfg = load_config(opts);
      IsoradialGraph g = build_lattice_from(cfg);
      g.validate();
      validate_tracks(g);
      write_text(out_dir / "lattice.json", graph_to_json(g).dump(2) + "\n");
      json summary = {{"vertices", g.vertex_count()},
                      {"edges", g.edge_count()},
                      {"tracks", g.tracks.size()},
                      {"eps_bap", g.eps_bap},
                      {"hash", g.hash()}};
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (*cmd_sample) {
      json cfg = load_config(opts);
      std::uint64_t seed = seed_of(cfg, opts);
      IsoradialGraph g = build_lattice_from(cfg);
      double q = cfg.at("measure").at("q").get<double>();
      double beta = cfg.at("measure").value("beta", 1.0);
      WeightedView view = make_view(g, ModelParams{q, beta});
      BoundaryCondition bc = bc_from(cfg);
      const auto& sp = cfg.at("sampler");
      int replicas = sp.value("replicas", 64);
      int sweeps = sp.value("sweeps", 16);
      int burn_in = sp.value("burn_in", 100);
      auto fn = std::function<std::string(int, Rng&)>([&](int, Rng& rng) {
        Configuration c = sample_heat_bath(view, q, bc, sweeps, rng, burn_in);
        return config_snapshot(g, c).dump();
      });
      auto lines = run_replicas<std::string>(replicas, threads, seed, fn);
      std::string blob;
      for (const auto& line : lines) blob += line + "\n";
      write_text(out_dir / "samples.jsonl", blob);
      std::cout << json{{"replicas", replicas}, {"edges", g.edge_count()}}.dump() << "\n";
      return 0;
    }

    if (*cmd_cross || *cmd_arm) {
      json cfg = load_config(opts);
      std::uint64_t seed = seed_of(cfg, opts);
      auto run = run_event_estimates(cfg, seed, threads);
      write_text(out_dir / "estimates.csv", records_csv(run.records));
      json doc = json::array();
      for (const auto& r : run.records)
        doc.push_back({{"event", r.event_id},
                       {"estimate", r.estimate},
                       {"wilson", {r.wilson.lo, r.wilson.hi}},
                       {"successes", r.successes},
                       {"count", r.count},
                       {"tau_int", r.tau_int}});
      write_text(out_dir / "estimates.json", doc.dump(2) + "\n");
      std::cout << doc.dump(2) << "\n";
      return 0;
    }

    if (*cmd_decay) {
      json cfg = load_config(opts);
      std::uint64_t seed = seed_of(cfg, opts);
      json out = run_decay(cfg, seed, threads);
      write_text(out_dir / "decay.json", out.dump(2) + "\n");
      std::string csv = "n,successes,count,estimate,censored\n";
      for (const auto& row : out.at("table")) {
        csv += std::to_string(row.at("n").get<int>()) + "," +
               std::to_string(row.at("successes").get<std::int64_t>()) + "," +
               std::to_string(row.at("count").get<std::int64_t>()) + ",";
        csv += row.contains("estimate") ? format_double(row.at("estimate").get<double>()) : "";
        csv += std::string(",") + (row.value("censored", false) ? "1" : "0") + "\n";
      }
      write_text(out_dir / "decay.csv", csv);
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*cmd_quantum) {
      json cfg = load_config(opts);
      std::uint64_t seed = seed_of(cfg, opts);
      const auto& qc = cfg.at("quantum");
      double q = qc.at("q").get<double>();
      QuantumParams params = QuantumParams::critical_for(q);
      QuantumRegion region{qc.value("columns", 4), qc.value("height", 4.0)};
      QuantumSampleSettings settings;
      settings.eps = qc.value("eps", 0.05);
      settings.method = qc.value("method", "discretized") == std::string("free_poisson")
                            ? QuantumMethod::FreePoisson
                            : QuantumMethod::Discretized;
      settings.sweeps = qc.value("sweeps", 16);
      settings.burn_in = qc.value("burn_in", 100);
      int samples = qc.value("samples", 200);

      auto fn = std::function<std::string(int, Rng&)>([&](int, Rng& rng) {
        auto cc = sample_quantum(params, region, settings, rng);
        return continuum_to_json(cc).dump();
      });
      auto lines = run_replicas<std::string>(samples, threads, seed, fn);
      std::string blob;
      for (const auto& line : lines) blob += line + "\n";
      write_text(out_dir / "quantum.jsonl", blob);

      Rng rng(seed ^ 0xabcdef);
      auto pc = poisson_limit_check(settings.eps, region.height, q,
                                    qc.value("poisson_samples", 200000), rng);
      json report = {{"lambda", params.lambda},
                     {"mu", params.mu},
                     {"ratio", params.mu / params.lambda},
                     {"poisson_tv", pc.tv},
                     {"samples", samples}};
      write_text(out_dir / "quantum_report.json", report.dump(2) + "\n");
      std::cout << report.dump(2) << "\n";
      return 0;
    }

    if (*cmd_demo) {
      json cfg = load_config(opts);
      std::uint64_t seed = seed_of(cfg, opts);
      json report = run_track_exchange_demo(cfg, seed);
      write_text(out_dir / "track_exchange_demo.json", report.dump(2) + "\n");
      json summary = report;
      summary.erase("log");
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (*cmd_export) {
      json cfg = load_config(opts);
      IsoradialGraph g = build_lattice_from(cfg);
      g.validate();
      write_text(out_dir / "lattice.json", graph_to_json(g).dump(2) + "\n");
      json meta = {{"schema", cfg.value("schema", "")},
                   {"seed", seed_of(cfg, opts)},
                   {"graph_hash", g.hash()},
                   {"edges", g.edge_count()},
                   {"vertices", g.vertex_count()}};
      write_text(out_dir / "experiment.json", meta.dump(2) + "\n");
      std::cout << meta.dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}

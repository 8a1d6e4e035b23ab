#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arp/instance.hpp"
#include "arp/memo.hpp"
#include "arp/solver.hpp"
#include "arp/transfer.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitLimit = 2;

double finite_or(double value, double fallback) {
  return std::isfinite(value) ? value : fallback;
}

json number_or_null(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

std::vector<int> parse_tour(const std::string& text) {
  std::vector<int> tour;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    tour.push_back(std::stoi(text.substr(pos, next - pos)));
    pos = next + 1;
  }
  return tour;
}

int run_gen(int n, std::uint64_t seed, const std::string& out, bool force) {
  if (!force && std::filesystem::exists(out)) {
    std::fprintf(stderr, "gen: %s exists; pass --force to overwrite\n",
                 out.c_str());
    return kExitError;
  }
  const arp::Instance instance = arp::generate(n, seed);
  arp::save_csv(instance, out);
  std::printf("wrote %s (n=%d, seed=%llu)\n", out.c_str(), n,
              static_cast<unsigned long long>(seed));
  return kExitOk;
}

arp::Instance load_or_generate(const std::string& path, int n,
                               std::uint64_t seed) {
  if (!path.empty()) return arp::load_csv(path);
  return arp::generate(n, seed);
}

int run_eval(const std::string& path, int n, std::uint64_t seed,
             const std::string& tour_text, int multi) {
  const arp::Instance instance = load_or_generate(path, n, seed);
  const arp::Tour tour = parse_tour(tour_text);
  arp::validate_tour(instance, tour);
  arp::TransferEvaluator evaluator(instance.bodies);
  arp::BoundMemo memo(evaluator);
  const double cost = arp::evaluate_tour(instance, tour, memo, multi);
  std::printf("%.17g\n", cost);
  return kExitOk;
}

int run_solve(const std::string& path, int n, std::uint64_t seed,
              const arp::SolverConfig& config, const std::string& trace_out,
              const std::string& format) {
  const arp::Instance instance = load_or_generate(path, n, seed);
  arp::TransferEvaluator evaluator(instance.bodies);
  arp::BoundMemo memo(evaluator);
  const arp::SolveResult res = arp::peel_and_bound(instance, config, memo);

  if (!trace_out.empty()) {
    std::ofstream trace(trace_out);
    if (!trace) {
      std::fprintf(stderr, "solve: cannot write %s\n", trace_out.c_str());
      return kExitError;
    }
    for (const arp::TraceRecord& r : res.trace) {
      json line;
      line["t_wall"] = r.t_wall;
      line["lb"] = number_or_null(r.lb);
      line["ub"] = number_or_null(r.ub);
      line["queue_len"] = r.queue_len;
      line["b_calls"] = r.b_calls;
      line["bprime_calls"] = r.bprime_calls;
      trace << line.dump() << '\n';
      trace.flush();
    }
  }

  const double ub = res.cost;
  const double lb = finite_or(res.lb, 0.0);
  const double gap =
      std::isfinite(ub) && ub > 0.0 ? 100.0 * (ub - lb) / ub : 0.0;

  if (format == "records") {
    json summary;
    summary["lb"] = number_or_null(res.lb);
    summary["ub"] = number_or_null(res.cost);
    summary["gap_percent"] = gap;
    summary["wall_s"] = res.wall_s;
    summary["queue_remaining"] = res.queue_remaining;
    summary["proven_optimal"] = res.proven_optimal;
    summary["iterations"] = res.iterations;
    summary["b_calls"] = res.b_calls;
    summary["bprime_calls"] = res.bprime_calls;
    summary["tour"] = res.tour;
    json cfg;
    cfg["dd_width"] = config.dd_width;
    cfg["search_width"] = config.search_width;
    cfg["multi"] = config.multi;
    cfg["peel"] =
        config.peel == arp::PeelStrategy::maximal ? "maximal" : "last-exact";
    cfg["queue"] =
        config.queue == arp::QueueOrder::worst_bound ? "worst-bound" : "dfs";
    cfg["est_eat"] = config.est_eat;
    summary["config"] = cfg;
    std::printf("%s\n", summary.dump().c_str());
  } else {
    std::string tour_text;
    for (std::size_t i = 0; i < res.tour.size(); ++i) {
      tour_text += (i ? "," : "") + std::to_string(res.tour[i]);
    }
    std::printf("tour        %s\n", tour_text.c_str());
    std::printf("ub          %.17g\n", res.cost);
    std::printf("lb          %.17g\n", res.lb);
    std::printf("gap         %.6f%%\n", gap);
    std::printf("optimal     %s\n", res.proven_optimal ? "yes" : "no");
    std::printf("iterations  %ld\n", res.iterations);
    std::printf("queue       %d\n", res.queue_remaining);
    std::printf("b_calls     %ld\n", res.b_calls);
    std::printf("bprime      %ld\n", res.bprime_calls);
    std::printf("wall        %.3fs\n", res.wall_s);
  }
  return res.timed_out ? kExitLimit : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-diagram solver for asteroid routing"};
  app.require_subcommand(1);

  int n = 0;
  std::uint64_t seed = 0;
  std::string out_path, instance_path, tour_text;
  bool force = false;
  int multi = 1;

  CLI::App* gen = app.add_subcommand("gen", "Write a synthetic instance CSV");
  gen->add_option("--n", n, "asteroid count")->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "generator seed")->required();
  gen->add_option("--out", out_path, "output CSV path")->required();
  gen->add_flag("--force", force, "overwrite an existing file");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate one tour");
  eval->add_option("--instance", instance_path, "instance CSV");
  eval->add_option("--n", n, "asteroid count (with --seed)");
  eval->add_option("--seed", seed, "generator seed (with --n)");
  eval->add_option("--tour", tour_text, "comma-separated tour, e.g. 0,2,1")
      ->required();
  eval->add_option("--multi", multi, "optimizer restarts per leg");

  arp::SolverConfig config;
  double time_limit = 0.0;
  std::string peel = "maximal", queue = "worst-bound";
  std::string trace_out, format = "text";

  CLI::App* solve = app.add_subcommand("solve", "Run the solver");
  solve->add_option("--instance", instance_path, "instance CSV");
  solve->add_option("--n", n, "asteroid count (with --seed)");
  solve->add_option("--seed", seed, "generator seed (with --n)");
  solve->add_option("--dd-width", config.dd_width, "diagram width cap");
  solve->add_option("--search-width", config.search_width, "beam width");
  solve->add_option("--multi", config.multi, "optimizer restarts per leg");
  solve->add_option("--peel", peel, "maximal | last-exact")
      ->check(CLI::IsMember({"maximal", "last-exact"}));
  solve->add_option("--queue", queue, "worst-bound | dfs")
      ->check(CLI::IsMember({"worst-bound", "dfs"}));
  solve->add_option("--time-limit", time_limit, "seconds; 0 = none");
  solve->add_flag("--est-eat", config.est_eat, "arrival-epoch refinement");
  solve->add_option("--trace-out", trace_out, "bound trace path (JSONL)");
  solve->add_option("--format", format, "text | records")
      ->check(CLI::IsMember({"text", "records"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Collapse CLI11's exit-code zoo onto the 0/1/2 convention.
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (gen->parsed()) return run_gen(n, seed, out_path, force);
    if (eval->parsed()) {
      if (instance_path.empty() && n <= 0) {
        std::fprintf(stderr, "eval: need --instance or --n/--seed\n");
        return kExitError;
      }
      return run_eval(instance_path, n, seed, tour_text, multi);
    }
    if (instance_path.empty() && n <= 0) {
      std::fprintf(stderr, "solve: need --instance or --n/--seed\n");
      return kExitError;
    }
    config.peel = peel == "maximal" ? arp::PeelStrategy::maximal
                                    : arp::PeelStrategy::last_exact;
    config.queue = queue == "worst-bound" ? arp::QueueOrder::worst_bound
                                          : arp::QueueOrder::dfs;
    if (time_limit > 0.0) config.time_limit_s = time_limit;
    return run_solve(instance_path, n, seed, config, trace_out, format);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitError;
  }
}

// wtx: transform distance matrices by pairwise transport between localized
// measures, run mean shift, cluster, embed, and check the stability bounds.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "wt/wt.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace wt;

namespace {

struct LoadedInput {
  FiniteMetricMeasureSpace space;
  std::optional<PointCloud> cloud;  // present when the input was points
};

LoadedInput load_input(const std::string& path, const std::string& kind,
                       const std::string& weights_path) {
  const io::CsvTable table = io::read_csv(path);
  const bool square = table.labels.empty() && table.rows.size() == table.cols;
  const bool as_matrix = kind == "matrix" || (kind == "auto" && square);

  LoadedInput in;
  if (as_matrix) {
    in.space.dist = io::to_matrix(table);
    if (in.space.dist.rows() != in.space.dist.cols())
      throw std::runtime_error(path + ": distance matrix must be square");
    in.space.weights = Vector::Constant(in.space.dist.rows(),
                                        1.0 / double(in.space.dist.rows()));
  } else {
    in.cloud = io::to_cloud(table);
    in.space = from_point_cloud(*in.cloud);
  }
  if (!weights_path.empty()) {
    in.space.weights = io::read_weights(weights_path);
    if (in.cloud) in.cloud->weights = in.space.weights;
    if (in.space.weights.size() != in.space.size())
      throw std::runtime_error(weights_path + ": weight count does not match input");
  }
  const auto report = validate(in.space);
  if (!report.ok())
    throw std::runtime_error(path + ": invalid input\n" + report.str());
  return in;
}

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

void write_json(const fs::path& path, const json& j) {
  io::atomic_write(path, j.dump(2) + "\n");
}

double json_wall_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   t0)
      .count();
}

LocalizedMeasure measure_from_weights(const Vector& w) {
  LocalizedMeasure m;
  for (Index i = 0; i < w.size(); ++i)
    if (w(i) > 0.0) {
      m.support.push_back(i);
      m.mass.push_back(w(i));
    }
  if (m.support.empty()) throw std::runtime_error("measure has no positive mass");
  return m;
}

int run(int argc, char** argv) {
  CLI::App app{"Wasserstein transform toolkit"};
  app.require_subcommand(1);

  // Shared option state.
  std::string input, input_kind = "auto", weights_path, out_dir, out_file;
  std::string localization = "truncation", kernel = "truncation";
  std::string solver = "exact", epsilon_mode = "absolute", format = "csv";
  std::string dataset_kind = "dumbbell", scale = "paper";
  double epsilon = 0.0, sinkhorn_reg = 0.0, sinkhorn_tol = 1e-9;
  int iterations = 1, threads = 0, sinkhorn_max_iter = 10000;
  std::uint64_t seed = 0;

  auto add_io = [&](CLI::App* cmd, bool needs_epsilon) {
    cmd->add_option("--input", input, "input CSV (point cloud or distance matrix)")
        ->required();
    cmd->add_option("--input-kind", input_kind, "auto|points|matrix")
        ->check(CLI::IsMember({"auto", "points", "matrix"}));
    cmd->add_option("--weights", weights_path, "weights CSV, one value per line");
    if (needs_epsilon)
      cmd->add_option("--epsilon", epsilon, "scale parameter")->required();
  };
  auto add_solver = [&](CLI::App* cmd) {
    cmd->add_option("--solver", solver, "exact|sinkhorn|one-dim")
        ->check(CLI::IsMember({"exact", "sinkhorn", "one-dim"}));
    cmd->add_option("--sinkhorn-reg", sinkhorn_reg, "absolute regularization (0 = default schedule)");
    cmd->add_option("--sinkhorn-max-iter", sinkhorn_max_iter, "sinkhorn iteration cap");
    cmd->add_option("--sinkhorn-tol", sinkhorn_tol, "marginal residual target");
  };

  auto* t = app.add_subcommand("transform", "iterate the transform on a dataset");
  add_io(t, true);
  add_solver(t);
  t->add_option("--epsilon-mode", epsilon_mode, "absolute|relative")
      ->check(CLI::IsMember({"absolute", "relative"}));
  t->add_option("--iterations", iterations, "iteration count");
  t->add_option("--localization", localization, "truncation|kernel|meanshift")
      ->check(CLI::IsMember({"truncation", "kernel", "meanshift"}));
  t->add_option("--kernel", kernel, "truncation|gaussian|epanechnikov")
      ->check(CLI::IsMember({"truncation", "gaussian", "epanechnikov"}));
  t->add_option("--threads", threads, "worker count (default WTX_THREADS or hardware)");
  t->add_option("--out-dir", out_dir, "output directory")->required();
  t->add_option("--format", format, "csv|json matrices")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* m = app.add_subcommand("meanshift", "iterate kernel mean shift on a point cloud");
  add_io(m, true);
  m->add_option("--epsilon-mode", epsilon_mode, "absolute|relative")
      ->check(CLI::IsMember({"absolute", "relative"}));
  m->add_option("--iterations", iterations, "iteration count");
  m->add_option("--kernel", kernel, "truncation|gaussian|epanechnikov")
      ->check(CLI::IsMember({"truncation", "gaussian", "epanechnikov"}));
  m->add_option("--threads", threads, "worker count");
  m->add_option("--out-dir", out_dir, "output directory")->required();

  auto* c = app.add_subcommand("cluster", "single-linkage dendrogram");
  add_io(c, false);
  int cut_k = 0;
  c->add_option("--out", out_file, "dendrogram CSV")->required();
  c->add_option("--cut", cut_k, "also emit labels for a k-cluster cut");
  std::string labels_out = "labels.csv";
  c->add_option("--labels-out", labels_out, "labels CSV for --cut");

  auto* d = app.add_subcommand("mds", "classical scaling embedding");
  add_io(d, false);
  int dims = 2;
  d->add_option("--dims", dims, "embedding dimension");
  d->add_option("--out", out_file, "embedding CSV")->required();

  auto* o = app.add_subcommand("ot", "transport cost between two weight vectors");
  std::string mu_path, nu_path, ground_path, plan_out;
  o->add_option("--mu", mu_path, "source weights CSV")->required();
  o->add_option("--nu", nu_path, "target weights CSV")->required();
  o->add_option("--ground", ground_path, "ground cost matrix CSV")->required();
  o->add_option("--plan-out", plan_out, "optional coupling CSV");
  add_solver(o);

  auto* g = app.add_subcommand("gen-dataset", "deterministic experiment datasets");
  g->add_option("--kind", dataset_kind, "dumbbell|noisy-circle")
      ->check(CLI::IsMember({"dumbbell", "noisy-circle"}));
  g->add_option("--seed", seed, "generator seed");
  g->add_option("--scale", scale, "paper|desk")
      ->check(CLI::IsMember({"paper", "desk"}));
  g->add_option("--out", out_file, "output point-cloud CSV")->required();

  auto* v = app.add_subcommand("verify-stability", "monte-carlo slack report for the stability bounds");
  int trials = 100, n_points = 10;
  double vs_epsilon = 0.4;
  v->add_option("--trials", trials, "instance count");
  v->add_option("--seed", seed, "generator seed");
  v->add_option("--n-points", n_points, "points per instance (cap)");
  v->add_option("--epsilon", vs_epsilon, "scale, relative to each instance diameter");
  v->add_option("--out", out_file, "report JSON (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto solver_config = [&]() {
    SolverConfig cfg;
    cfg.method = solver == "exact"      ? SolverConfig::Method::exact
                 : solver == "sinkhorn" ? SolverConfig::Method::sinkhorn
                                        : SolverConfig::Method::one_dim;
    cfg.sinkhorn_reg = sinkhorn_reg;
    cfg.sinkhorn_max_iter = sinkhorn_max_iter;
    cfg.sinkhorn_tol = sinkhorn_tol;
    return cfg;
  };
  auto kernel_of = [&]() {
    return kernel == "truncation" ? Kernel::truncation
           : kernel == "gaussian" ? Kernel::gaussian
                                  : Kernel::epanechnikov;
  };

  if (t->parsed()) {
    const LoadedInput in = load_input(input, input_kind, weights_path);
    TransformConfig cfg;
    cfg.localization.kind = localization == "truncation"
                                ? LocalizationConfig::Kind::truncation
                            : localization == "kernel"
                                ? LocalizationConfig::Kind::kernel
                                : LocalizationConfig::Kind::meanshift_wrap;
    cfg.localization.epsilon = epsilon;
    cfg.localization.kernel = kernel_of();
    cfg.localization.inner = LocalizationConfig::Kind::truncation;
    cfg.solver = solver_config();
    cfg.iterations = iterations;
    cfg.epsilon_mode = epsilon_mode == "absolute"
                           ? TransformConfig::EpsilonMode::absolute
                           : TransformConfig::EpsilonMode::relative;
    cfg.threads = threads;
    Vector coords_1d;
    Matrix coords;
    if (in.cloud) {
      coords = in.cloud->coords;
      cfg.coords = &coords;
      if (in.cloud->dim() == 1) {
        coords_1d = in.cloud->coords.col(0);
        cfg.coords_1d = &coords_1d;
      }
    }
    if (cfg.localization.kind == LocalizationConfig::Kind::meanshift_wrap && !in.cloud)
      throw CLI::ValidationError(
          "--localization meanshift requires point-cloud input, not a distance matrix");
    if (cfg.solver.method == SolverConfig::Method::one_dim && cfg.coords_1d == nullptr)
      throw CLI::ValidationError("--solver one-dim requires 1d point-cloud input");

    fs::create_directories(out_dir);
    FiniteMetricMeasureSpace current = in.space;
    json trace;
    trace["iterations"] = json::array();
    for (int it = 1; it <= cfg.iterations; ++it) {
      IterationStats stats;
      stats.iteration = it;
      current = transform_once(current, cfg, &stats);
      const fs::path out = fs::path(out_dir) / ("iter_" + std::to_string(it) +
                                                (format == "csv" ? ".csv" : ".json"));
      if (format == "csv") {
        io::write_matrix(out, current.dist);
      } else {
        json jm = json::array();
        for (Index r = 0; r < current.dist.rows(); ++r) {
          json row = json::array();
          for (Index cc = 0; cc < current.dist.cols(); ++cc)
            row.push_back(current.dist(r, cc));
          jm.push_back(row);
        }
        write_json(out, jm);
      }
      trace["iterations"].push_back({{"iteration", stats.iteration},
                                     {"diameter", stats.diameter},
                                     {"epsilon_used", stats.epsilon_used},
                                     {"solve_count", stats.solve_count},
                                     {"wall_ms", stats.wall_ms}});
    }
    write_json(fs::path(out_dir) / "trace.json", trace);
    return 0;
  }

  if (m->parsed()) {
    const LoadedInput in = load_input(input, input_kind, weights_path);
    if (!in.cloud)
      throw CLI::ValidationError("meanshift requires point-cloud input");
    MeanShiftConfig cfg;
    cfg.kernel = kernel_of();
    cfg.epsilon = epsilon;
    cfg.epsilon_mode = epsilon_mode == "absolute"
                           ? MeanShiftConfig::EpsilonMode::absolute
                           : MeanShiftConfig::EpsilonMode::relative;
    cfg.iterations = iterations;
    cfg.threads = threads;
    const auto t0 = std::chrono::steady_clock::now();
    const auto [final_cloud, ms_trace] = meanshift_run(*in.cloud, cfg);
    fs::create_directories(out_dir);
    json trace;
    trace["iterations"] = json::array();
    for (std::size_t k = 0; k < ms_trace.clouds.size(); ++k) {
      io::write_cloud(fs::path(out_dir) / ("iter_" + std::to_string(k + 1) + ".csv"),
                      ms_trace.clouds[k]);
      const auto& rec = ms_trace.iterations[k];
      trace["iterations"].push_back({{"iteration", rec.iteration},
                                     {"diameter", rec.diameter},
                                     {"epsilon_used", rec.epsilon_used},
                                     {"max_displacement", rec.max_displacement}});
    }
    trace["wall_ms"] = json_wall_ms(t0);
    write_json(fs::path(out_dir) / "trace.json", trace);
    return 0;
  }

  if (c->parsed()) {
    const LoadedInput in = load_input(input, input_kind, weights_path);
    const Dendrogram dend = single_linkage(in.space);
    io::write_dendrogram(out_file, dend);
    if (cut_k > 0) {
      const auto labels = cut_dendrogram(dend, cut_k);
      std::string body;
      for (Index lab : labels) body += std::to_string(lab) + "\n";
      io::atomic_write(labels_out, body);
    }
    return 0;
  }

  if (d->parsed()) {
    const LoadedInput in = load_input(input, input_kind, weights_path);
    io::write_embedding(out_file, classical_mds(in.space, dims));
    return 0;
  }

  if (o->parsed()) {
    const Vector wa = io::read_weights(mu_path);
    const Vector wb = io::read_weights(nu_path);
    const Matrix ground = io::to_matrix(io::read_csv(ground_path));
    if (ground.rows() != wa.size() || ground.cols() != wb.size())
      throw std::runtime_error("ground matrix shape does not match the weight vectors");
    const LocalizedMeasure mu = measure_from_weights(wa);
    const LocalizedMeasure nu = measure_from_weights(wb);
    Matrix sliced(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
      for (std::size_t j = 0; j < nu.size(); ++j)
        sliced(Index(i), Index(j)) = ground(mu.support[i], nu.support[j]);
    const SolverConfig cfg = solver_config();
    if (cfg.method == SolverConfig::Method::one_dim)
      throw CLI::ValidationError("ot: one-dim needs an embedding; use exact or sinkhorn");
    const TransportPlan plan = cfg.method == SolverConfig::Method::exact
                                   ? wasserstein_exact(mu, nu, sliced)
                                   : wasserstein_sinkhorn(mu, nu, sliced, cfg);
    std::cout << io::format_double(plan.cost) << "\n";
    if (!plan_out.empty()) {
      Matrix full = Matrix::Zero(wa.size(), wb.size());
      for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j)
          full(mu.support[i], nu.support[j]) = plan.plan(Index(i), Index(j));
      io::write_matrix(plan_out, full);
    }
    return 0;
  }

  if (g->parsed()) {
    DatasetSpec spec;
    spec.kind = dataset_kind == "dumbbell" ? DatasetSpec::Kind::dumbbell
                                           : DatasetSpec::Kind::noisy_circle;
    spec.seed = seed;
    if (scale == "desk" && spec.kind == DatasetSpec::Kind::noisy_circle) {
      spec.circle_n = 200;
      spec.outlier_n = 300;
    }
    io::write_cloud(out_file, gen_dataset(spec));
    return 0;
  }

  if (v->parsed()) {
    SplitMix64 rng(seed);
    struct Tally {
      int violations = 0;
      double min_slack = std::numeric_limits<double>::infinity();
      double max_lhs = 0.0;
      json worst;
    };
    auto note = [](Tally& t, const StabilityReport& rep, int trial) {
      if (rep.slack < -1e-9) ++t.violations;
      if (rep.slack < t.min_slack) {
        t.min_slack = rep.slack;
        t.worst = {{"trial", trial},
                   {"lhs", finite_or_string(rep.lhs)},
                   {"rhs", finite_or_string(rep.rhs)},
                   {"lambda", rep.lambda},
                   {"epsilon", rep.epsilon},
                   {"perturbation", rep.perturbation}};
      }
      t.max_lhs = std::max(t.max_lhs, rep.lhs);
    };
    Tally trunc, metric, shift;
    for (int trial = 0; trial < trials; ++trial) {
      const int n = 3 + static_cast<int>(rng.uniform() * std::max(1, n_points - 2));
      const PointCloud cloud = [&] {
        PointCloud cl;
        cl.coords = Matrix(n, 2);
        for (Index i = 0; i < n; ++i)
          for (Index j = 0; j < 2; ++j) cl.coords(i, j) = rng.uniform();
        return cl;
      }();
      FiniteMetricMeasureSpace space = from_point_cloud(cloud);
      Vector alpha(n), beta(n);
      for (Index i = 0; i < n; ++i) alpha(i) = 0.2 + rng.uniform();
      for (Index i = 0; i < n; ++i) beta(i) = 0.2 + rng.uniform();
      alpha /= alpha.sum();
      beta /= beta.sum();
      space.weights = alpha;
      const double eps = vs_epsilon * diameter(space);
      note(trunc, truncation_stability(space, beta, eps), trial);
      note(metric, metric_stability(space, beta, eps), trial);
      PointCloud weighted = cloud;
      weighted.weights = alpha;
      note(shift, meanshift_stability(weighted, beta, eps), trial);
    }
    json report;
    report["trials"] = trials;
    report["seed"] = seed;
    report["epsilon_relative"] = vs_epsilon;
    auto dump = [&](const Tally& t) {
      return json{{"violations", t.violations},
                  {"min_slack", finite_or_string(t.min_slack)},
                  {"max_lhs", t.max_lhs},
                  {"worst", t.worst}};
    };
    report["localization"] = dump(trunc);
    report["transformed_metric"] = dump(metric);
    report["mean_shift"] = dump(shift);
    if (out_file.empty())
      std::cout << report.dump(2) << "\n";
    else
      write_json(out_file, report);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <iostream>

#include "dissip/examples.hpp"
#include "dissip/io.hpp"

using namespace dissip;
namespace fs = std::filesystem;

namespace {

std::string default_output(const std::string& problem, const std::string& suffix) {
  fs::path p(problem);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::string csv_path_for(const std::string& results) {
  fs::path p(results);
  std::string stem = p.stem().string();
  if (stem.size() > 8 && stem.ends_with(".results")) stem.resize(stem.size() - 8);
  return (p.parent_path() / (stem + ".residuals.csv")).string();
}

std::vector<json> collect_results(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.path().extension() == ".json") files.push_back(e.path().string());
      }
    } else {
      files.push_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<json> out;
  for (const auto& f : files) {
    json j = json::parse(read_text(f));
    if (j.contains("outcome")) out.push_back(std::move(j));
  }
  if (out.empty()) throw std::runtime_error("no results files found");
  return out;
}

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::Certified: return 0;
    case Outcome::IterationLimit:
    case Outcome::Stalled: return 2;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional dissipativity certification with ADMM"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_run_options = [&](CLI::App* c) {
    c->add_option("problem", cfg.problem, "problem file (JSON)")->required()->check(CLI::ExistingFile);
    c->add_option("-o,--output", cfg.output, "results file");
    c->add_option("--max-iters", cfg.max_iters, "ADMM iteration cap")->capture_default_str();
    c->add_option("--degree", cfg.storage_degree, "polynomial storage degree")->capture_default_str();
    c->add_option("--threads", cfg.threads, "local update workers (0: all cores)")->capture_default_str();
    c->add_option("--tol", cfg.tol_gap, "interior-point tolerance")->capture_default_str();
    c->add_option("--stall-window", cfg.stall_window, "stall detector window")->capture_default_str();
  };

  auto* certify = app.add_subcommand("certify", "run ADMM on a problem file");
  add_run_options(certify);
  certify->add_flag("--direct", cfg.direct, "also run the direct separable search for comparison");

  auto* bisect = app.add_subcommand("bisect-gain", "smallest certified L2 gain");
  add_run_options(bisect);
  bisect->add_option("--lo", cfg.gamma_lo, "lower gain bound")->capture_default_str();
  bisect->add_option("--hi", cfg.gamma_hi, "upper gain bound")->capture_default_str();
  bisect->add_option("--tol-gamma", cfg.tol_gamma, "bisection tolerance")->capture_default_str();

  std::string family, gen_out;
  int n = 10, order = 3;
  double gamma = 1.0;
  bool unpinned = false, static_iqc = false, unscaled = false;
  auto* gen = app.add_subcommand("gen-example", "write a generated problem file");
  gen->add_option("--family", family, "skew | rational | poly | platoon | iqc_pair")
      ->required()
      ->check(CLI::IsMember({"skew", "rational", "poly", "platoon", "iqc_pair"}));
  gen->add_option("--n", n, "number of subsystems")->capture_default_str();
  gen->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  gen->add_option("--gamma", gamma, "gain target (platoon, iqc_pair)")->capture_default_str();
  gen->add_option("--order", order, "filter basis order K (iqc_pair)")->capture_default_str();
  gen->add_flag("--unpinned", unpinned, "platoon without pinned passivity entries");
  gen->add_flag("--static", static_iqc, "iqc_pair with static supply rates");
  gen->add_flag("--unscaled", unscaled, "rational/poly without input/output scalings");
  gen->add_option("-o,--output", gen_out, "problem file")->required();

  std::vector<std::string> report_in;
  std::string report_dir = ".";
  auto* report = app.add_subcommand("report", "cumulative-iteration and runtime tables from results files");
  report->add_option("results", report_in, "results files or directories")->required();
  report->add_option("--out-dir", report_dir, "directory for CSV and SVG output")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*certify || *bisect) {
      cfg.command = *certify ? "certify" : "bisect-gain";
      if (cfg.output.empty()) cfg.output = default_output(cfg.problem, ".results.json");
      const Problem problem = load_problem(cfg.problem);
      const AdmmOptions opts = cfg.admm_options();
      const std::string csv = csv_path_for(cfg.output);
      if (*certify) {
        const CertResult r = run(problem, opts);
        std::optional<DirectResult> direct;
        if (cfg.direct && problem.iqc) {
          std::cerr << "warning: no direct search for IQC problems; --direct ignored\n";
        } else if (cfg.direct) {
          direct = is_all_lti(problem) ? direct_separable_certify(problem, opts.global)
                                       : direct_sos_certify(problem, opts.local);
        }
        write_text(csv, residual_report(r));
        write_text(cfg.output, results_to_json(r, cfg, csv, std::nullopt, direct, problem.note).dump(2) + "\n");
        std::cout << to_string(r.outcome) << " after " << r.iterations << " iterations";
        if (!r.message.empty()) std::cout << " (" << r.message << ")";
        std::cout << "\n";
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
        return exit_code(r.outcome);
      }
      const BisectResult b = bisect_gain(problem, cfg.gamma_lo, cfg.gamma_hi, cfg.tol_gamma, opts);
      write_text(csv, residual_report(b.at_gamma));
      write_text(cfg.output, results_to_json(b.at_gamma, cfg, csv, b, std::nullopt, problem.note).dump(2) + "\n");
      if (!b.ok) {
        std::cout << "no certified gain in [" << cfg.gamma_lo << ", " << cfg.gamma_hi << "]: " << b.message << "\n";
        return 2;
      }
      std::cout << "gamma " << b.gamma << "\n";
      return 0;
    }
    if (*gen) {
      Problem p;
      RationalParams rp;
      rp.scaled = !unscaled;
      if (family == "skew") {
        p = gen_skew(n, cfg.seed);
      } else if (family == "rational") {
        p = gen_rational(n, cfg.seed, rp);
      } else if (family == "poly") {
        p = gen_poly(n, cfg.seed, rp);
      } else if (family == "platoon") {
        p = gen_platoon(n, !unpinned, gamma);
      } else {
        p = gen_iqc_pair(!static_iqc, order, gamma);
      }
      save_problem(p, gen_out);
      return 0;
    }
    const std::vector<json> results = collect_results(report_in);
    fs::create_directories(report_dir);
    const fs::path dir(report_dir);
    write_text((dir / "cumulative_iterations.csv").string(), cumulative_iterations_csv(results));
    write_text((dir / "cumulative_iterations.svg").string(), cumulative_iterations_svg(results));
    write_text((dir / "runtime.csv").string(), runtime_table_csv(results));
    write_text((dir / "runtime.svg").string(), runtime_table_svg(results));
    std::cout << results.size() << " results summarized in " << report_dir << "\n";
    return 0;
  } catch (const SchemaError& e) {
    std::cerr << "schema error at " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}

#pragma once

// Command implementations behind the amdp_lab executable. Each command
// returns the process exit code:
//   0 success, 1 a certificate failed, 2 invalid input or configuration,
//   3 solver failure.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "amdp/corpus.hpp"
#include "amdp/experiment.hpp"
#include "amdp/hard_instances.hpp"
#include "amdp/io.hpp"
#include "amdp/parameters.hpp"
#include "amdp/reduction.hpp"
#include "amdp/report.hpp"

namespace amdp::cli {

enum ExitCode : int { kOk = 0, kCertificateFailed = 1, kInvalidInput = 2, kSolverFailure = 3 };

struct Options {
  std::vector<std::string> mdp_paths;
  std::optional<double> gamma;
  /// Accuracy target; hard instances default to 1/32, the solvers to 0.25.
  std::optional<double> epsilon;
  double delta = 0.1;
  std::string H = "oracle";
  std::vector<std::size_t> N;
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  std::string out;
  std::string method = "enumerate";
  // Hard-instance flags.
  std::optional<std::string> variant;
  std::size_t S = 6;
  std::size_t A = 3;
  double D = 32.0;
  std::size_t k = 1;
  std::size_t l = 2;
  // Corpus flags for certify.
  std::size_t count = 0;
  std::size_t smax = 6;
  std::size_t amax = 4;
  bool timing = false;
};

/// Maps library exceptions onto exit codes.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kSolverFailure;
  }
}

inline HardInstanceSpec hard_spec(const Options& o) {
  HardInstanceSpec spec;
  spec.S = o.S;
  spec.A = o.A;
  spec.D = o.D;
  spec.epsilon = o.epsilon.value_or(1.0 / 32.0);
  spec.variant = parse_variant(o.variant.value_or("M1"));
  spec.k = o.k;
  spec.l = o.l;
  return spec;
}

/// The instance named by --mdp, or else the hard instance named by
/// --variant (its construction epsilon is --epsilon when that is
/// admissible, 1/32 otherwise).
inline CorpusEntry load_instance(const Options& o) {
  if (!o.mdp_paths.empty()) {
    const std::filesystem::path p(o.mdp_paths.front());
    TabularMdp m = read_mdp(p);
    std::string id = p.stem().string();
    if (m.metadata().contains("name") && m.metadata()["name"].is_string()) {
      id = m.metadata()["name"].get<std::string>();
    }
    return {id, std::move(m)};
  }
  if (o.variant) {
    HardInstanceSpec spec = hard_spec(o);
    if (spec.epsilon > 1.0 / 32.0) spec.epsilon = 1.0 / 32.0;
    TabularMdp m = build_hard_instance(spec);
    return {m.metadata()["name"].get<std::string>() + "_S" + std::to_string(spec.S) + "_A" +
                std::to_string(spec.A),
            std::move(m)};
  }
  throw ValidationError("no instance given: pass --mdp PATH or --variant M0|M1|MKL");
}

inline AmdpMethod parse_method(const std::string& s) {
  if (s == "enumerate") return AmdpMethod::enumerate;
  if (s == "relative_vi") return AmdpMethod::relative_vi;
  throw ValidationError("unknown method '" + s + "' (expected enumerate or relative_vi)");
}

inline std::optional<double> parse_h(const std::string& h) {
  if (h == "oracle") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(h, &used);
    if (used != h.size()) throw std::invalid_argument(h);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("--H must be a number or 'oracle'");
  }
}

inline int solve(const std::string& kind, const Options& o, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const CorpusEntry inst = load_instance(o);
    const std::filesystem::path dir(o.out);
    if (kind == "dmdp") {
      if (!o.gamma) throw ValidationError("solve dmdp needs --gamma");
      const DmdpSolution sol = dmdp_optimal(inst.mdp, *o.gamma);
      out << "V = " << format_console(sol.value) << '\n';
      out << "policy = " << format_policy(sol.policy) << '\n';
      if (!o.out.empty()) {
        write_json({{"gamma", *o.gamma}, {"value", vector_to_json(sol.value)}},
                   dir / "dmdp_value.json");
        write_json(policy_to_json(sol.policy), dir / "policy.json");
      }
      return kOk;
    }
    if (kind == "amdp") {
      const AmdpOptimum opt = amdp_optimal(inst.mdp, parse_method(o.method));
      out << "rho = " << format_console(opt.gain) << '\n';
      out << "h = " << format_console(opt.bias) << '\n';
      out << "H = " << format_console(opt.H) << '\n';
      out << "policy = " << format_policy(opt.policy) << '\n';
      if (!opt.weakly_communicating) out << "warning: MDP is not weakly communicating\n";
      if (!o.out.empty()) {
        write_json({{"gain", vector_to_json(opt.gain)},
                    {"bias", vector_to_json(opt.bias)},
                    {"H", number_to_json(opt.H)},
                    {"weakly_communicating", opt.weakly_communicating}},
                   dir / "amdp_solution.json");
        write_json(policy_to_json(opt.policy), dir / "policy.json");
      }
      return kOk;
    }
    throw ValidationError("solve expects 'dmdp' or 'amdp'");
  });
}

inline int params(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const CorpusEntry inst = load_instance(o);
    const MdpParameters p = structural_parameters(inst.mdp);
    out << "D = " << format_console(p.diameter) << '\n';
    out << "t_mix = " << format_console(p.t_mix) << '\n';
    out << "H = " << format_console(p.H) << '\n';
    out << "H <= D: " << (p.h_le_diameter ? "pass" : "FAIL") << '\n';
    out << "H <= 8 t_mix: " << (p.h_le_8tmix ? "pass" : "FAIL") << '\n';
    if (!o.out.empty()) {
      write_json({{"instance_id", inst.id},
                  {"diameter", number_to_json(p.diameter)},
                  {"t_mix", number_to_json(p.t_mix)},
                  {"H", number_to_json(p.H)},
                  {"h_le_diameter", p.h_le_diameter},
                  {"h_le_8tmix", p.h_le_8tmix}},
                 std::filesystem::path(o.out) / "params.json");
    }
    return p.h_le_diameter && p.h_le_8tmix ? kOk : kCertificateFailed;
  });
}

inline int hardgen(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.out.empty()) throw ValidationError("hardgen needs --out FILE");
    const TabularMdp m = build_hard_instance(hard_spec(o));
    write_mdp(m, o.out);
    out << "wrote " << o.out << " (S=" << m.num_states() << ", A=" << m.num_actions() << ")\n";
    return kOk;
  });
}

inline int certify(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<CorpusEntry> instances;
    for (const auto& path : o.mdp_paths) {
      Options one = o;
      one.mdp_paths = {path};
      instances.push_back(load_instance(one));
    }
    if (o.count > 0) {
      for (auto& e : random_corpus({o.count, o.smax, o.amax, o.seed})) {
        instances.push_back(std::move(e));
      }
    }
    if (instances.empty()) throw ValidationError("certify needs --mdp files or --count > 0");

    std::vector<std::vector<Certificate>> per_instance(instances.size());
    parallel_for(instances.size(), worker_count(), [&](std::size_t i) {
      per_instance[i] = certify_instance(instances[i].mdp, o.epsilon.value_or(0.25), instances[i].id);
    });
    std::vector<Certificate> certs;
    for (auto& v : per_instance) {
      for (auto& c : v) certs.push_back(std::move(c));
    }
    std::size_t failed = 0;
    for (const auto& c : certs) {
      if (!c.passed) {
        ++failed;
        out << "FAIL " << c.instance_id << ' ' << c.name << ": " << format_console(c.lhs)
            << " > " << format_console(c.rhs) << '\n';
      }
    }
    out << certs.size() << " certificates, " << failed << " failed\n";
    if (!o.out.empty()) {
      const std::filesystem::path dir(o.out);
      write_text(certificates_csv(certs), dir / "certificates.csv");
      write_json(certificates_json(certs), dir / "certificates.json");
    }
    return failed == 0 ? kOk : kCertificateFailed;
  });
}

inline int reduce(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const CorpusEntry inst = load_instance(o);
    const AmdpOptimum opt = amdp_optimal_auto(inst.mdp);
    const std::optional<double> h = parse_h(o.H);
    const double H = h ? *h : oracle_h_bound(opt);
    std::optional<std::size_t> n;
    if (!o.N.empty()) n = o.N.front();
    const ReductionParams p = reduction_params(o.epsilon.value_or(0.25), o.delta, H, inst.mdp.num_states(),
                                               inst.mdp.num_actions(), n);
    const auto rec = empirical_error(inst.mdp, opt, p, {o.seed}).front();
    out << "instance = " << inst.id << '\n';
    out << "gamma = " << format_file(p.gamma) << ", eps_gamma = " << format_file(p.eps_gamma)
        << ", xi = " << format_file(p.xi) << ", N = " << p.n_per_pair << '\n';
    out << "policy = " << format_policy(rec.policy) << '\n';
    out << "gap = " << format_console(rec.gap) << (rec.success ? " (<= eps)" : " (> eps)")
        << '\n';
    out << "total_samples = " << rec.total_samples << '\n';
    if (!o.out.empty()) {
      write_json({{"instance_id", inst.id},
                  {"seed", o.seed},
                  {"N", p.n_per_pair},
                  {"gamma", number_to_json(p.gamma)},
                  {"gap", number_to_json(rec.gap)},
                  {"success", rec.success},
                  {"policy", rec.policy.actions}},
                 std::filesystem::path(o.out) / "reduce.json");
    }
    return kOk;
  });
}

inline int experiment(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const CorpusEntry inst = load_instance(o);
    ExperimentConfig cfg;
    cfg.instance_id = inst.id;
    cfg.truth = inst.mdp;
    cfg.epsilon = o.epsilon.value_or(0.25);
    cfg.delta = o.delta;
    cfg.H_bound = parse_h(o.H);
    cfg.n_list = o.N;
    cfg.seeds = consecutive_seeds(o.seed, o.trials);
    cfg.record_timing = o.timing;
    validate_config(cfg);
    if (o.out.empty()) throw ValidationError("experiment needs --out DIR");
    const AmdpOptimum opt = amdp_optimal_auto(inst.mdp);
    const auto rows = run_experiment(cfg, opt);
    write_text(experiment_csv(rows), std::filesystem::path(o.out) / "experiment.csv");
    const auto medians = median_gap_by_n(rows, cfg.n_list);
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
      out << "N = " << cfg.n_list[i] << ": median gap " << format_console(medians[i]) << '\n';
    }
    out << rows.size() << " rows written\n";
    return kOk;
  });
}

}  // namespace amdp::cli

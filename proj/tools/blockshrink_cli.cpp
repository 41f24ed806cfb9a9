// Command-line front end: table reproduction, moment tables, risk sweeps,
// limit-law checks, and cross-validated classification.

#include <CLI11.hpp>
#include <blockshrink/blockshrink.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace bs = blockshrink;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct CommonOpts {
  std::uint64_t seed = 1;
  std::int64_t reps = 100000;
  int threads = bs::default_threads();
  std::string format = "csv";
  std::string output;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--reps", o.reps, "Monte Carlo replicates")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--output,-o", o.output, "output file (default stdout)");
}

void emit(const CommonOpts& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(o.output);
    if (!out) throw bs::Error("cannot open output file: " + o.output);
    out << text;
  }
}

// CSV numbers are printed at 6 significant digits; JSON keeps full doubles.
std::string fmt6(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

std::string csv_header(const CommonOpts& o, const std::string& command) {
  std::ostringstream ss;
  ss << "# tool: blockshrink " << kVersion << "\n"
     << "# command: " << command << "\n"
     << "# seed: " << o.seed << "\n"
     << "# reps: " << o.reps << "\n";
  return ss.str();
}

json meta_json(const CommonOpts& o, const std::string& command) {
  return json{{"tool", "blockshrink"},
              {"version", kVersion},
              {"command", command},
              {"seed", o.seed},
              {"reps", o.reps}};
}

bs::EstimatorKind parse_estimator(const std::string& name) {
  if (name == "u") return bs::EstimatorKind::U;
  if (name == "sds") return bs::EstimatorKind::SDS;
  if (name == "kg") return bs::EstimatorKind::KG;
  if (name == "ma1") return bs::EstimatorKind::MA1;
  if (name == "ma2") return bs::EstimatorKind::MA2;
  throw CLI::ValidationError("unknown estimator: " + name);
}

struct TableBlock {
  std::vector<bs::CoefficientVector> coeffs;  // U, SDS, KG, MA1, MA2
  std::vector<double> risk1, risk2, rrr1, rrr2;
};

TableBlock coefficient_table(int p, int m, int n, const bs::RandomStream& stream,
                             std::int64_t reps, int threads) {
  const bs::MomentTable mt = bs::moment_table(p, m, n, stream, reps, threads);
  TableBlock t;
  t.coeffs = {bs::coeffs_u(p, n), bs::coeffs_sds(p, n), bs::coeffs_kg(p, n),
              bs::coeffs_ma1(p, m, n, mt), bs::coeffs_ma2(p, m, n, mt)};
  std::vector<bs::RiskReport> r1, r2;
  for (const auto& c : t.coeffs) {
    r1.push_back(bs::asymptotic_risk_identity_blocks(bs::LossKind::Stein, c, mt));
    r2.push_back(
        bs::asymptotic_risk_identity_blocks(bs::LossKind::Quadratic, c, mt));
  }
  for (std::size_t e = 0; e < t.coeffs.size(); ++e) {
    t.risk1.push_back(r1[e].value);
    t.risk2.push_back(r2[e].value);
    t.rrr1.push_back(bs::rrr(r1[e], r1[0]));
    t.rrr2.push_back(bs::rrr(r2[e], r2[0]));
  }
  return t;
}

std::string table_block_csv(int n, const TableBlock& t) {
  const char* names[5] = {"U", "SDS", "KG", "MA1", "MA2"};
  std::ostringstream ss;
  ss << "n,row";
  for (const char* nm : names) ss << "," << nm;
  ss << "\n";
  const int p = static_cast<int>(t.coeffs[0].c.size());
  for (int i = 0; i < p; ++i) {
    ss << n << ",c" << (i + 1);
    for (int e = 0; e < 5; ++e) ss << "," << fmt6(t.coeffs[e].c[i]);
    ss << "\n";
  }
  ss << n << ",AsyRisk1";
  for (int e = 0; e < 5; ++e) ss << "," << fmt6(t.risk1[e]);
  ss << "\n" << n << ",RRR1";
  for (int e = 0; e < 5; ++e) ss << "," << fmt6(t.rrr1[e]);
  ss << "\n" << n << ",AsyRisk2";
  for (int e = 0; e < 5; ++e) ss << "," << fmt6(t.risk2[e]);
  ss << "\n" << n << ",RRR2";
  for (int e = 0; e < 5; ++e) ss << "," << fmt6(t.rrr2[e]);
  ss << "\n";
  return ss.str();
}

json table_block_json(const TableBlock& t) {
  const char* names[5] = {"U", "SDS", "KG", "MA1", "MA2"};
  json block;
  for (int e = 0; e < 5; ++e) {
    json entry;
    entry["c"] = std::vector<double>(t.coeffs[e].c.begin(), t.coeffs[e].c.end());
    entry["asy_risk1"] = t.risk1[e];
    entry["asy_risk2"] = t.risk2[e];
    entry["rrr1"] = t.rrr1[e];
    entry["rrr2"] = t.rrr2[e];
    block[names[e]] = entry;
  }
  return block;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  if (out.empty()) throw CLI::ValidationError("empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  if (out.empty()) throw CLI::ValidationError("empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decision-theoretic covariance estimation under block-wise "
               "dispersed eigenvalue spectra"};
  app.require_subcommand(1);

  // ---- coeffs ----
  auto* coeffs_cmd = app.add_subcommand(
      "coeffs", "coefficient table with asymptotic risks for one (p, m, n)");
  int c_p = 3, c_m = 1, c_n = 10;
  std::string c_estimator = "all";
  CommonOpts c_opts;
  coeffs_cmd->add_option("--p", c_p, "dimension")->required()->check(CLI::Range(2, 12));
  coeffs_cmd->add_option("--m", c_m, "first block size")->required();
  coeffs_cmd->add_option("--n", c_n, "degrees of freedom")->required();
  coeffs_cmd->add_option("--estimator", c_estimator,
                         "u|sds|kg|ma1|ma2 or 'all' for the full block");
  add_common(coeffs_cmd, c_opts);

  // ---- moments ----
  auto* moments_cmd =
      app.add_subcommand("moments", "ordered-eigenvalue moment table (JSON)");
  int mo_p = 3, mo_m = 1, mo_n = 10;
  bool mo_exact_only = false, mo_mc_only = false;
  CommonOpts mo_opts;
  mo_opts.reps = 1000000;
  moments_cmd->add_option("--p", mo_p)->required()->check(CLI::Range(2, 12));
  moments_cmd->add_option("--m", mo_m)->required();
  moments_cmd->add_option("--n", mo_n)->required();
  moments_cmd->add_flag("--exact-only", mo_exact_only,
                        "fail if the closed-form path is unavailable");
  moments_cmd->add_flag("--mc-only", mo_mc_only, "force the Monte Carlo path");
  add_common(moments_cmd, mo_opts);

  // ---- risk-table ----
  auto* rt_cmd = app.add_subcommand(
      "risk-table", "coefficient + asymptotic-risk blocks over a list of n");
  int rt_p = 3, rt_m = 1;
  std::string rt_nlist = "4,6,8,10,20,50";
  CommonOpts rt_opts;
  rt_cmd->add_option("--p", rt_p)->required()->check(CLI::Range(2, 12));
  rt_cmd->add_option("--m", rt_m)->required();
  rt_cmd->add_option("--n-list", rt_nlist, "comma-separated dof values");
  add_common(rt_cmd, rt_opts);

  // ---- risk-sweep ----
  auto* rs_cmd = app.add_subcommand(
      "risk-sweep", "Monte Carlo risks across a beta grid (finite separation)");
  int rs_p = 3, rs_m = 1, rs_n = 10;
  std::string rs_betas = "1,0.8,0.6,0.4,0.2,1e-1,1e-2,1e-3,1e-4,1e-5,1e-6";
  CommonOpts rs_opts;
  rs_cmd->add_option("--p", rs_p)->required()->check(CLI::Range(2, 12));
  rs_cmd->add_option("--m", rs_m)->required();
  rs_cmd->add_option("--n", rs_n)->required();
  rs_cmd->add_option("--beta-list", rs_betas, "comma-separated scale ratios");
  add_common(rs_cmd, rs_opts);

  // ---- converge ----
  auto* cv_cmd = app.add_subcommand(
      "converge", "limit-law probabilities and risks across a beta grid");
  int cv_p = 3, cv_m = 1, cv_n = 10;
  std::string cv_betas = "1,0.8,0.6,0.4,0.2,1e-1,1e-2,1e-3,1e-4,1e-5,1e-6";
  bool cv_random_gamma = false;
  CommonOpts cv_opts;
  cv_opts.reps = 1000000;
  cv_cmd->add_option("--p", cv_p)->required()->check(CLI::Range(2, 12));
  cv_cmd->add_option("--m", cv_m)->required();
  cv_cmd->add_option("--n", cv_n)->required();
  cv_cmd->add_option("--beta-list", cv_betas, "comma-separated scale ratios");
  cv_cmd->add_flag("--random-gamma", cv_random_gamma,
                   "use a random orthogonal frame instead of the identity");
  add_common(cv_cmd, cv_opts);

  // ---- multiblock ----
  auto* mb_cmd = app.add_subcommand(
      "multiblock", "multi-block (k >= 3) limit checks (JSON)");
  std::string mb_cuts = "1,3,4";
  std::string mb_ratios = "1e-6,1e-6";
  int mb_n = 11;
  CommonOpts mb_opts;
  mb_cmd->add_option("--cuts", mb_cuts,
                     "interior cut points, e.g. 1,3,4 for blocks (1,2,1)");
  mb_cmd->add_option("--ratios", mb_ratios,
                     "scale ratios alpha_{s+1}/alpha_s per boundary");
  mb_cmd->add_option("--n", mb_n)->required();
  add_common(mb_cmd, mb_opts);

  // ---- classify ----
  auto* cl_cmd = app.add_subcommand(
      "classify", "cross-validated Mahalanobis classification");
  std::string cl_data, cl_scheme = "loo", cl_estimator = "ma1", cl_dof = "n-1";
  std::string cl_label = "species";
  int cl_m = 1;
  CommonOpts cl_opts;
  cl_cmd->add_option("--data", cl_data, "CSV file")->required();
  cl_cmd->add_option("--scheme", cl_scheme, "loo | kset:10 | kset:5");
  cl_cmd->add_option("--estimator", cl_estimator, "u|sds|kg|ma1|ma2");
  cl_cmd->add_option("--m", cl_m, "first block size for MA estimators");
  cl_cmd->add_option("--label", cl_label, "label column name");
  cl_cmd->add_option("--dof", cl_dof, "coefficient dof convention: n-1 | n")
      ->check(CLI::IsMember({"n-1", "n"}));
  add_common(cl_cmd, cl_opts);

  std::string command_line;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) command_line += ' ';
    command_line += argv[i];
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (coeffs_cmd->parsed()) {
      if (!(1 <= c_m && c_m < c_p))
        throw CLI::ValidationError("require 1 <= m < p");
      if (c_n < c_p) throw CLI::ValidationError("require n >= p");
      const bs::RandomStream stream{c_opts.seed, 0};
      const TableBlock t =
          coefficient_table(c_p, c_m, c_n, stream, c_opts.reps, c_opts.threads);
      if (c_estimator != "all") {
        const bs::EstimatorKind kind = parse_estimator(c_estimator);
        int e = 0;
        for (; e < 5; ++e)
          if (t.coeffs[e].kind == kind) break;
        json out;
        out["metadata"] = meta_json(c_opts, command_line);
        out["estimator"] = bs::estimator_name(kind);
        out["c"] = std::vector<double>(t.coeffs[e].c.begin(), t.coeffs[e].c.end());
        out["asy_risk1"] = t.risk1[e];
        out["asy_risk2"] = t.risk2[e];
        emit(c_opts, out.dump(2) + "\n");
      } else if (c_opts.format == "json") {
        json out;
        out["metadata"] = meta_json(c_opts, command_line);
        out["p"] = c_p;
        out["m"] = c_m;
        out["n"] = c_n;
        out["table"] = table_block_json(t);
        emit(c_opts, out.dump(2) + "\n");
      } else {
        emit(c_opts, csv_header(c_opts, command_line) + table_block_csv(c_n, t));
      }
    } else if (moments_cmd->parsed()) {
      if (!(1 <= mo_m && mo_m < mo_p))
        throw CLI::ValidationError("require 1 <= m < p");
      if (mo_n < mo_p) throw CLI::ValidationError("require n >= p");
      if (mo_exact_only && mo_mc_only)
        throw CLI::ValidationError("--exact-only conflicts with --mc-only");
      const bs::RandomStream stream{mo_opts.seed, 0};
      const bs::MomentTable t =
          bs::moment_table(mo_p, mo_m, mo_n, stream, mo_opts.reps,
                           mo_opts.threads, mo_exact_only, mo_mc_only);
      json out;
      out["metadata"] = meta_json(mo_opts, command_line);
      out["p"] = t.p;
      out["m"] = t.m;
      out["n"] = t.n;
      out["e1"] = std::vector<double>(t.e1.begin(), t.e1.end());
      out["e2"] = std::vector<double>(t.e2.begin(), t.e2.end());
      out["stderr1"] = std::vector<double>(t.stderr1.begin(), t.stderr1.end());
      out["stderr2"] = std::vector<double>(t.stderr2.begin(), t.stderr2.end());
      std::vector<std::string> methods;
      for (auto m : t.method)
        methods.push_back(m == bs::MomentMethod::Exact ? "exact" : "mc");
      out["method"] = methods;
      emit(mo_opts, out.dump(2) + "\n");
    } else if (rt_cmd->parsed()) {
      if (!(1 <= rt_m && rt_m < rt_p))
        throw CLI::ValidationError("require 1 <= m < p");
      const std::vector<int> ns = parse_int_list(rt_nlist);
      const bs::RandomStream stream{rt_opts.seed, 0};
      if (rt_opts.format == "json") {
        json blocks = json::array();
        for (int n : ns) {
          if (n < rt_p) throw CLI::ValidationError("require n >= p");
          const TableBlock t = coefficient_table(rt_p, rt_m, n, stream,
                                                 rt_opts.reps, rt_opts.threads);
          json b = table_block_json(t);
          b["n"] = n;
          blocks.push_back(b);
        }
        json out;
        out["metadata"] = meta_json(rt_opts, command_line);
        out["p"] = rt_p;
        out["m"] = rt_m;
        out["blocks"] = blocks;
        emit(rt_opts, out.dump(2) + "\n");
      } else {
        std::string text = csv_header(rt_opts, command_line);
        for (int n : ns) {
          if (n < rt_p) throw CLI::ValidationError("require n >= p");
          const TableBlock t = coefficient_table(rt_p, rt_m, n, stream,
                                                 rt_opts.reps, rt_opts.threads);
          text += table_block_csv(n, t);
        }
        emit(rt_opts, text);
      }
    } else if (rs_cmd->parsed() || cv_cmd->parsed()) {
      const bool full = cv_cmd->parsed();
      const int p = full ? cv_p : rs_p, m = full ? cv_m : rs_m,
                n = full ? cv_n : rs_n;
      const CommonOpts& o = full ? cv_opts : rs_opts;
      const std::vector<double> betas =
          parse_double_list(full ? cv_betas : rs_betas);
      if (!(1 <= m && m < p)) throw CLI::ValidationError("require 1 <= m < p");
      if (n < p) throw CLI::ValidationError("require n >= p");
      const bs::RandomStream stream{o.seed, 0};
      const bs::ConvergenceReport rep = bs::convergence_sweep(
          p, m, n, betas, o.reps, stream, o.threads,
          full && cv_random_gamma);
      const auto names = bs::prob_stat_names();
      if (o.format == "json") {
        json rows = json::array();
        for (const auto& row : rep.rows) {
          json jr;
          jr["beta"] = row.beta;
          if (full) {
            for (int i = 0; i < 10; ++i) jr[names[i]] = row.probs[i];
            jr["g21_exceed"] = row.g21_exceed;
          }
          for (std::size_t e = 0; e < rep.estimators.size(); ++e) {
            const std::string nm = bs::estimator_name(rep.estimators[e]);
            jr["Risk1_" + nm] = row.risks[e][0];
            jr["Risk2_" + nm] = row.risks[e][1];
            jr["Risk1_" + nm + "_stderr"] = row.risk_stderr[e][0];
            jr["Risk2_" + nm + "_stderr"] = row.risk_stderr[e][1];
          }
          rows.push_back(jr);
        }
        json out;
        out["metadata"] = meta_json(o, command_line);
        out["p"] = p;
        out["m"] = m;
        out["n"] = n;
        out["rows"] = rows;
        emit(o, out.dump(2) + "\n");
      } else {
        // Table-shaped CSV: one row per statistic, one column per beta.
        std::ostringstream ss;
        ss << csv_header(o, command_line) << "statistic";
        for (const auto& row : rep.rows) ss << "," << fmt6(row.beta);
        ss << "\n";
        if (full) {
          for (int i = 0; i < 10; ++i) {
            std::string nm = names[i];
            for (auto& ch : nm)
              if (ch == ' ') ch = '_';
            ss << nm;
            for (const auto& row : rep.rows) ss << "," << fmt6(row.probs[i]);
            ss << "\n";
          }
        }
        for (std::size_t e = 0; e < rep.estimators.size(); ++e) {
          const std::string nm = bs::estimator_name(rep.estimators[e]);
          for (int d = 0; d < 2; ++d) {
            ss << "Risk" << (d + 1) << "_" << nm;
            for (const auto& row : rep.rows) ss << "," << fmt6(row.risks[e][d]);
            ss << "\n";
          }
        }
        emit(o, ss.str());
      }
    } else if (mb_cmd->parsed()) {
      const std::vector<int> interior = parse_int_list(mb_cuts);
      std::vector<int> cuts{0};
      for (int c : interior) cuts.push_back(c);
      const bs::BlockPartition part(cuts);
      const std::vector<double> ratios = parse_double_list(mb_ratios);
      if (static_cast<int>(ratios.size()) != part.blocks() - 1)
        throw CLI::ValidationError("need one ratio per block boundary");
      Eigen::VectorXd scales(part.blocks());
      scales[0] = 1.0;
      for (int s = 1; s < part.blocks(); ++s)
        scales[s] = scales[s - 1] * ratios[s - 1];
      const bs::EigenSpec spec(part, Eigen::VectorXd::Ones(part.dim()), scales);
      const bs::RandomStream stream{mb_opts.seed, 0};
      const bs::MultiblockReport rep = bs::multiblock_limit_check(
          spec, mb_n, mb_opts.reps, stream, mb_opts.threads);
      json out;
      out["metadata"] = meta_json(mb_opts, command_line);
      out["reps"] = rep.reps;
      out["w_mean_dev_sigmas"] = rep.w_mean_dev_sigmas;
      out["z_mean_dev_sigmas"] = rep.z_mean_dev_sigmas;
      out["z_var_dev_sigmas"] = rep.z_var_dev_sigmas;
      out["cross_corr_sigmas"] = rep.cross_corr_sigmas;
      json wm = json::array();
      for (const auto& w : rep.w_mean) {
        json rowsj = json::array();
        for (int i = 0; i < w.rows(); ++i) {
          std::vector<double> r(w.cols());
          for (int j = 0; j < w.cols(); ++j) r[j] = w(i, j);
          rowsj.push_back(r);
        }
        wm.push_back(rowsj);
      }
      out["w_mean"] = wm;
      emit(mb_opts, out.dump(2) + "\n");
    } else if (cl_cmd->parsed()) {
      const bs::LabeledDataset ds = bs::load_csv(
          cl_data, cl_label,
          {"sepal_length", "sepal_width", "petal_length", "petal_width"});
      bs::CvScheme scheme = bs::CvScheme::LeaveOneOut;
      int k = 0;
      if (cl_scheme == "loo") {
        scheme = bs::CvScheme::LeaveOneOut;
      } else if (cl_scheme.rfind("kset:", 0) == 0) {
        scheme = bs::CvScheme::KSampleSet;
        k = std::stoi(cl_scheme.substr(5));
      } else {
        throw CLI::ValidationError("scheme must be loo or kset:<k>");
      }
      const bs::EstimatorKind kind = parse_estimator(cl_estimator);
      const bs::DofConvention dof = cl_dof == "n" ? bs::DofConvention::N
                                                  : bs::DofConvention::NMinus1;
      const bs::CvReport rep = bs::cross_validate(ds, scheme, k, kind, cl_m, dof);
      if (cl_opts.format == "json") {
        json out;
        out["metadata"] = meta_json(cl_opts, command_line);
        out["scheme"] = cl_scheme;
        out["estimator"] = bs::estimator_name(kind);
        out["fold_ccp"] = rep.fold_ccp;
        out["average_ccp"] = rep.average;
        out["trials"] = rep.trials;
        out["correct"] = rep.correct;
        json mis = json::array();
        for (const auto& [g, j] : rep.misclassified)
          mis.push_back(json{{"group", ds.groups[g].label}, {"index", j + 1}});
        out["misclassified"] = mis;
        emit(cl_opts, out.dump(2) + "\n");
      } else {
        std::ostringstream ss;
        ss << csv_header(cl_opts, command_line) << "fold,ccp\n";
        for (std::size_t f = 0; f < rep.fold_ccp.size(); ++f)
          ss << (f + 1) << "," << fmt6(rep.fold_ccp[f]) << "\n";
        ss << "average," << fmt6(rep.average) << "\n";
        emit(cl_opts, ss.str());
      }
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

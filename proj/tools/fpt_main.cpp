// fpt: command-line front end. Results go to stdout, diagnostics to stderr.
// Exit codes: 0 success (or "equivalent"/"true"), 1 negative verdict, 2 error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fpt/afdsl.hpp"
#include "fpt/metric.hpp"
#include "fpt/process_file.hpp"
#include "fpt/stopping.hpp"
#include "fpt/timegrid.hpp"

namespace {

using namespace fpt;

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kFailure = 2;

FilteredRandomVariable load_frv(const std::string& path) { return load_process_file(path).frv(); }

StepFilteredProcess load_step(const std::string& path) {
  auto f = load_process_file(path);
  if (!f.step) throw Error(Errc::kInvalidFile, "'" + path + "' is not a step-process file");
  return *f.step;
}

std::string render(NestedValue v, bool canonical) {
  return canonical ? to_hex(encode(v)) : describe(v);
}

int cmd_pp(const std::string& file, int rank, const std::string& mode) {
  const auto x = load_frv(file);
  const bool canonical = mode == "canonical";
  const auto z = pp(x, rank);
  std::cout << "rank " << rank << "\n";
  for (std::size_t a = 0; a < x.space().size(); ++a) {
    std::cout << "atom " << x.space().id(a) << " " << render(z.value(a), canonical) << "\n";
  }
  const NestedLaw law{rank, pushforward(x.space(), std::span<const NestedValue>(z.values()))};
  if (canonical) {
    std::cout << "law " << to_hex(encode(law)) << "\n";
  } else {
    for (const auto& [v, p] : law.dist) std::cout << "law " << to_string(p) << " " << describe(v) << "\n";
  }
  return kOk;
}

int saturated_rank(const FilteredRandomVariable& x) {
  return x.timesteps() > 0 ? static_cast<int>(x.timesteps()) - 1 : 0;
}

int cmd_equiv(const std::string& a, const std::string& b, std::optional<int> rank) {
  const auto x = load_frv(a);
  const auto y = load_frv(b);
  const int n = rank ? *rank : saturated_rank(x);
  const bool eq = equiv_rank(x, y, n);
  std::cout << (eq ? "equivalent" : "distinct") << "\n";
  return eq ? kOk : kNegative;
}

int cmd_dist(const std::string& a, const std::string& b, int rank, const std::string& ground,
             bool plan) {
  const auto x = load_frv(a);
  const auto y = load_frv(b);
  const auto g = ground == "l1" ? GroundMetric::kPayloadL1 : GroundMetric::kDiscrete;
  const auto r = nested_distance_detail(x, y, rank, g);
  std::cout << to_string(r.distance) << "\n";
  if (plan) {
    std::size_t i = 0;
    for (const auto& [v, p] : r.left.dist) {
      std::cout << "left " << i++ << " " << to_string(p) << " " << describe(v) << "\n";
    }
    std::size_t j = 0;
    for (const auto& [v, p] : r.right.dist) {
      std::cout << "right " << j++ << " " << to_string(p) << " " << describe(v) << "\n";
    }
    const auto& m = r.coupling.plan.mass;
    for (std::size_t s = 0; s < m.size(); ++s) {
      for (std::size_t t = 0; t < m[s].size(); ++t) {
        if (sgn(m[s][t]) > 0) std::cout << "plan " << s << " " << t << " " << to_string(m[s][t]) << "\n";
      }
    }
  }
  return kOk;
}

const char* yes(bool b) { return b ? "true" : "false"; }

int report_law(const NestedLaw& law) {
  const auto report = check_consistently_terminating(law);
  std::cout << "rank " << law.rank << "\n";
  std::cout << "consistently_terminating " << yes(report.ok) << "\n";
  if (!report.ok) std::cerr << "fpt: " << report.diagnostic << "\n";
  return report.ok ? kOk : kNegative;
}

int cmd_check(const std::string& file) {
  const auto f = load_process_file(file);
  switch (f.kind) {
    case FileKind::kLaw:
      std::cout << "kind law\n";
      return report_law(*f.law);
    case FileKind::kStepProcess:
      // Loading already validated refinement and adaptedness.
      std::cout << "kind step\n";
      std::cout << "events " << f.step->events().size() << "\n";
      std::cout << "adapted true\n";
      return kOk;
    case FileKind::kProcess:
    case FileKind::kVariable:
      break;
  }
  const auto x = f.frv();
  std::cout << "kind " << (f.kind == FileKind::kProcess ? "process" : "variable") << "\n";
  bool ok = true;
  const bool path_valued = x.value(0).labels().size() == x.timesteps() && x.timesteps() > 1;
  if (f.kind == FileKind::kProcess || path_valued) {
    const bool adapted = is_adapted(x);
    ok = ok && adapted;
    std::cout << "adapted " << yes(adapted) << "\n";
  } else {
    std::cout << "adapted n/a\n";
  }
  std::cout << "saturation_rank " << saturation_rank(x) << "\n";
  return report_law(adapted_distribution(x, saturated_rank(x))) == kOk && ok ? kOk : kNegative;
}

int cmd_canon(const std::string& file) {
  const auto f = load_process_file(file);
  if (!f.law) throw Error(Errc::kInvalidFile, "'" + file + "' is not a law file");
  std::cout << emit(canonical_representative(*f.law, f.states));
  return kOk;
}

RewardSpec read_reward(const std::string& path, const std::string& inline_terms) {
  if (!inline_terms.empty()) {
    std::vector<Term> terms;
    std::size_t start = 0;
    while (true) {
      const std::size_t semi = inline_terms.find(';', start);
      terms.push_back(parse_term(inline_terms.substr(start, semi - start)));
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
    return RewardSpec::from_terms(std::move(terms));
  }
  std::ifstream in(path);
  if (!in) throw Error(Errc::kInvalidFile, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kInvalidFile, std::string("malformed reward file: ") + e.what());
  }
  try {
    if (j.contains("terms")) {
      std::vector<Term> terms;
      for (const auto& t : j.at("terms")) terms.push_back(parse_term(t.get<std::string>()));
      return RewardSpec::from_terms(std::move(terms));
    }
    std::vector<std::map<std::string, Rational>> table;
    for (const auto& row : j.at("table")) {
      auto& out = table.emplace_back();
      for (const auto& [label, value] : row.items()) {
        out[label] = parse_rational(value.is_string() ? value.get<std::string>() : value.dump());
      }
    }
    return RewardSpec::from_table(std::move(table));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kInvalidFile, std::string("reward file needs \"table\" or \"terms\": ") +
                                        e.what());
  }
}

int cmd_snell(const std::string& file, const std::string& reward, const std::string& terms) {
  if (reward.empty() == terms.empty()) {
    throw Error(Errc::kInvalidArgument, "give exactly one of --reward and --reward-terms");
  }
  const auto f = load_process_file(file);
  const RewardSpec g = read_reward(reward, terms);
  const SnellResult r = f.process ? snell(*f.process, g) : snell(f.frv(), g);
  const auto x = f.frv();
  const auto& space = x.space();
  std::cout << "value " << to_string(r.value) << "\n";
  for (std::size_t t = 1; t <= r.stop.size(); ++t) {
    for (std::size_t a = 0; a < space.size(); ++a) {
      std::cout << "rule " << t << " " << space.id(a) << " "
                << (r.stop[t - 1][a] ? "stop" : "continue") << " "
                << to_string(r.envelope[t - 1][a]) << "\n";
    }
  }
  return kOk;
}

int cmd_af(const std::vector<std::string>& files, const std::string& term,
           std::optional<int> family) {
  if (term.empty() == !family.has_value()) {
    throw Error(Errc::kInvalidArgument, "give exactly one of --term and --eval-family");
  }
  std::vector<FilteredRandomVariable> xs;
  for (const auto& f : files) xs.push_back(load_frv(f));
  if (!term.empty()) {
    const Term t = parse_term(term);
    for (const auto& x : xs) {
      Evaluator ev(x);
      std::cout << "expectation " << to_string(ev.expectation(t)) << "\n";
      const auto& vals = ev.eval(t);
      for (std::size_t a = 0; a < x.space().size(); ++a) {
        std::cout << "atom " << x.space().id(a) << " " << to_string(vals[a]) << "\n";
      }
    }
    return kOk;
  }
  const auto terms = separating_family(xs, *family);
  std::vector<Evaluator> evs;
  for (const auto& x : xs) evs.emplace_back(x);
  for (const auto& t : terms) {
    for (auto& ev : evs) std::cout << to_string(ev.expectation(t)) << "\t";
    std::cout << print(t) << "\n";
  }
  return kOk;
}

int cmd_discretize(const std::string& file, const std::string& grid) {
  const auto x = load_step(file);
  const TimeGrid t = TimeGrid::parse(grid);
  std::cout << (x.has_paths() ? emit(discretize_process(x, t)) : emit(discretize(x, t)));
  return kOk;
}

int cmd_cont(const std::string& file) {
  for (const auto& t : continuity_points(load_step(file))) std::cout << to_string(t) << "\n";
  return kOk;
}

int cmd_ftn(const std::string& file, const std::string& grid, int rank) {
  const bool ok = verify_ftn(load_step(file), TimeGrid::parse(grid), rank);
  std::cout << yes(ok) << "\n";
  return ok ? kOk : kNegative;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kInvalidFile, "cannot write '" + path + "'");
  out << text;
}

int cmd_separate(const SearchSpace& space, const std::string& out_x, const std::string& out_y) {
  const auto w = find_rank_separation(space);
  if (!out_x.empty()) write_file(out_x, emit(w.x));
  if (!out_y.empty()) write_file(out_y, emit(w.y));
  std::cout << "value_x " << to_string(w.value_x) << "\n";
  std::cout << "value_y " << to_string(w.value_y) << "\n";
  const auto table = w.reward.tabulate(w.x.states_ptr());
  for (std::size_t t = 0; t < table.size(); ++t) {
    for (const auto& [label, g] : table[t]) {
      std::cout << "reward " << t + 1 << " " << label << " " << to_string(g) << "\n";
    }
  }
  return kOk;
}

void apply_support_cap() {
  std::size_t cap = 100000;
  if (const char* env = std::getenv("FPT_MAX_SUPPORT")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) {
      throw Error(Errc::kInvalidArgument, std::string("FPT_MAX_SUPPORT must be a positive integer, got '") +
                                              env + "'");
    }
    cap = static_cast<std::size_t>(v);
  }
  set_node_limit(cap);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Filtered processes: prediction processes, adapted equivalence and distances"};
  app.require_subcommand(1);
  std::function<int()> run;

  std::string file_a;
  std::string file_b;
  std::vector<std::string> files;
  int rank = 0;
  std::optional<int> opt_rank;
  std::string mode = "pretty";
  std::string ground = "discrete";
  std::string grid;
  std::string reward;
  std::string reward_terms;
  std::string term;
  std::optional<int> family;
  bool saturated = false;
  bool plan = false;
  std::string out_x;
  std::string out_y;
  SearchSpace space;

  auto* pp_cmd = app.add_subcommand("pp", "iterated prediction process and adapted distribution");
  pp_cmd->add_option("file", file_a)->required();
  pp_cmd->add_option("--rank", rank, "n")->capture_default_str()->check(CLI::NonNegativeNumber);
  pp_cmd->add_option("--emit", mode)->check(CLI::IsMember({"pretty", "canonical"}))->capture_default_str();
  pp_cmd->callback([&] { run = [&] { return cmd_pp(file_a, rank, mode); }; });

  auto* eq_cmd = app.add_subcommand("equiv", "rank-n adapted equivalence (exit 0 equal, 1 distinct)");
  eq_cmd->add_option("a", file_a)->required();
  eq_cmd->add_option("b", file_b)->required();
  auto* eq_rank = eq_cmd->add_option("--rank", opt_rank)->check(CLI::NonNegativeNumber);
  eq_cmd->add_flag("--saturated", saturated, "compare at rank N-1")->excludes(eq_rank);
  eq_cmd->callback([&] {
    // Without --rank the comparison is at the saturation rank.
    run = [&] { return cmd_equiv(file_a, file_b, saturated ? std::nullopt : opt_rank); };
  });

  auto* dist_cmd = app.add_subcommand("dist", "nested distance between adapted distributions");
  dist_cmd->add_option("a", file_a)->required();
  dist_cmd->add_option("b", file_b)->required();
  dist_cmd->add_option("--rank", rank)->capture_default_str()->check(CLI::NonNegativeNumber);
  dist_cmd->add_option("--ground", ground)->check(CLI::IsMember({"discrete", "l1"}))->capture_default_str();
  dist_cmd->add_flag("--plan", plan, "also print the optimal coupling");
  dist_cmd->callback([&] { run = [&] { return cmd_dist(file_a, file_b, rank, ground, plan); }; });

  auto* check_cmd = app.add_subcommand("check", "validate a process or law file");
  check_cmd->add_option("file", file_a)->required();
  check_cmd->callback([&] { run = [&] { return cmd_check(file_a); }; });

  auto* canon_cmd = app.add_subcommand("canon", "canonical representative of a law file");
  canon_cmd->add_option("file", file_a)->required();
  canon_cmd->callback([&] { run = [&] { return cmd_canon(file_a); }; });

  auto* snell_cmd = app.add_subcommand("snell", "optimal stopping value and rule");
  snell_cmd->add_option("file", file_a)->required();
  snell_cmd->add_option("--reward", reward, "JSON file with \"table\" or \"terms\"");
  snell_cmd->add_option("--reward-terms", reward_terms, "rank-0 terms separated by ';'");
  snell_cmd->callback([&] { run = [&] { return cmd_snell(file_a, reward, reward_terms); }; });

  auto* af_cmd = app.add_subcommand("af", "expectations of adapted functions");
  af_cmd->add_option("files", files)->required();
  af_cmd->add_option("--term", term);
  af_cmd->add_option("--eval-family", family, "rank of the separating family")->check(CLI::NonNegativeNumber);
  af_cmd->callback([&] { run = [&] { return cmd_af(files, term, family); }; });

  auto* disc_cmd = app.add_subcommand("discretize", "restrict a step process to a time grid");
  disc_cmd->add_option("file", file_a)->required();
  disc_cmd->add_option("--grid", grid, "t1,...,1")->required();
  disc_cmd->callback([&] { run = [&] { return cmd_discretize(file_a, grid); }; });

  auto* cont_cmd = app.add_subcommand("cont", "event times excluded from the continuity points");
  cont_cmd->add_option("file", file_a)->required();
  cont_cmd->callback([&] { run = [&] { return cmd_cont(file_a); }; });

  auto* ftn_cmd = app.add_subcommand("ftn", "check that the grid projection commutes with pp^n");
  ftn_cmd->add_option("file", file_a)->required();
  ftn_cmd->add_option("--grid", grid)->required();
  ftn_cmd->add_option("--rank", rank)->capture_default_str()->check(CLI::NonNegativeNumber);
  ftn_cmd->callback([&] { run = [&] { return cmd_ftn(file_a, grid, rank); }; });

  auto* sep_cmd = app.add_subcommand("separate", "search for rank-1 equivalent processes with different stopping values");
  sep_cmd->add_option("--max-atoms", space.max_atoms)->capture_default_str();
  sep_cmd->add_option("--max-steps", space.max_steps)->capture_default_str();
  sep_cmd->add_option("--max-denominator", space.max_denominator)->capture_default_str();
  sep_cmd->add_option("--seed", space.seed)->capture_default_str();
  sep_cmd->add_option("--out-x", out_x);
  sep_cmd->add_option("--out-y", out_y);
  sep_cmd->callback([&] { run = [&] { return cmd_separate(space, out_x, out_y); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kFailure;
  }
  try {
    apply_support_cap();
    return run();
  } catch (const Error& e) {
    std::cerr << "fpt: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "fpt: " << e.what() << "\n";
    return kFailure;
  }
}

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "toposforge/runner.hpp"

int main(int argc, char** argv) {
  tf::RunConfig cfg;
  CLI::App app{"Finite presheaf and sheaf universes: constructions and property checks"};
  app.add_option("command", cfg.command, "Command to run")->required()->check(CLI::IsMember(tf::commands()));
  app.add_option("--cat", cfg.cat, "Category description (JSON)");
  app.add_option("--site", cfg.site, "Category with covers (JSON)");
  app.add_option("--presheaf", cfg.presheaf, "Presheaf description (JSON)");
  app.add_option("--family", cfg.family, "Family description (JSON)");
  app.add_option("--problem", cfg.problem, "Realignment problem description (JSON)");
  app.add_option("--bound,--bounds", cfg.bounds, "Universe bound N, or N,M for two levels")->delimiter(',');
  app.add_option("--stages", cfg.stages, "Small object argument stages");
  app.add_option("--samples", cfg.samples, "Sampled instances per check");
  app.add_option("--size", cfg.size, "Carrier bound for generated inputs");
  std::size_t cap = 0;
  auto* cap_opt = app.add_option("--cap", cap, "Global size cap")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Sampling seed");
  app.add_flag("--exhaustive", cfg.exhaustive, "Scan exhaustively where the cap allows");
  app.add_option("--out", cfg.out, "Write the JSON report here");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(tf::ExitStatus::BadInput);
  }
  if (cap_opt->count() > 0) cfg.cap = cap;

  tf::RunResult res = tf::run(cfg);
  std::cout << res.summary;
  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out);
    if (!out) {
      std::cerr << cfg.out << ": cannot write\n";
      return static_cast<int>(tf::ExitStatus::BadInput);
    }
    out << res.report.dump(2) << '\n';
  }
  return static_cast<int>(res.status);
}

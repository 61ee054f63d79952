/**
 * eltl command line: batch planning, automaton export and the HTTP service.
 *
 *   eltl plan  --roadmap r.json (--spec s.json | --formula TEXT) [--sketches k.json]
 *              [--reps N] [--mode paper|exact] --out plan.json [--stats stats.json]
 *              [--legality table.json]
 *   eltl dot   --formula TEXT [--roadmap r.json]
 *   eltl serve [--host H] [--port P] [--snapshot-dir DIR] [--legality table.json]
 *   eltl legality          (prints the default operator legality table)
 *
 * Exit status: 0 success, 1 I/O or parse error, 2 unsatisfiable specification.
 */
#include "eltl/automata.hpp"
#include "eltl/http.hpp"
#include "eltl/pipeline.hpp"
#include "eltl/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace
{
  std::string read_file(const std::string &path)
  {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw eltl::Error(eltl::ErrorCode::parse, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write_file(const std::string &path, const std::string &content)
  {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content))
      throw eltl::Error(eltl::ErrorCode::parse, "cannot write " + path);
  }

  struct PlanArgs
  {
    std::string roadmap, spec, formula, sketches, mode = "paper", out, stats, legality;
    int reps = 1;
  };

  int run_plan(const PlanArgs &a)
  {
    using namespace eltl;
    const Roadmap roadmap = load_roadmap(read_file(a.roadmap));
    SpecSource spec;
    if (!a.spec.empty())
      spec = load_spec_graph(read_file(a.spec));
    else if (!a.formula.empty())
      spec = parse_formula(a.formula);

    PipelineConfig cfg;
    cfg.match.mode = parse_match_mode(a.mode);
    if (!a.legality.empty())
      cfg.legality = LegalityTable::from_json(detail::parse_document(read_file(a.legality)));
    SketchFile sketches;
    if (!a.sketches.empty())
    {
      sketches = load_sketches(read_file(a.sketches));
      if (sketches.params)
        cfg.sampling = *sketches.params;
    }

    const TransitionSystem ts = to_transition_system(roadmap);
    std::vector<MatchedSketch> matched;
    double bmp_ms_total = 0.0, plan_ms_total = 0.0;
    Plan plan;
    for (int rep = 0; rep < a.reps; ++rep)
    {
      matched.clear();
      for (const auto &stroke : sketches.strokes)
      {
        matched.push_back(match_sketch(stroke, roadmap, ts, cfg.sampling, cfg.match));
        bmp_ms_total += matched.back().bmp_ms;
      }
      plan = plan_with_sketches(roadmap, spec, matched, cfg);
      plan_ms_total += plan.stats.plan_ms;
    }
    plan.stats.bmp_ms = bmp_ms_total / a.reps;
    plan.stats.plan_ms = plan_ms_total / a.reps;
    write_file(a.out, plan_to_json(plan).dump(2) + "\n");

    double n_mean = 0.0;
    for (const auto &m : matched)
      n_mean += static_cast<double>(m.match.sampled.points.size());
    if (!matched.empty())
      n_mean /= static_cast<double>(matched.size());
    nlohmann::json stats = {{"bmp_ms_mean", matched.empty() ? 0.0 : bmp_ms_total / a.reps / matched.size()},
                            {"plan_ms_mean", plan_ms_total / a.reps},
                            {"N", n_mean},
                            {"M", ts.size()},
                            {"reps", a.reps}};
    if (!a.stats.empty())
      write_file(a.stats, stats.dump(2) + "\n");
    else
      std::cout << stats.dump(2) << "\n";
    return 0;
  }

  int run_dot(const std::string &formula, const std::string &roadmap)
  {
    using namespace eltl;
    const BuchiAutomaton ba = ltl_to_buchi(parse_formula(formula));
    if (roadmap.empty())
      std::cout << to_dot(ba);
    else
    {
      const TransitionSystem ts = to_transition_system(load_roadmap(read_file(roadmap)));
      std::cout << to_dot(build_product(ts, ba), ts);
    }
    return 0;
  }

  int run_serve(const std::string &host, int port, const std::string &snapshot_dir, const std::string &legality)
  {
    eltl::ServiceOptions opts;
    if (!legality.empty())
      opts.pipeline.legality = eltl::LegalityTable::from_json(eltl::detail::parse_document(read_file(legality)));
    if (!snapshot_dir.empty())
      opts.snapshot_dir = snapshot_dir;
    eltl::Service service(opts);
    httplib::Server server;
    eltl::bind_routes(server, service);
    std::cerr << "listening on " << host << ":" << port << "\n";
    return server.listen(host, port) ? 0 : 1;
  }
}

int main(int argc, char **argv)
{
  CLI::App app{"Sketch-guided LTL mission planner"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto *plan_cmd = app.add_subcommand("plan", "Plan a mission in batch");
  plan_cmd->add_option("--roadmap", plan.roadmap, "Roadmap file")->required();
  auto *spec_opt = plan_cmd->add_option("--spec", plan.spec, "Spec graph file");
  auto *formula_opt = plan_cmd->add_option("--formula", plan.formula, "LTL formula text");
  spec_opt->excludes(formula_opt);
  plan_cmd->add_option("--sketches", plan.sketches, "Sketch fixture file");
  plan_cmd->add_option("--reps", plan.reps, "Repetitions for timing")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--mode", plan.mode, "BMP solver")->check(CLI::IsMember({"paper", "exact"}));
  plan_cmd->add_option("--out", plan.out, "Plan document output")->required();
  plan_cmd->add_option("--stats", plan.stats, "Stats report output");
  plan_cmd->add_option("--legality", plan.legality, "Operator legality table (default: built-in)");

  std::string dot_formula, dot_roadmap;
  auto *dot_cmd = app.add_subcommand("dot", "Print the Buchi automaton (or product) in DOT");
  dot_cmd->add_option("--formula", dot_formula, "LTL formula text")->required();
  dot_cmd->add_option("--roadmap", dot_roadmap, "Roadmap file; prints the product instead");

  auto *legality_cmd = app.add_subcommand("legality", "Print the default edge-operator legality table");

  std::string host = "127.0.0.1", snapshot_dir, serve_legality;
  int port = 8080;
  auto *serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--snapshot-dir", snapshot_dir, "Write session roadmap/spec snapshots here");
  serve_cmd->add_option("--legality", serve_legality, "Operator legality table (default: built-in)");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try
  {
    if (*plan_cmd)
      return run_plan(plan);
    if (*dot_cmd)
      return run_dot(dot_formula, dot_roadmap);
    if (*legality_cmd)
    {
      std::cout << eltl::LegalityTable::defaults().to_json().dump(2) << "\n";
      return 0;
    }
    return run_serve(host, port, snapshot_dir, serve_legality);
  }
  catch (const eltl::Error &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == eltl::ErrorCode::infeasible ? 2 : 1;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

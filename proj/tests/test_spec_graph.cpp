#include "support.hpp"

#include <gtest/gtest.h>

using namespace eltl;
using namespace eltl::testing;
using namespace eltl::ltl;

namespace
{
  SpecNode node(const std::string &id, const std::string &label, NodeColor c = NodeColor::green)
  {
    return {id, {0, 0}, c, parse_formula(label)};
  }

  constexpr EdgeOps kAndF{BoolOp::and_, TempOp::future, TempOp::epsilon};
}

TEST(GraphToFormula, ExperimentOne)
{
  const SpecGraph g = experiment1_graph();
  EXPECT_TRUE(validate_spec_graph(g).empty());
  const Formula f = graph_to_formula(g);
  EXPECT_EQ(f, experiment1_formula());
  EXPECT_EQ(format_formula(f), "((q0 -> (X q1)) && (q0 && (F q2)))");
}

TEST(GraphToFormula, ExperimentTwoBackEdge)
{
  const SpecGraph g = experiment2_graph();
  EXPECT_TRUE(validate_spec_graph(g).empty());
  const Formula f = graph_to_formula(g);
  EXPECT_EQ(f, experiment2_formula());
  EXPECT_EQ(format_formula(f), "(q0 && (G (F (q1 && (F q2)))))");
}

TEST(GraphToFormula, SemanticallyEqualToTargetsOnAllShortLassos)
{
  const auto lassos = enumerate_lassos({"q0", "q1", "q2"}, 5);
  const Formula f1 = graph_to_formula(experiment1_graph());
  const Formula f2 = graph_to_formula(experiment2_graph());
  for (const auto &l : lassos)
  {
    ASSERT_EQ(eval_lasso(f1, l.prefix, l.cycle), eval_lasso(experiment1_formula(), l.prefix, l.cycle));
    ASSERT_EQ(eval_lasso(f2, l.prefix, l.cycle), eval_lasso(experiment2_formula(), l.prefix, l.cycle));
  }
}

TEST(GraphToFormula, SingleNodeAndRootLoop)
{
  SpecGraph g{{node("a", "q0")}, {}, "a"};
  EXPECT_EQ(graph_to_formula(g), atom("q0"));

  // A back-edge into the root wraps the whole formula.
  SpecGraph loop{{node("a", "p"), node("b", "q")}, {{"a", "b", kAndF}, {"b", "a", kAndF}}, "a"};
  EXPECT_EQ(graph_to_formula(loop), always(conj(atom("p"), future(atom("q")))));
}

TEST(GraphToFormula, UntilAndOperators)
{
  SpecGraph g{{node("a", "p"), node("b", "q")}, {{"a", "b", {BoolOp::epsilon, TempOp::until, TempOp::always}}}, "a"};
  EXPECT_EQ(graph_to_formula(g), always(until(atom("p"), atom("q"))));
  g.edges[0].ops = {BoolOp::or_, TempOp::next, TempOp::future};
  EXPECT_EQ(graph_to_formula(g), future(disj(atom("p"), next(atom("q")))));
  g.edges[0].ops = {BoolOp::epsilon, TempOp::always, TempOp::epsilon};
  EXPECT_EQ(graph_to_formula(g), conj(atom("p"), always(atom("q"))));
}

TEST(GraphToFormula, EdgeCreationOrderDecidesClauseOrder)
{
  SpecGraph g{{node("a", "p"), node("b", "q"), node("c", "r")}, {{"a", "c", kAndF}, {"a", "b", kAndF}}, "a"};
  EXPECT_EQ(graph_to_formula(g), conj(conj(atom("p"), future(atom("r"))), conj(atom("p"), future(atom("q")))));
}

TEST(GraphToFormula, RedNodeNegatesItsClause)
{
  SpecGraph g{{node("a", "q0"), node("b", "obs")}, {{"a", "b", {BoolOp::and_, TempOp::always, TempOp::epsilon}}}, "a"};
  const Formula green = graph_to_formula(g);
  g.nodes[1].color = NodeColor::red;
  const Formula red = graph_to_formula(g);
  EXPECT_EQ(green, conj(atom("q0"), always(atom("obs"))));
  EXPECT_EQ(red, conj(atom("q0"), always(neg(atom("obs")))));
}

TEST(GraphToFormula, UnsupportedShapes)
{
  // Two back-edges into the same ancestor.
  SpecGraph twice{{node("a", "p"), node("b", "q"), node("c", "r")},
                  {{"a", "b", kAndF}, {"b", "c", kAndF}, {"c", "a", kAndF}, {"b", "a", kAndF}},
                  "a"};
  // A cross edge between two subtrees.
  SpecGraph cross{{node("a", "p"), node("b", "q"), node("c", "r")},
                  {{"a", "b", kAndF}, {"a", "c", kAndF}, {"c", "b", kAndF}},
                  "a"};
  for (const SpecGraph *g : {&twice, &cross})
  {
    try
    {
      graph_to_formula(*g);
      FAIL();
    }
    catch (const Error &e)
    {
      EXPECT_STREQ(e.what(), "unsupported cyclic structure");
      EXPECT_EQ(e.code(), ErrorCode::unsupported);
    }
  }
  SpecGraph orphan{{node("a", "p"), node("b", "q")}, {}, "a"};
  EXPECT_THROW(graph_to_formula(orphan), Error);
}

TEST(ValidateSpecGraph, Violations)
{
  SpecGraph g{{node("a", "p")}, {}, std::nullopt};
  EXPECT_EQ(validate_spec_graph(g), (std::vector<std::string>{"start node unset"}));
  g.start = "a";
  g.edges.push_back({"a", "zz", kAndF});
  EXPECT_EQ(validate_spec_graph(g), (std::vector<std::string>{"unknown node in edge"}));

  SpecGraph ops{{node("a", "p"), node("b", "q", NodeColor::red)},
                {{"a", "b", {BoolOp::and_, TempOp::until, TempOp::epsilon}},
                 {"b", "a", {BoolOp::epsilon, TempOp::until, TempOp::epsilon}},
                 {"a", "b", {BoolOp::and_, TempOp::future, TempOp::next}}},
                "a"};
  const auto v = validate_spec_graph(ops);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].rfind("illegal operator combination (AND, UNTIL, EPSILON)", 0), 0u) << v[0];
  EXPECT_EQ(v[1], "red node b used as UNTIL source");
  EXPECT_EQ(v[2].rfind("illegal operator combination", 0), 0u);
  EXPECT_THROW(graph_to_formula(ops), Error);
}

TEST(LegalityTable, DataFileMatchesBuiltIn)
{
  const LegalityTable file = LegalityTable::from_json(nlohmann::json::parse(read_file(std::string(ELTL_DATA_DIR) + "/legality.json")));
  EXPECT_EQ(file.allowed(), LegalityTable::defaults().allowed());
  EXPECT_EQ(LegalityTable::from_json(LegalityTable::defaults().to_json()).allowed(), LegalityTable::defaults().allowed());
  // 4 x 5 x 3 triples minus the three UNTIL rows with a non-epsilon bo2 (x3 to1 values).
  EXPECT_EQ(LegalityTable::defaults().allowed().size(), 60u - 9u);
}

TEST(LegalityTable, RestrictedTableRejectsEdges)
{
  const LegalityTable only_future({kAndF});
  SpecGraph g = experiment1_graph();
  const auto v = validate_spec_graph(g, only_future);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("IMPLIES, NEXT"), std::string::npos);
}

TEST(SpecGraphFile, RoundTrip)
{
  for (const SpecGraph &g : {experiment1_graph(), experiment2_graph()})
  {
    const std::string bytes = save_spec_graph(g);
    EXPECT_EQ(load_spec_graph(bytes), g);
    EXPECT_EQ(save_spec_graph(load_spec_graph(bytes)), bytes);
  }
  SpecGraph red{{node("a", "p && !q", NodeColor::red)}, {}, std::nullopt};
  EXPECT_EQ(load_spec_graph(save_spec_graph(red)), red);
  EXPECT_THROW(load_spec_graph(R"({"nodes":[],"edges":[],"start":null,"x":1})"), Error);
  EXPECT_THROW(load_spec_graph(R"({"nodes":[{"id":"a","x":0,"y":0,"color":"blue","label":"p"}],"edges":[],"start":"a"})"),
               Error);
  EXPECT_THROW(load_spec_graph(R"({"nodes":[],"edges":[{"from":"a","to":"b","bo2":"XOR","to2":"EPSILON","to1":"EPSILON"}],"start":null})"),
               Error);
}

TEST(DefaultSpec, FromSketchEndpoints)
{
  const Roadmap r = office_roadmap();
  // Rooted at the roadmap start A (q0); unlabelled endpoints are skipped.
  const SpecGraph g = default_spec_graph(r, {{"B", "D"}});
  EXPECT_EQ(graph_to_formula(g), conj(conj(atom("q0"), future(atom("q1"))), conj(atom("q0"), future(atom("q2")))));
  const SpecGraph two = default_spec_graph(r, {{"A", "B"}, {"C", "B"}});
  EXPECT_EQ(graph_to_formula(two), conj(atom("q0"), future(atom("q1"))));
  try
  {
    default_spec_graph(r, {{"C", "E"}});
    FAIL();
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.code(), ErrorCode::conflict);
  }
}

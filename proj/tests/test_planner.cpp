#include "support.hpp"

#include <gtest/gtest.h>

using namespace eltl;
using namespace eltl::testing;
using namespace eltl::ltl;

namespace
{
  // A(start) - B - C(q1) on a line, with a scenic loop A - D - B above it and
  // an obstacle O wired between A and C.
  Roadmap scenic()
  {
    return make_roadmap({{"A", 0, 0}, {"B", 10, 0}, {"C", 20, 0, {"q1"}}, {"D", 5, 8}, {"O", 10, -6, {"obs"}}},
                        {{"A", "B"}, {"B", "C"}, {"A", "D"}, {"D", "B"}, {"A", "O"}, {"O", "C"}}, "A");
  }

  PreferredPath pp(std::vector<NodeId> nodes)
  {
    return preferred_path_from_walk(Walk{std::move(nodes)});
  }

  struct Built
  {
    TransitionSystem ts;
    BuchiAutomaton ba;
    ProductAutomaton pa;
  };

  Built build_all(const Roadmap &r, const Formula &f)
  {
    Built s{to_transition_system(r), ltl_to_buchi(f), {}};
    s.pa = build_product(s.ts, s.ba);
    return s;
  }
}

TEST(BiasWeights, EmptySetLeavesProductUnchanged)
{
  const Built s = build_all(scenic(), future(atom("q1")));
  const ProductAutomaton b = bias_weights(s.pa, s.ts, {});
  for (int i = 0; i < s.pa.size(); ++i)
    for (std::size_t k = 0; k < s.pa.out[i].size(); ++k)
    {
      EXPECT_EQ(b.out[i][k].weight, s.pa.out[i][k].weight);
      EXPECT_FALSE(b.out[i][k].biased);
    }
}

TEST(BiasWeights, OnlyEndpointTransitionsGetAlpha)
{
  const Built s = build_all(scenic(), future(atom("q1")));
  const ProductAutomaton b = bias_weights(s.pa, s.ts, {pp({"A", "D", "B"})});
  const double alpha = default_alpha(s.pa);
  const int A = s.ts.index_of("A"), B = s.ts.index_of("B");
  int biased = 0;
  ASSERT_EQ(b.size(), s.pa.size());
  for (int i = 0; i < b.size(); ++i)
  {
    ASSERT_EQ(b.out[i].size(), s.pa.out[i].size());
    for (std::size_t k = 0; k < b.out[i].size(); ++k)
    {
      const auto &t = b.out[i][k];
      EXPECT_EQ(t.to, s.pa.out[i][k].to);
      if (b.states[i].ts == A && b.states[t.to].ts == B)
      {
        EXPECT_EQ(t.weight, alpha);
        EXPECT_TRUE(t.biased);
        ++biased;
      }
      else
        EXPECT_EQ(t.weight, s.pa.out[i][k].weight);
    }
  }
  EXPECT_GT(biased, 0);
  // alpha stays under one real weight even when summed over every transition.
  EXPECT_LT(alpha * static_cast<double>(s.pa.transition_count()), min_weight(s.pa));

  // Non-adjacent endpoints: nothing to bias.
  const ProductAutomaton none = bias_weights(s.pa, s.ts, {pp({"D", "B", "C"})});
  for (int i = 0; i < none.size(); ++i)
    for (const auto &t : none.out[i])
      EXPECT_FALSE(t.biased);

  // remove_bias restores the table bit for bit.
  const ProductAutomaton back = remove_bias(b);
  for (int i = 0; i < back.size(); ++i)
    for (std::size_t k = 0; k < back.out[i].size(); ++k)
    {
      EXPECT_EQ(std::memcmp(&back.out[i][k].weight, &s.pa.out[i][k].weight, sizeof(double)), 0);
      EXPECT_FALSE(back.out[i][k].biased);
    }
}

TEST(BiasWeights, AlphaBoundEnforced)
{
  const Built s = build_all(scenic(), future(atom("q1")));
  PlannerConfig cfg;
  cfg.alpha = min_weight(s.pa);
  EXPECT_THROW(bias_weights(s.pa, s.ts, {pp({"A", "D", "B"})}, cfg), Error);
  cfg.alpha = -1.0;
  EXPECT_THROW(bias_weights(s.pa, s.ts, {pp({"A", "D", "B"})}, cfg), Error);
  cfg.alpha = 1e-9;
  EXPECT_NO_THROW(bias_weights(s.pa, s.ts, {pp({"A", "D", "B"})}, cfg));
}

TEST(ValidSubstitution, StutterCheck)
{
  const Built s = build_all(scenic(), parse_formula("G !obs && F q1"));
  // The state reached from the start waits for q1 while avoiding obs.
  const int start = s.pa.initial.front();
  const int sh = s.pa.states[start].ba;
  int sm = -1;
  for (const auto &t : s.pa.out[start])
    if (s.pa.states[t.to].ts == s.ts.index_of("B"))
      sm = s.pa.states[t.to].ba;
  ASSERT_GE(sm, 0);
  EXPECT_TRUE(valid_substitution(pp({"A", "D", "B"}), sh, sm, s.ba, s.ts));
  EXPECT_TRUE(valid_substitution(pp({"A", "B"}), sh, sm, s.ba, s.ts));
  EXPECT_FALSE(valid_substitution(pp({"A", "O", "C", "B"}), sh, sm, s.ba, s.ts));

  // True self-loop at the source: any unlabelled interior works.
  const BuchiAutomaton t = ltl_to_buchi(Formula::truth());
  int tl = -1;
  for (int q = 0; q < t.size(); ++q)
    if (t.enabled(q, q, 0))
      tl = q;
  ASSERT_GE(tl, 0);
  EXPECT_TRUE(valid_substitution(pp({"A", "D", "B"}), tl, tl, t, s.ts));
  EXPECT_FALSE(valid_substitution(pp({"A"}), tl, tl, t, s.ts));
}

TEST(ExtendedPlanner, NoPreferredPathsEqualsBaseline)
{
  std::mt19937 rng(61);
  for (int k = 0; k < 100; ++k)
  {
    const PlannerScenario sc = random_planner_scenario(rng);
    const Built s = build_all(sc.roadmap, sc.formula);
    AcceptingLasso base;
    try
    {
      base = plan_lasso(s.pa);
    }
    catch (const Error &)
    {
      EXPECT_THROW(extended_planner(s.pa, s.ts, {}), Error);
      continue;
    }
    const Plan plan = extended_planner(s.pa, s.ts, {});
    std::vector<int> all = base.prefix;
    all.insert(all.end(), base.suffix.begin(), base.suffix.end());
    EXPECT_DOUBLE_EQ(plan_weight(plan, s.ts), path_weight(s.pa, all));
    EXPECT_TRUE(plan_satisfies(plan, s.ts));
    for (const auto &seg : plan.segments)
      EXPECT_EQ(seg.source, SegmentSource::fallback);
  }
}

TEST(ExtendedPlanner, ScenicDetourIsTaken)
{
  const Built s = build_all(scenic(), parse_formula("G !obs && F q1"));
  const Plan plan = extended_planner(s.pa, s.ts, {pp({"A", "D", "B"})});
  EXPECT_EQ(plan.prefix, (std::vector<NodeId>{"A", "D", "B", "C"}));
  ASSERT_FALSE(plan.segments.empty());
  EXPECT_EQ(plan.segments[0].source, SegmentSource::preferred);
  EXPECT_EQ(plan.segments[0].waypoints, (std::vector<NodeId>{"A", "D", "B"}));
  EXPECT_TRUE(plan_satisfies(plan, s.ts));
}

TEST(ExtendedPlanner, DetourThroughObstacleRejected)
{
  const Built s = build_all(scenic(), parse_formula("G !obs && F q1"));
  const Plan plan = extended_planner(s.pa, s.ts, {pp({"A", "O", "C", "B"})});
  EXPECT_TRUE(std::find(plan.prefix.begin(), plan.prefix.end(), "O") == plan.prefix.end());
  for (const auto &seg : plan.segments)
    EXPECT_EQ(seg.source, SegmentSource::fallback);
  EXPECT_TRUE(plan_satisfies(plan, s.ts));

  // Without the safety conjunct the same detour is fine.
  const Built loose = build_all(scenic(), parse_formula("F q1"));
  const Plan p2 = extended_planner(loose.pa, loose.ts, {pp({"A", "O", "C", "B"})});
  EXPECT_EQ(p2.segments[0].source, SegmentSource::preferred);
}

TEST(ExtendedPlanner, AlphaChoiceDoesNotChangeThePlan)
{
  std::mt19937 rng(67);
  int compared = 0;
  for (int k = 0; k < 150; ++k)
  {
    const PlannerScenario sc = random_planner_scenario(rng);
    const Built s = build_all(sc.roadmap, sc.formula);
    const double bound = min_weight(s.pa) / (static_cast<double>(s.pa.transition_count()) + 1.0);
    if (!std::isfinite(bound))
      continue; // no transitions, nothing to bias
    PlannerConfig a, b;
    a.alpha = bound * 0.999;
    b.alpha = bound * 1e-6;
    try
    {
      const PlannerResult ra = extended_planner_run(s.pa, s.ts, sc.preferred, a);
      const PlannerResult rb = extended_planner_run(s.pa, s.ts, sc.preferred, b);
      const PlannerResult rd = extended_planner_run(s.pa, s.ts, sc.preferred);
      EXPECT_EQ(ra.lasso.prefix, rb.lasso.prefix);
      EXPECT_EQ(ra.lasso.suffix, rb.lasso.suffix);
      EXPECT_EQ(ra.lasso.prefix, rd.lasso.prefix);
      EXPECT_EQ(ra.plan.prefix, rb.plan.prefix);
      EXPECT_EQ(ra.plan.suffix, rb.plan.suffix);
      ++compared;
    }
    catch (const Error &e)
    {
      EXPECT_EQ(e.code(), ErrorCode::infeasible) << e.what();
    }
  }
  EXPECT_GT(compared, 50);
}

TEST(ExtendedPlanner, RandomScenariosKeepSpecAndPriority)
{
  std::mt19937 rng(71);
  int solved = 0, preferred_used = 0;
  for (int k = 0; k < 200; ++k)
  {
    const PlannerScenario sc = random_planner_scenario(rng);
    const Built s = build_all(sc.roadmap, sc.formula);
    PlannerResult res;
    try
    {
      res = extended_planner_run(s.pa, s.ts, sc.preferred);
    }
    catch (const Error &e)
    {
      EXPECT_EQ(e.code(), ErrorCode::infeasible);
      continue;
    }
    ++solved;
    EXPECT_TRUE(plan_satisfies(res.plan, s.ts)) << format_formula(sc.formula);
    EXPECT_EQ(priority_violation(res, s.pa, s.ts, sc.preferred), "");
    for (const auto &seg : res.plan.segments)
      preferred_used += seg.source == SegmentSource::preferred;
    // Consecutive plan nodes are roadmap neighbours.
    std::vector<NodeId> all = res.plan.prefix;
    all.insert(all.end(), res.plan.suffix.begin(), res.plan.suffix.end());
    for (std::size_t i = 1; i < all.size(); ++i)
      EXPECT_TRUE(s.ts.has_transition(s.ts.index_of(all[i - 1]), s.ts.index_of(all[i])));
    if (!res.plan.suffix.empty())
      EXPECT_TRUE(s.ts.has_transition(s.ts.index_of(res.plan.suffix.back()), s.ts.index_of(res.plan.suffix.front())) ||
                  res.plan.suffix.back() == res.plan.prefix.back());
  }
  EXPECT_GT(solved, 100);
  EXPECT_GT(preferred_used, 20);
}

TEST(PlanDocument, RoundTrip)
{
  const Built s = build_all(scenic(), parse_formula("G !obs && G F q1"));
  Plan plan = extended_planner(s.pa, s.ts, {pp({"A", "D", "B"})});
  plan.stats = {1.5, 2.25, {3.0, 4.5}};
  const nlohmann::json j = plan_to_json(plan);
  const Plan back = plan_from_json(j);
  EXPECT_EQ(plan_to_json(back), j);
  EXPECT_EQ(back.prefix, plan.prefix);
  EXPECT_EQ(back.suffix, plan.suffix);
  EXPECT_EQ(back.formula, plan.formula);
  ASSERT_EQ(back.segments.size(), plan.segments.size());
  for (std::size_t i = 0; i < plan.segments.size(); ++i)
    EXPECT_EQ(back.segments[i].in_suffix, plan.segments[i].in_suffix);
}

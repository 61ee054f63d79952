/**
 * Session-oriented planning service.
 *
 * Transport independent: every operation takes and returns JSON plus an HTTP
 * status code. eltl/http.hpp binds these to routes. Requests on different
 * sessions run concurrently; requests on one session are serialised by the
 * session mutex.
 */
#pragma once

#include "eltl/error.hpp"
#include "eltl/pipeline.hpp"
#include "eltl/planner.hpp"
#include "eltl/roadmap.hpp"
#include "eltl/sketch_match.hpp"
#include "eltl/spec_graph.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace eltl
{
  struct Response
  {
    int status = 200;
    nlohmann::json body;
  };

  struct ServiceOptions
  {
    PipelineConfig pipeline;
    double playback_speed = 0.2; ///< map widths per second
    std::optional<std::filesystem::path> snapshot_dir;
  };

  struct PlaybackState
  {
    std::size_t step = 0; ///< index of the segment start in prefix . suffix
    Point pose;
    double heading = 0.0; ///< degrees, image axes
    bool in_suffix = false;
    double time = 0.0;
  };

  inline int http_status(ErrorCode code)
  {
    switch (code)
    {
    case ErrorCode::parse:
      return 400;
    case ErrorCode::not_found:
      return 404;
    case ErrorCode::conflict:
      return 409;
    default:
      return 422;
    }
  }

  inline Response error_response(int status, const std::string &message)
  {
    return {status, {{"code", status}, {"message", message}}};
  }

  inline RoadmapEdit edit_from_json(const nlohmann::json &j)
  {
    using detail::required;
    const auto op = required<std::string>(j, "op", "edit");
    auto props = [&]
    {
      PropSet p;
      if (j.contains("props"))
        for (const auto &s : required<std::vector<std::string>>(j, "props", "edit"))
          p.insert(s);
      return p;
    };
    auto point = [&]
    { return Point{required<double>(j, "x", "edit"), required<double>(j, "y", "edit")}; };
    if (op == "add_node")
    {
      detail::reject_unknown_keys(j, {"op", "x", "y", "props", "id"}, "edit");
      edit::AddNode a{point(), props(), std::nullopt};
      if (j.contains("id"))
        a.id = required<std::string>(j, "id", "edit");
      return a;
    }
    if (op == "move_node")
    {
      detail::reject_unknown_keys(j, {"op", "id", "x", "y"}, "edit");
      return edit::MoveNode{required<std::string>(j, "id", "edit"), point()};
    }
    if (op == "remove_node")
    {
      detail::reject_unknown_keys(j, {"op", "id"}, "edit");
      return edit::RemoveNode{required<std::string>(j, "id", "edit")};
    }
    if (op == "add_edge" || op == "remove_edge")
    {
      detail::reject_unknown_keys(j, {"op", "a", "b"}, "edit");
      auto a = required<std::string>(j, "a", "edit");
      auto b = required<std::string>(j, "b", "edit");
      if (op == "add_edge")
        return edit::AddEdge{a, b};
      return edit::RemoveEdge{a, b};
    }
    if (op == "set_props")
    {
      detail::reject_unknown_keys(j, {"op", "id", "props"}, "edit");
      return edit::SetProps{required<std::string>(j, "id", "edit"), props()};
    }
    if (op == "set_start")
    {
      detail::reject_unknown_keys(j, {"op", "id"}, "edit");
      return edit::SetStart{required<std::string>(j, "id", "edit")};
    }
    throw Error(ErrorCode::parse, "unknown edit op '" + op + "'");
  }

  /// Pose after travelling `time` seconds along the plan at `speed` px/s.
  inline PlaybackState playback_pose(const Plan &plan, const Roadmap &r, double speed, double time)
  {
    auto pos = [&](const NodeId &id)
    {
      const auto *n = r.find(id);
      if (!n)
        throw Error(ErrorCode::conflict, "plan references a missing node");
      return n->pos;
    };
    std::vector<Point> prefix;
    for (const auto &id : plan.prefix)
      prefix.push_back(pos(id));
    std::vector<Point> cycle;
    if (!plan.suffix.empty())
    {
      cycle.push_back(prefix.back());
      for (const auto &id : plan.suffix)
        cycle.push_back(pos(id));
    }
    auto length = [](const std::vector<Point> &pts)
    {
      double l = 0.0;
      for (std::size_t i = 1; i < pts.size(); ++i)
        l += distance(pts[i - 1], pts[i]);
      return l;
    };
    // Locate arc length s on a polyline; returns (segment index, point, heading).
    auto locate = [](const std::vector<Point> &pts, double s)
    {
      std::size_t i = 1;
      for (; i + 1 < pts.size(); ++i)
      {
        const double d = distance(pts[i - 1], pts[i]);
        if (s <= d)
          break;
        s -= d;
      }
      const Point &a = pts[i - 1];
      const Point &b = pts[i];
      const double d = distance(a, b);
      const double t = d > 0 ? std::clamp(s / d, 0.0, 1.0) : 0.0;
      const double heading = std::atan2(b.y - a.y, b.x - a.x) * 180.0 / std::numbers::pi;
      return std::make_tuple(i - 1, Point{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, heading);
    };

    PlaybackState st;
    st.time = time;
    const double s = speed * time;
    const double lp = length(prefix);
    if (prefix.size() == 1 && cycle.empty())
    {
      st.pose = prefix.front();
      return st;
    }
    if (s <= lp || cycle.empty())
    {
      auto [i, p, h] = prefix.size() > 1 ? locate(prefix, std::min(s, lp))
                                         : std::make_tuple(std::size_t{0}, prefix.front(), 0.0);
      st.step = i;
      st.pose = p;
      st.heading = h;
      return st;
    }
    const double lc = length(cycle);
    auto [i, p, h] = locate(cycle, std::fmod(s - lp, lc));
    st.step = prefix.size() - 1 + i;
    st.pose = p;
    st.heading = h;
    st.in_suffix = true;
    return st;
  }

  class Service
  {
  public:
    explicit Service(ServiceOptions options = {}) : options_(std::move(options)) {}

    Response create_session(const nlohmann::json &body)
    {
      return guarded([&]
                     {
        auto s = std::make_shared<Session>();
        if (body.is_object() && body.contains("roadmap"))
          s->roadmap = roadmap_from_json(body.at("roadmap"));
        else if (body.is_object() && body.contains("image"))
        {
          const auto &img = body.at("image");
          s->roadmap = empty_roadmap(detail::required<std::string>(img, "path", "image"),
                                     detail::required<int>(img, "width", "image"),
                                     detail::required<int>(img, "height", "image"));
        }
        std::lock_guard lock(sessions_mutex_);
        s->id = "s" + std::to_string(++next_id_);
        sessions_[s->id] = s;
        return Response{201, {{"id", s->id}}}; });
    }

    Response get_roadmap(const std::string &id)
    {
      return with_session(id, [&](Session &s)
                          { return Response{200, roadmap_to_json(s.roadmap)}; });
    }

    Response put_roadmap(const std::string &id, const nlohmann::json &body)
    {
      return with_session(id, [&](Session &s)
                          {
        Roadmap r = roadmap_from_json(body);
        replace_roadmap(s, std::move(r));
        return Response{200, roadmap_to_json(s.roadmap)}; });
    }

    Response post_edit(const std::string &id, const nlohmann::json &body)
    {
      return with_session(id, [&](Session &s)
                          {
        Roadmap r = apply_edit(s.roadmap, edit_from_json(body));
        replace_roadmap(s, std::move(r));
        return Response{200, roadmap_to_json(s.roadmap)}; });
    }

    Response post_sketch(const std::string &id, const nlohmann::json &body)
    {
      return with_session(id, [&](Session &s)
                          {
        detail::reject_unknown_keys(body, {"stroke", "params"}, "sketch");
        std::vector<Point> raw;
        for (const auto &p : detail::required<nlohmann::json>(body, "stroke", "sketch"))
          raw.push_back({detail::required<double>(p, "x", "stroke"), detail::required<double>(p, "y", "stroke")});
        SamplingParams params = options_.pipeline.sampling;
        if (body.contains("params"))
        {
          const auto &pj = body.at("params");
          if (pj.contains("d_m"))
            params.d_m = detail::required<double>(pj, "d_m", "params");
          if (pj.contains("theta_m"))
            params.theta_m = detail::required<double>(pj, "theta_m", "params");
        }
        if (s.roadmap.nodes.empty())
          throw Error(ErrorCode::conflict, "no nodes");
        const TransitionSystem ts = detail::graph_view(s.roadmap);
        MatchedSketch m = match_sketch(raw, s.roadmap, ts, params, options_.pipeline.match);
        nlohmann::json out = {{"sampled", points_to_json(m.match.sampled.points)},
                              {"start", m.match.sampled.start_node},
                              {"end", m.match.sampled.end_node},
                              {"walk", m.match.bmp.walk.nodes},
                              {"cwpd", m.match.bmp.cwpd},
                              {"d_m", m.match.params_used.d_m},
                              {"bmp_ms", m.bmp_ms}};
        s.sketches.push_back(std::move(m));
        s.last_plan.reset();
        return Response{200, out}; });
    }

    Response put_spec(const std::string &id, const nlohmann::json &body)
    {
      return with_session(id, [&](Session &s)
                          {
        if (body.is_object() && body.size() == 1 && body.contains("formula"))
        {
          s.spec = parse_formula(detail::required<std::string>(body, "formula", "spec"));
        }
        else
        {
          SpecGraph g = spec_graph_from_json(body);
          auto violations = validate_spec_graph(g, options_.pipeline.legality);
          if (!violations.empty())
          {
            Response r = error_response(422, violations.front());
            r.body["violations"] = violations;
            return r;
          }
          nlohmann::json formula = format_formula(graph_to_formula(g, options_.pipeline.legality));
          s.spec = std::move(g);
          s.last_plan.reset();
          snapshot(s);
          return Response{200, {{"formula", formula}}};
        }
        s.last_plan.reset();
        snapshot(s);
        return Response{200, {{"formula", format_formula(std::get<Formula>(s.spec))}}}; });
    }

    Response post_plan(const std::string &id)
    {
      return with_session(id, [&](Session &s)
                          {
        Plan plan = plan_with_sketches(s.roadmap, s.spec, s.sketches, options_.pipeline);
        s.last_plan = plan;
        s.playback_time = 0.0;
        return Response{200, plan_to_json(plan)}; });
    }

    Response get_plan(const std::string &id)
    {
      return with_session(id, [&](Session &s)
                          {
        if (!s.last_plan)
          return error_response(409, "no plan");
        if (!plan_satisfies(*s.last_plan, to_transition_system(s.roadmap)))
          return error_response(500, "stored plan failed the specification audit");
        return Response{200, plan_to_json(*s.last_plan)}; });
    }

    Response playback_step(const std::string &id, const nlohmann::json &body)
    {
      return with_session(id, [&](Session &s)
                          {
        if (!s.last_plan)
          return error_response(409, "no plan");
        const double dt = body.is_object() && body.contains("dt") ? detail::required<double>(body, "dt", "playback") : 0.0;
        if (!(dt >= 0.0))
          throw Error(ErrorCode::invalid_input, "dt must be non-negative");
        s.playback_time += dt;
        const double speed = options_.playback_speed * std::max(1, s.roadmap.image.width);
        const PlaybackState st = playback_pose(*s.last_plan, s.roadmap, speed, s.playback_time);
        return Response{200, {{"step", st.step},
                              {"x", st.pose.x},
                              {"y", st.pose.y},
                              {"heading", st.heading},
                              {"in_suffix", st.in_suffix},
                              {"time", st.time}}}; });
    }

    Response legality() const { return {200, options_.pipeline.legality.to_json()}; }

    std::size_t session_count()
    {
      std::lock_guard lock(sessions_mutex_);
      return sessions_.size();
    }

  private:
    struct Session
    {
      std::mutex mutex;
      std::string id;
      Roadmap roadmap;
      std::vector<MatchedSketch> sketches;
      SpecSource spec;
      std::optional<Plan> last_plan;
      double playback_time = 0.0;
    };

    template <class F>
    static Response guarded(F &&f)
    {
      try
      {
        return f();
      }
      catch (const Error &e)
      {
        return error_response(http_status(e.code()), e.what());
      }
      catch (const nlohmann::json::exception &e)
      {
        return error_response(400, e.what());
      }
    }

    template <class F>
    Response with_session(const std::string &id, F &&f)
    {
      std::shared_ptr<Session> s;
      {
        std::lock_guard lock(sessions_mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end())
          return error_response(404, "no such session");
        s = it->second;
      }
      std::lock_guard lock(s->mutex);
      return guarded([&]
                     { return f(*s); });
    }

    // Roadmap edits invalidate every matched sketch and the plan.
    void replace_roadmap(Session &s, Roadmap r)
    {
      s.roadmap = std::move(r);
      s.sketches.clear();
      s.last_plan.reset();
      s.playback_time = 0.0;
      snapshot(s);
    }

    void snapshot(const Session &s) const
    {
      if (!options_.snapshot_dir)
        return;
      std::filesystem::create_directories(*options_.snapshot_dir);
      std::ofstream(*options_.snapshot_dir / (s.id + ".roadmap.json")) << save_roadmap(s.roadmap);
      if (const auto *g = std::get_if<SpecGraph>(&s.spec))
        std::ofstream(*options_.snapshot_dir / (s.id + ".spec.json")) << save_spec_graph(*g);
    }

    ServiceOptions options_;
    std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::size_t next_id_ = 0;
  };
}

/**
 * HTTP routes for eltl::Service (cpp-httplib).
 */
#pragma once

#include "eltl/service.hpp"

#include <httplib.h>
#include <json.hpp>

namespace eltl
{
  inline void bind_routes(httplib::Server &server, Service &service)
  {
    auto reply = [](httplib::Response &res, const Response &r)
    {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    // Parses the request body; empty bodies become null.
    auto body_of = [](const httplib::Request &req, httplib::Response &res, nlohmann::json &out)
    {
      if (req.body.empty())
      {
        out = nullptr;
        return true;
      }
      try
      {
        out = nlohmann::json::parse(req.body);
        return true;
      }
      catch (const nlohmann::json::parse_error &e)
      {
        res.status = 400;
        res.set_content(error_response(400, e.what()).body.dump(), "application/json");
        return false;
      }
    };

    server.Post("/sessions", [svc = &service, reply, body_of](const httplib::Request &req, httplib::Response &res)
                {
      nlohmann::json body;
      if (body_of(req, res, body))
        reply(res, svc->create_session(body)); });
    server.Get("/legality", [svc = &service, reply](const httplib::Request &, httplib::Response &res)
               { reply(res, svc->legality()); });
    server.Get(R"(/sessions/([^/]+)/roadmap)", [svc = &service, reply](const httplib::Request &req, httplib::Response &res)
               { reply(res, svc->get_roadmap(req.matches[1])); });
    server.Put(R"(/sessions/([^/]+)/roadmap)", [svc = &service, reply, body_of](const httplib::Request &req, httplib::Response &res)
               {
      nlohmann::json body;
      if (body_of(req, res, body))
        reply(res, svc->put_roadmap(req.matches[1], body)); });
    server.Post(R"(/sessions/([^/]+)/edits)", [svc = &service, reply, body_of](const httplib::Request &req, httplib::Response &res)
                {
      nlohmann::json body;
      if (body_of(req, res, body))
        reply(res, svc->post_edit(req.matches[1], body)); });
    server.Post(R"(/sessions/([^/]+)/sketches)", [svc = &service, reply, body_of](const httplib::Request &req, httplib::Response &res)
                {
      nlohmann::json body;
      if (body_of(req, res, body))
        reply(res, svc->post_sketch(req.matches[1], body)); });
    server.Put(R"(/sessions/([^/]+)/spec)", [svc = &service, reply, body_of](const httplib::Request &req, httplib::Response &res)
               {
      nlohmann::json body;
      if (body_of(req, res, body))
        reply(res, svc->put_spec(req.matches[1], body)); });
    server.Post(R"(/sessions/([^/]+)/plan)", [svc = &service, reply](const httplib::Request &req, httplib::Response &res)
                { reply(res, svc->post_plan(req.matches[1])); });
    server.Get(R"(/sessions/([^/]+)/plan)", [svc = &service, reply](const httplib::Request &req, httplib::Response &res)
               { reply(res, svc->get_plan(req.matches[1])); });
    server.Post(R"(/sessions/([^/]+)/playback/step)", [svc = &service, reply, body_of](const httplib::Request &req, httplib::Response &res)
                {
      nlohmann::json body;
      if (body_of(req, res, body))
        reply(res, svc->playback_step(req.matches[1], body)); });
  }
}

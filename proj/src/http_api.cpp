#include "cfguide/http_api.hpp"

#include "cfguide/errors.hpp"
#include "cfguide/json_io.hpp"

#include <httplib.h>
#include <json.hpp>

#include <functional>

namespace cfguide {

using nlohmann::json;

int http_status_for(std::string_view code) {
    if (code == "not_found") return 404;
    if (code == "state_error" || code == "degenerate_partition") return 409;
    static constexpr std::string_view user_errors[] = {
        "parse_error",  "config_error",   "empty_dataset", "key_error",
        "invalid_filter", "domain_error", "cycle_error",   "ref_error",
        "invalid_answer", "log_error",    "validation_error"};
    for (auto c : user_errors)
        if (c == code) return 400;
    return 500;
}

namespace {

using Handler = std::function<json(const httplib::Request&, httplib::Response&)>;

void send_error(httplib::Response& res, std::string_view code, const std::string& message) {
    res.status = http_status_for(code);
    res.set_content(json{{"code", code}, {"message", message}}.dump(), "application/json");
}

// Wraps a handler so every failure becomes a {code, message} body.
httplib::Server::Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
        try {
            const json body = h(req, res);
            if (res.status == -1) res.status = 200;
            res.set_content(body.dump(), "application/json");
        } catch (const Error& e) {
            send_error(res, e.code(), e.what());
        } catch (const json::exception& e) {
            send_error(res, "validation_error", std::string("malformed JSON: ") + e.what());
        } catch (const std::exception& e) {
            send_error(res, "internal", e.what());
        }
    };
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json doc = json::parse(req.body);
    if (!doc.is_object()) throw ValidationError("request body must be a JSON object");
    return doc;
}

std::optional<Interval> parse_range(const json& doc) {
    if (!doc.contains("range") || doc["range"].is_null()) return std::nullopt;
    const auto& r = doc["range"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
        throw ValidationError("range must be [lo, hi]");
    return Interval{r[0].get<double>(), r[1].get<double>()};
}

std::vector<std::string> string_list(const json& doc, const char* key) {
    if (!doc.contains(key) || doc[key].is_null()) return {};
    if (!doc[key].is_array()) throw ValidationError(std::string(key) + " must be a list");
    return doc[key].get<std::vector<std::string>>();
}

// Dataset upload: multipart with parts csv, config and optional truth/id, or
// a JSON body {csv, config, truth?, id?} where config and truth are objects.
json create_dataset(SessionService& service, const httplib::Request& req,
                    httplib::Response& res) {
    std::string csv, config, truth, id;
    if (req.is_multipart_form_data()) {
        const auto field = [&](const char* name) {
            return req.has_file(name) ? req.get_file_value(name).content : std::string{};
        };
        csv = field("csv");
        config = field("config");
        truth = field("truth");
        id = field("id");
    } else {
        const json doc = parse_body(req);
        if (!doc.contains("csv") || !doc["csv"].is_string())
            throw ValidationError("csv must be a string");
        csv = doc["csv"].get<std::string>();
        if (doc.contains("config")) config = doc["config"].dump();
        if (doc.contains("truth") && !doc["truth"].is_null()) truth = doc["truth"].dump();
        id = doc.value("id", std::string{});
    }
    if (csv.empty()) throw ValidationError("missing csv");
    if (config.empty()) throw ValidationError("missing config");
    std::optional<GroundTruth> gt;
    if (!truth.empty()) gt = GroundTruth::from_json(truth);
    const auto new_id = service.add_dataset(csv, DatasetConfig::from_json(config), std::move(gt), id);
    res.status = 201;
    return service.dataset_info(new_id);
}

}  // namespace

void register_routes(httplib::Server& server, SessionService& service) {
    SessionService* svc = &service;

    // Without SO_REUSEPORT, so a second server cannot bind an occupied port.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });

    server.Get("/health", guarded([](const auto&, auto&) { return json{{"status", "ok"}}; }));

    server.Post("/datasets", guarded([svc](const auto& req, auto& res) {
                    return create_dataset(*svc, req, res);
                }));
    server.Get("/datasets", guarded([svc](const auto&, auto&) {
                   json out = json::array();
                   for (const auto& id : svc->dataset_ids()) out.push_back(svc->dataset_info(id));
                   return out;
               }));
    server.Get(R"(/datasets/([^/]+))", guarded([svc](const auto& req, auto&) {
                   return svc->dataset_info(req.matches[1]);
               }));
    server.Get(R"(/datasets/([^/]+)/columns/([^/]+)/stats)",
               guarded([svc](const auto& req, auto&) {
                   return to_json(svc->dataset_column_stats(req.matches[1], req.matches[2]));
               }));

    server.Post("/sessions", guarded([svc](const auto& req, auto& res) {
                    const json doc = parse_body(req);
                    const auto id = svc->create_session(doc.at("dataset").template get<std::string>(),
                                                        doc.value("mode", std::string("cf")));
                    res.status = 201;
                    return svc->snapshot(id).to_json();
                }));
    server.Get("/sessions", guarded([svc](const auto&, auto&) { return json(svc->session_ids()); }));
    server.Get(R"(/sessions/([^/]+))", guarded([svc](const auto& req, auto&) {
                   return svc->snapshot(req.matches[1]).to_json();
               }));

    server.Post(R"(/sessions/([^/]+)/filters)", guarded([svc](const auto& req, auto&) {
                    const json doc = parse_body(req);
                    const auto action = parse_filter_action(doc.value("action", std::string("add")));
                    return svc
                        ->mutate_filter(req.matches[1], action,
                                        doc.at("variable").template get<std::string>(), parse_range(doc))
                        .to_json();
                }));
    server.Delete(R"(/sessions/([^/]+)/filters/([^/]+))", guarded([svc](const auto& req, auto&) {
                      return svc->mutate_filter(req.matches[1], FilterAction::remove, req.matches[2])
                          .to_json();
                  }));

    server.Get(R"(/sessions/([^/]+)/guidance)", guarded([svc](const auto& req, auto&) {
                   return svc->guidance(req.matches[1]).to_json();
               }));
    server.Get(R"(/sessions/([^/]+)/distributions)", guarded([svc](const auto& req, auto&) {
                   return svc->distributions(req.matches[1]).to_json();
               }));
    server.Get(R"(/sessions/([^/]+)/events)", guarded([svc](const auto& req, auto&) {
                   json out = json::array();
                   for (const auto& e : svc->events(req.matches[1])) out.push_back(json::parse(e.to_jsonl()));
                   return out;
               }));
    server.Get(R"(/sessions/([^/]+)/analysis)", guarded([svc](const auto& req, auto&) {
                   return to_json(svc->export_analysis(req.matches[1]));
               }));
    server.Post(R"(/sessions/([^/]+)/answers)", guarded([svc](const auto& req, auto&) {
                    const json doc = parse_body(req);
                    Answers a;
                    a.t1 = string_list(doc, "t1");
                    a.t2 = string_list(doc, "t2");
                    if (doc.contains("confidence") && doc["confidence"].is_object()) {
                        a.confidence_t1 = doc["confidence"].value("t1", 0);
                        a.confidence_t2 = doc["confidence"].value("t2", 0);
                    }
                    const auto eval = svc->submit_answers(req.matches[1], std::move(a));
                    return json{{"stored", true},
                                {"evaluation", eval ? to_json(*eval) : json(nullptr)}};
                }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            const std::string code = res.status == 404 ? "not_found" : "http_error";
            res.set_content(json{{"code", code}, {"message", "no such route"}}.dump(),
                            "application/json");
        }
    });
}

}  // namespace cfguide

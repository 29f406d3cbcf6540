#include "crossling/annotate/server.hpp"

#include <openssl/rand.h>

#include <httplib.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "crossling/common/error.hpp"
#include "crossling/common/text.hpp"

namespace crossling::annotate {

namespace {

using nlohmann::json;

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message, json extra = json::object()) {
    extra["error"] = message;
    reply(res, status, extra);
}

std::string hex(const unsigned char* data, std::size_t n) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out += digits[data[i] >> 4];
        out += digits[data[i] & 0xf];
    }
    return out;
}

}  // namespace

TokenTable issue_tokens(const std::vector<std::string>& annotators) {
    TokenTable tokens;
    for (const auto& a : annotators) {
        unsigned char buf[16];
        if (RAND_bytes(buf, sizeof buf) != 1) throw Error(ErrorKind::IoError, "cannot draw random token");
        tokens.emplace(hex(buf, sizeof buf), a);
    }
    return tokens;
}

void save_tokens(const TokenTable& tokens, const std::filesystem::path& path) {
    write_file(path, json{{"tokens", tokens}}.dump(2) + "\n");
}

TokenTable load_tokens(const std::filesystem::path& path) {
    try {
        return json::parse(read_file(path)).at("tokens").get<TokenTable>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, "tokens file " + path.string() + ": " + e.what());
    }
}

AnnotationServer::AnnotationServer(std::vector<Batch> batches, TokenTable tokens, std::shared_ptr<JudgmentStore> store,
                                   std::string cors_origin)
    : batches_(std::move(batches)),
      tokens_(std::move(tokens)),
      store_(std::move(store)),
      cors_origin_(std::move(cors_origin)),
      server_(std::make_unique<httplib::Server>()) {
    for (std::size_t b = 0; b < batches_.size(); ++b)
        for (std::size_t t = 0; t < batches_[b].tasks.size(); ++t)
            task_index_[batches_[b].tasks[t].task_id] = {b, t};
    install_routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

const Batch* AnnotationServer::find_batch(const std::string& id) const {
    for (const auto& b : batches_)
        if (b.batch_id == id) return &b;
    return nullptr;
}

void AnnotationServer::install_routes() {
    auto& svr = *server_;

    svr.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", cors_origin_);
        res.set_header("Vary", "Origin");
    });
    svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type");
        res.set_header("Access-Control-Max-Age", "600");
        res.status = 204;
    });
    svr.set_exception_handler([](const httplib::Request& req, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        spdlog::error("{} {}: {}", req.method, req.path, what);
        fail(res, 500, what);
    });

    // Caller's annotator id, or empty after writing a 401.
    auto authenticate = [this](const httplib::Request& req, httplib::Response& res) -> std::string {
        const auto header = req.get_header_value("Authorization");
        constexpr std::string_view prefix = "Bearer ";
        if (header.starts_with(prefix)) {
            auto it = tokens_.find(std::string(trim(std::string_view(header).substr(prefix.size()))));
            if (it != tokens_.end()) return it->second;
        }
        fail(res, 401, "unknown or missing annotator token");
        return {};
    };

    svr.Get(R"(/batches/([^/]+)/next)", [this, authenticate](const httplib::Request& req, httplib::Response& res) {
        const auto annotator = authenticate(req, res);
        if (annotator.empty()) return;
        if (req.has_param("annotator") && req.get_param_value("annotator") != annotator)
            return fail(res, 401, "token does not belong to annotator '" + req.get_param_value("annotator") + "'");
        const auto* batch = find_batch(req.matches[1]);
        if (!batch) return fail(res, 404, "unknown batch '" + std::string(req.matches[1]) + "'");
        for (std::size_t i = 0; i < batch->tasks.size(); ++i) {
            const auto& task = batch->tasks[i];
            if (!store_->has_judged(task.task_id, annotator)) {
                return reply(res, 200,
                             {{"done", false}, {"index", i + 1}, {"total", batch->tasks.size()}, {"task", to_json(task)}});
            }
        }
        reply(res, 200, {{"done", true}, {"total", batch->tasks.size()}});
    });

    svr.Post("/judgments", [this, authenticate](const httplib::Request& req, httplib::Response& res) {
        const auto annotator = authenticate(req, res);
        if (annotator.empty()) return;
        const auto body = json::parse(req.body, nullptr, false);
        if (body.is_discarded()) return fail(res, 400, "body is not JSON");
        Judgment j;
        try {
            j = judgment_from_json(body);
        } catch (const Error& e) {
            return fail(res, e.kind() == ErrorKind::ValidationFailed ? 422 : 400, e.what());
        }
        if (!j.annotator_id.empty() && j.annotator_id != annotator)
            return fail(res, 401, "token does not belong to annotator '" + j.annotator_id + "'");
        j.annotator_id = annotator;
        if (auto problems = validate(j); !problems.empty())
            return fail(res, 422, "invalid judgment", {{"problems", problems}});
        if (!task_index_.contains(j.task_id)) return fail(res, 404, "unknown task '" + j.task_id + "'");
        const auto stored = store_->append(std::move(j));
        json out{{"id", stored.id}, {"task_id", stored.task_id}};
        if (stored.supersedes) out["supersedes"] = *stored.supersedes;
        reply(res, stored.supersedes ? 200 : 201, out);
    });

    svr.Get(R"(/batches/([^/]+)/progress)", [this, authenticate](const httplib::Request& req, httplib::Response& res) {
        const auto annotator = authenticate(req, res);
        if (annotator.empty()) return;
        const auto* batch = find_batch(req.matches[1]);
        if (!batch) return fail(res, 404, "unknown batch '" + std::string(req.matches[1]) + "'");
        std::map<std::string, std::size_t> per_annotator;
        for (const auto& [_, a] : tokens_) per_annotator[a] = 0;
        std::size_t judged_by_any = 0;
        for (const auto& task : batch->tasks) {
            const auto current = store_->current(task.task_id);
            if (!current.empty()) ++judged_by_any;
            for (const auto& j : current) ++per_annotator[j.annotator_id];
        }
        reply(res, 200,
              {{"batch_id", batch->batch_id},
               {"total", batch->tasks.size()},
               {"judged", per_annotator[annotator]},
               {"annotators", per_annotator},
               {"judged_by_any", judged_by_any},
               {"complete", judged_by_any == batch->tasks.size()}});
    });

    svr.Get(R"(/batches/([^/]+)/report)", [this, authenticate](const httplib::Request& req, httplib::Response& res) {
        if (authenticate(req, res).empty()) return;
        const auto* batch = find_batch(req.matches[1]);
        if (!batch) return fail(res, 404, "unknown batch '" + std::string(req.matches[1]) + "'");
        try {
            auto body = to_json(correlation(*batch, *store_));
            json tasks = json::array();
            for (const auto& task : batch->tasks) {
                const auto m = majority_label(task.automated_label, store_->current(task.task_id));
                tasks.push_back({{"task_id", task.task_id},
                                 {"automated_label", prompting::to_string(task.automated_label)},
                                 {"majority_label", prompting::to_string(m.label)},
                                 {"tie", m.tie}});
            }
            body["task_labels"] = std::move(tasks);
            reply(res, 200, body);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::IncompleteBatch) throw;
            fail(res, 409, e.what());
        }
    });
}

int AnnotationServer::start(const std::string& host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorKind::IoError, fmt::format("cannot bind {}:{}", host, port));
    thread_ = std::jthread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void AnnotationServer::run(const std::string& host, int port) {
    if (!server_->bind_to_port(host, port)) throw Error(ErrorKind::IoError, fmt::format("cannot bind {}:{}", host, port));
    spdlog::info("annotation service on {}:{}", host, port);
    server_->listen_after_bind();
}

void AnnotationServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace crossling::annotate

/// @file server.hpp
/// @brief JSON-over-HTTP annotation service.
///
///   GET  /batches/{id}/next?annotator=   next unjudged task for the caller
///   POST /judgments                      store a judgment (201, or 200 when it replaces one)
///   GET  /batches/{id}/progress          judged counts
///   GET  /batches/{id}/report            agreement with the automated labels
///
/// Every request carries "Authorization: Bearer <token>"; tokens map to
/// annotators and are issued when the batches are published.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "crossling/annotate/judgments.hpp"

namespace httplib {
class Server;
}

namespace crossling::annotate {

/// token -> annotator id
using TokenTable = std::map<std::string, std::string>;

/// One random 128-bit hex token per annotator.
TokenTable issue_tokens(const std::vector<std::string>& annotators);
/// {"tokens": {"<token>": "<annotator>"}}
void save_tokens(const TokenTable& tokens, const std::filesystem::path& path);
TokenTable load_tokens(const std::filesystem::path& path);

class AnnotationServer {
public:
    AnnotationServer(std::vector<Batch> batches, TokenTable tokens, std::shared_ptr<JudgmentStore> store,
                     std::string cors_origin = "*");
    ~AnnotationServer();
    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds (port 0 picks a free one) and serves on a background thread.
    /// Returns the bound port. Throws IoError when binding fails.
    int start(const std::string& host, int port);
    /// Binds and serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();

    [[nodiscard]] const JudgmentStore& store() const { return *store_; }

private:
    void install_routes();
    const Batch* find_batch(const std::string& id) const;

    std::vector<Batch> batches_;
    std::map<std::string, std::pair<std::size_t, std::size_t>> task_index_;  // task id -> (batch, task)
    TokenTable tokens_;
    std::shared_ptr<JudgmentStore> store_;
    std::string cors_origin_;
    std::unique_ptr<httplib::Server> server_;
    std::jthread thread_;
};

}  // namespace crossling::annotate

#include "crossling/llmgate/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <map>
#include <random>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "crossling/common/error.hpp"
#include "crossling/common/parallel.hpp"
#include "crossling/common/rounding.hpp"
#include "crossling/common/text.hpp"

namespace crossling::llm {

using json = nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                       tm.tm_hour, tm.tm_min, tm.tm_sec);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path journal) : path_(std::move(journal)) {
    if (path_.empty()) return;
    if (std::filesystem::exists(path_)) {
        std::size_t line_no = 0;
        const std::string contents = read_file(path_);
        for (const auto& line : split_lines(contents)) {
            ++line_no;
            if (trim(line).empty()) continue;
            const auto j = json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                // a torn final write is tolerated; anything else is corruption
                spdlog::warn("cache {}: skipping unparseable line {}", path_.string(), line_no);
                continue;
            }
            auto rec = record_from_json(j);
            index_[rec.request.cache_key()] = std::move(rec);
        }
    } else if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    out_.open(path_, std::ios::app | std::ios::binary);
    if (!out_) throw Error(ErrorKind::IoError, "cannot open cache journal " + path_.string());
}

std::optional<GenerationRecord> ResponseCache::get(const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::put(const GenerationRecord& record) {
    std::lock_guard lock(mutex_);
    auto stored = record;
    stored.from_cache = false;
    if (out_.is_open()) {
        out_ << to_json(stored).dump() << '\n';
        out_.flush();
    }
    index_[stored.request.cache_key()] = std::move(stored);
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mutex_);
    return index_.size();
}

RetryPolicy RetryPolicy::immediate(std::size_t retries) {
    RetryPolicy p;
    p.backoff.assign(retries, std::chrono::milliseconds(0));
    p.jitter = 0.0;
    p.sleep = [](std::chrono::milliseconds) {};
    return p;
}

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_s_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, burst)),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (rate_per_s_ <= 0.0) return;
    std::unique_lock lock(mutex_);
    for (;;) {
        const auto now = std::chrono::steady_clock::now();
        tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_per_s_);
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_s_);
        lock.unlock();
        std::this_thread::sleep_for(wait);
        lock.lock();
    }
}

Gateway::Gateway(std::shared_ptr<ChatProvider> provider, std::shared_ptr<ResponseCache> cache, GatewayConfig config)
    : provider_(std::move(provider)),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      config_(std::move(config)),
      limiter_(config_.requests_per_minute) {
    if (!config_.retry.sleep) config_.retry.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    for (auto& p : config_.refusal_phrases) p = lower(p);
}

bool Gateway::looks_refused(const std::string& text) const {
    if (config_.refusal_phrases.empty()) return false;
    const auto t = lower(text);
    return std::any_of(config_.refusal_phrases.begin(), config_.refusal_phrases.end(),
                       [&](const std::string& p) { return !p.empty() && t.find(p) != std::string::npos; });
}

GenerationRecord Gateway::complete(const CompletionRequest& request) {
    if (!(request.temperature >= 0.0 && request.temperature <= 1.0)) {
        throw Error(ErrorKind::InvalidRequest, fmt::format("temperature {} outside [0, 1]", request.temperature));
    }
    if (request.model.empty()) throw Error(ErrorKind::InvalidRequest, "model is empty");

    const auto key = request.cache_key();
    if (auto hit = cache_->get(key)) {
        hit->request.language = request.language;
        hit->from_cache = true;
        return *hit;
    }
    if (!provider_) throw Error(ErrorKind::ProviderUnavailable, "no provider configured and request not cached");

    thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
    const std::size_t attempts = config_.retry.backoff.size() + 1;
    for (std::size_t attempt = 0;; ++attempt) {
        {
            std::lock_guard lock(budget_mutex_);
            if (config_.max_calls != 0 && calls_ >= config_.max_calls) {
                throw Error(ErrorKind::BudgetExceeded, fmt::format("provider-call budget of {} spent", config_.max_calls));
            }
            ++calls_;
        }
        limiter_.acquire();
        const auto started = std::chrono::steady_clock::now();
        try {
            const auto reply = provider_->chat(request);
            GenerationRecord rec;
            rec.request = request;
            rec.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
            rec.created_at = utc_now();
            if (reply.refused) {
                rec.filtered = true;
                rec.refusal_reason = reply.refusal_reason.empty() ? "provider refusal" : reply.refusal_reason;
            } else if (looks_refused(reply.text)) {
                rec.filtered = true;
                rec.refusal_reason = "refusal phrase";
            } else {
                rec.text = reply.text;
            }
            cache_->put(rec);
            return rec;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ProviderUnavailable) throw;
            if (attempt + 1 >= attempts) {
                throw Error(ErrorKind::ProviderUnavailable,
                            fmt::format("giving up after {} attempts: {}", attempts, e.what()));
            }
            auto wait = config_.retry.backoff[attempt];
            if (config_.retry.jitter > 0.0) {
                std::uniform_real_distribution<double> factor(1.0 - config_.retry.jitter, 1.0 + config_.retry.jitter);
                wait = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(wait.count()) * factor(jitter_rng)));
            }
            spdlog::warn("provider unavailable (attempt {}/{}), retrying in {} ms", attempt + 1, attempts, wait.count());
            config_.retry.sleep(wait);
        }
    }
}

std::vector<GenerationRecord> Gateway::generate_samples(const CompletionRequest& base, std::size_t k,
                                                        std::size_t workers) {
    if (k < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 samples");
    std::vector<GenerationRecord> out(k);
    parallel_for_index(k, workers, [&](std::size_t i) {
        auto req = base;
        req.sample_index = i;
        out[i] = complete(req);
    });
    return out;
}

std::size_t Gateway::provider_calls() const {
    std::lock_guard lock(budget_mutex_);
    return calls_;
}

std::vector<FilterRateRow> filtering_rate(const std::vector<GenerationRecord>& records) {
    if (records.empty()) throw Error(ErrorKind::EmptyInput, "no generation records");
    std::map<std::tuple<std::string, std::string, double>, FilterRateRow> groups;
    for (const auto& r : records) {
        auto& row = groups[{r.request.model, r.request.language, r.request.temperature}];
        row.model = r.request.model;
        row.language = r.request.language;
        row.temperature = r.request.temperature;
        ++row.total;
        if (r.filtered) ++row.filtered;
    }
    std::vector<FilterRateRow> out;
    out.reserve(groups.size());
    for (auto& [_, row] : groups) {
        row.percent = round_half_away(100.0 * static_cast<double>(row.filtered) / static_cast<double>(row.total), 1);
        out.push_back(row);
    }
    return out;
}

}  // namespace crossling::llm

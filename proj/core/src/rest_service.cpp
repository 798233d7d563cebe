#include "llm4cap/rest/service.hpp"

#include "llm4cap/config/config.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <fstream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace llm4cap::rest {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

enum class JobState { Queued, Running, Done, Failed };

const char* to_string(JobState state) {
    switch (state) {
    case JobState::Queued: return "Queued";
    case JobState::Running: return "Running";
    case JobState::Done: return "Done";
    case JobState::Failed: return "Failed";
    }
    return "Failed";
}

std::string now_iso8601_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
    std::tm utc{};
    gmtime_r(&seconds, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

struct JobOverrides {
    std::optional<std::string> model;
    std::optional<int> maxRepeatPerStep;
};

struct Job {
    std::string id;
    JobState state = JobState::Queued;
    std::string description;
    JobOverrides overrides;
    std::string createdAt;
    std::string finishedAt;
    Clock::time_point finishedTick{};
    std::optional<pipeline::PipelineResult> result;
    std::string error;
};

void send_json(httplib::Response& res, int status, json body) {
    body["schemaVersion"] = 1;
    res.status = status;
    res.set_content(body.dump(2), "application/json");
}

} // namespace

ServiceConfig load_service_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw pipeline::ConfigError("cannot read config file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw pipeline::ConfigError(path.string() + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("pipeline")) {
        throw pipeline::ConfigError(path.string() +
                                    " must be an object with a \"pipeline\" section");
    }

    ServiceConfig config;
    config.pipeline =
        config::pipeline_config_from_json_text(doc["pipeline"].dump(), path.parent_path());
    for (const auto& [key, value] : doc.items()) {
        if (key == "pipeline") continue;
        if (key == "bindAddress") config.bindAddress = value.get<std::string>();
        else if (key == "port") config.port = value.get<int>();
        else if (key == "workerCount") config.workerCount = value.get<int>();
        else if (key == "queueCapacity") config.queueCapacity = value.get<int>();
        else if (key == "jobTtlSeconds") config.jobTtlSeconds = value.get<int>();
        else if (key == "maxRepeatPerStepLimit") config.maxRepeatPerStepLimit = value.get<int>();
        else if (key == "allowedModels") {
            config.allowedModels = value.get<std::vector<std::string>>();
        } else {
            throw pipeline::ConfigError("unknown config key \"" + key + "\" in " + path.string());
        }
    }
    if (config.workerCount < 1) {
        throw pipeline::ConfigError("workerCount must be at least 1");
    }
    if (config.queueCapacity < 1) {
        throw pipeline::ConfigError("queueCapacity must be at least 1");
    }
    return config;
}

struct RestService::Impl {
    ServiceConfig config;
    httplib::Server server;
    std::thread listenThread;
    std::vector<std::thread> workers;
    int boundPort = 0;
    // wait() and stop() may run on different threads; a thread may only be
    // joined once, so the join is funneled through this lock.
    std::mutex joinMutex;

    void join_listener() {
        std::lock_guard lock(joinMutex);
        if (listenThread.joinable()) listenThread.join();
    }

    std::mutex mutex;
    std::condition_variable queueCv;
    std::deque<std::string> queue; // job ids waiting for a worker
    std::unordered_map<std::string, Job> jobs;
    bool shuttingDown = false;

    std::mt19937_64 rng{std::random_device{}()};

    std::string fresh_job_id() {
        // UUIDv4 layout from two 64-bit draws.
        const std::uint64_t hi = rng();
        const std::uint64_t lo = rng();
        char buffer[37];
        std::snprintf(buffer, sizeof(buffer), "%08x-%04x-4%03x-%04x-%012llx",
                      static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xffff),
                      static_cast<unsigned>(hi & 0x0fff),
                      static_cast<unsigned>(((lo >> 48) & 0x3fff) | 0x8000),
                      static_cast<unsigned long long>(lo & 0xffffffffffffULL));
        return buffer;
    }

    void evict_expired_locked() {
        const auto now = Clock::now();
        for (auto it = jobs.begin(); it != jobs.end();) {
            const bool finished = it->second.state == JobState::Done ||
                                  it->second.state == JobState::Failed;
            if (finished && now - it->second.finishedTick >
                                std::chrono::seconds(config.jobTtlSeconds)) {
                it = jobs.erase(it);
            } else {
                ++it;
            }
        }
    }

    void handle_post(const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception&) {
            send_json(res, 400, {{"error", "request body is not valid JSON"}});
            return;
        }
        if (!body.is_object() || !body.contains("description") ||
            !body["description"].is_string()) {
            send_json(res, 400, {{"error", "body needs a string \"description\" field"}});
            return;
        }
        const std::string description = body["description"].get<std::string>();
        if (description.find_first_not_of(" \t\r\n") == std::string::npos) {
            send_json(res, 400, {{"error", "description must not be empty"}});
            return;
        }

        JobOverrides overrides;
        if (body.contains("options")) {
            const json& options = body["options"];
            if (!options.is_object()) {
                send_json(res, 400, {{"error", "\"options\" must be an object"}});
                return;
            }
            if (options.contains("model")) {
                if (!options["model"].is_string()) {
                    send_json(res, 400, {{"error", "options.model must be a string"}});
                    return;
                }
                const std::string model = options["model"].get<std::string>();
                const bool allowed =
                    model == config.pipeline.provider.model ||
                    std::find(config.allowedModels.begin(), config.allowedModels.end(), model) !=
                        config.allowedModels.end();
                if (!allowed) {
                    send_json(res, 400,
                              {{"error", "model \"" + model + "\" is not allowed here"}});
                    return;
                }
                overrides.model = model;
            }
            if (options.contains("maxRepeatPerStep")) {
                if (!options["maxRepeatPerStep"].is_number_integer()) {
                    send_json(res, 400,
                              {{"error", "options.maxRepeatPerStep must be an integer"}});
                    return;
                }
                const int value = options["maxRepeatPerStep"].get<int>();
                if (value < 0 || value > config.maxRepeatPerStepLimit) {
                    send_json(res, 400,
                              {{"error", "options.maxRepeatPerStep must be between 0 and " +
                                             std::to_string(config.maxRepeatPerStepLimit)}});
                    return;
                }
                overrides.maxRepeatPerStep = value;
            }
        }

        std::string id;
        {
            std::lock_guard lock(mutex);
            evict_expired_locked();
            if (static_cast<int>(queue.size()) >= config.queueCapacity) {
                send_json(res, 503, {{"error", "job queue is full, retry later"}});
                return;
            }
            id = fresh_job_id();
            Job job;
            job.id = id;
            job.description = description;
            job.overrides = overrides;
            job.createdAt = now_iso8601_utc();
            jobs.emplace(id, std::move(job));
            queue.push_back(id);
        }
        queueCv.notify_one();
        send_json(res, 202, {{"jobId", id}, {"statusUrl", "/capabilities/" + id}});
    }

    void handle_get(const std::string& id, httplib::Response& res) {
        std::lock_guard lock(mutex);
        evict_expired_locked();
        const auto it = jobs.find(id);
        if (it == jobs.end()) {
            send_json(res, 404, {{"error", "unknown job id"}});
            return;
        }
        const Job& job = it->second;
        json body{{"jobId", job.id},
                  {"state", to_string(job.state)},
                  {"createdAt", job.createdAt}};
        if (!job.finishedAt.empty()) body["finishedAt"] = job.finishedAt;
        if (job.state == JobState::Done) {
            const pipeline::PipelineResult& result = *job.result;
            body["result"] = {{"finalStatus", pipeline::to_string(result.status)},
                              {"ontology", result.ontologyText},
                              {"report", result.report},
                              {"trace", json::parse(pipeline::trace_to_json(result.trace))}};
        } else if (job.state == JobState::Failed) {
            body["error"] = job.error;
        }
        send_json(res, 200, std::move(body));
    }

    void worker_loop() {
        for (;;) {
            std::string id;
            {
                std::unique_lock lock(mutex);
                queueCv.wait(lock, [this] { return shuttingDown || !queue.empty(); });
                if (shuttingDown) return;
                id = queue.front();
                queue.pop_front();
                auto it = jobs.find(id);
                if (it == jobs.end()) continue;
                it->second.state = JobState::Running;
            }

            pipeline::PipelineConfig jobConfig;
            std::string description;
            {
                std::lock_guard lock(mutex);
                const Job& job = jobs.at(id);
                jobConfig = config.pipeline;
                if (job.overrides.model) jobConfig.provider.model = *job.overrides.model;
                if (job.overrides.maxRepeatPerStep) {
                    jobConfig.maxRepeatPerStep = *job.overrides.maxRepeatPerStep;
                }
                description = job.description;
            }

            std::optional<pipeline::PipelineResult> result;
            std::string error;
            try {
                pipeline::Pipeline pipe(std::move(jobConfig));
                result = pipe.run(description);
            } catch (const std::exception& e) {
                error = e.what();
            }

            std::lock_guard lock(mutex);
            auto it = jobs.find(id);
            if (it == jobs.end()) continue;
            Job& job = it->second;
            job.finishedAt = now_iso8601_utc();
            job.finishedTick = Clock::now();
            if (result) {
                job.state = JobState::Done;
                job.result = std::move(result);
            } else {
                job.state = JobState::Failed;
                job.error = error;
            }
        }
    }
};

RestService::RestService(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
    impl_->config = std::move(config);
    if (impl_->config.workerCount < 1) {
        throw pipeline::ConfigError("workerCount must be at least 1");
    }
    if (impl_->config.queueCapacity < 1) {
        throw pipeline::ConfigError("queueCapacity must be at least 1");
    }
    // Configuration problems (missing template, bad shapes, ...) should fail
    // service startup, not the first job.
    pipeline::Pipeline probe(impl_->config.pipeline);

    impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}});
    });
    impl_->server.Post("/capabilities",
                       [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
                           impl->handle_post(req, res);
                       });
    impl_->server.Get("/capabilities/([0-9a-fA-F-]+)",
                      [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
                          impl->handle_get(req.matches[1], res);
                      });
}

RestService::~RestService() { stop(); }

int RestService::start() {
    if (impl_->config.port == 0) {
        impl_->boundPort = impl_->server.bind_to_any_port(impl_->config.bindAddress);
    } else {
        if (!impl_->server.bind_to_port(impl_->config.bindAddress, impl_->config.port)) {
            throw pipeline::ConfigError("cannot bind " + impl_->config.bindAddress + ":" +
                                        std::to_string(impl_->config.port));
        }
        impl_->boundPort = impl_->config.port;
    }
    if (impl_->boundPort <= 0) {
        throw pipeline::ConfigError("cannot bind " + impl_->config.bindAddress);
    }
    impl_->listenThread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    for (int i = 0; i < impl_->config.workerCount; ++i) {
        impl_->workers.emplace_back([this] { impl_->worker_loop(); });
    }
    return impl_->boundPort;
}

void RestService::wait() { impl_->join_listener(); }

void RestService::stop() {
    {
        std::lock_guard lock(impl_->mutex);
        if (impl_->shuttingDown) return;
        impl_->shuttingDown = true;
    }
    impl_->queueCv.notify_all();
    impl_->server.stop();
    for (auto& worker : impl_->workers) {
        if (worker.joinable()) worker.join();
    }
    impl_->join_listener();
}

int RestService::port() const { return impl_->boundPort; }

} // namespace llm4cap::rest

#pragma once

#include "llm4cap/pipeline/pipeline.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace llm4cap::rest {

struct ServiceConfig {
    pipeline::PipelineConfig pipeline;
    std::string bindAddress = "127.0.0.1";
    int port = 0; // 0 picks an ephemeral port
    int workerCount = 2;
    int queueCapacity = 16;
    int jobTtlSeconds = 3600;       // finished jobs evicted after this age
    int maxRepeatPerStepLimit = 3;  // cap for per-request maxRepeatPerStep overrides
    /// Models a request may select; empty means only the configured model.
    std::vector<std::string> allowedModels;
};

/// Reads a JSON file: {"pipeline": {...}, "bindAddress", "port", "workerCount",
/// "queueCapacity", "jobTtlSeconds", "maxRepeatPerStepLimit", "allowedModels"}.
ServiceConfig load_service_config_file(const std::filesystem::path& path);

/// Async job front end over the pipeline:
///   POST /capabilities        -> 202 {jobId, statusUrl} | 400 | 503
///   GET  /capabilities/{id}   -> 200 job record | 404
///   GET  /healthz             -> 200
/// Handlers never run the pipeline themselves; a bounded worker pool does.
class RestService {
public:
    explicit RestService(ServiceConfig config);
    ~RestService();

    RestService(const RestService&) = delete;
    RestService& operator=(const RestService&) = delete;

    /// Binds and serves on background threads; returns the bound port.
    int start();
    /// Blocks until stop() is called (for the server binary).
    void wait();
    void stop();

    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace llm4cap::rest

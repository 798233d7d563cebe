#include "llm4cap/rest/service.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

namespace {

// Signal handlers may only touch lock-free state; the main thread polls this
// flag and performs the actual shutdown (stop() takes locks and joins).
volatile std::sig_atomic_t g_stopRequested = 0;

void handle_signal(int) { g_stopRequested = 1; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"HTTP front end for capability-ontology generation"};

    std::string configFile;
    std::string bindAddress;
    int port = -1;
    app.add_option("--config", configFile, "JSON service config file")->required();
    app.add_option("--bind", bindAddress, "Bind address (overrides config)");
    app.add_option("--port", port, "Port (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        auto config = llm4cap::rest::load_service_config_file(configFile);
        if (!bindAddress.empty()) config.bindAddress = bindAddress;
        if (port >= 0) config.port = port;

        llm4cap::rest::RestService service(std::move(config));
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);

        const int boundPort = service.start();
        std::cerr << "listening on " << boundPort << "\n";
        while (g_stopRequested == 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        std::cerr << "shutting down\n";
        service.stop();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

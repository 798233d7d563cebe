// Micro-benchmarks for the verification hot paths plus one end-to-end run of
// the generate-and-verify loop against a recorded model session (~200-triple
// capability ontology), so transport cost is excluded.

#include "llm4cap/llm/client.hpp"
#include "llm4cap/pipeline/pipeline.hpp"
#include "llm4cap/rdf/turtle.hpp"
#include "llm4cap/reason/reasoner.hpp"
#include "llm4cap/shacl/validator.hpp"

#include <benchmark/benchmark.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace llm4cap;

namespace {

const fs::path kData{LLM4CAP_DATA_DIR};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// The ontology text the recorded happy-path session replies with.
const std::string& happy_ontology() {
    static const std::string text = [] {
        const auto doc = nlohmann::json::parse(slurp(kData / "replay/happy-path.json"));
        llm::LlmResponse response;
        response.content = doc["turns"][0]["response"].get<std::string>();
        return llm::extract_turtle(response).text;
    }();
    return text;
}

const rdf::Graph& ontology_graph() {
    static const rdf::Graph g = *rdf::parse_turtle(happy_ontology()).graph;
    return g;
}

const rdf::Graph& schema_graph() {
    static const rdf::Graph g =
        *rdf::parse_turtle(slurp(kData / "prompt-template/context.ttl")).graph;
    return g;
}

const shacl::ShapesGraph& capability_shapes() {
    static const shacl::ShapesGraph shapes = shacl::parse_shapes(
        *rdf::parse_turtle(slurp(kData / "shapes/capability-shapes.ttl")).graph);
    return shapes;
}

void BM_ParseTurtle(benchmark::State& state) {
    const std::string& text = happy_ontology();
    for (auto _ : state) {
        auto result = rdf::parse_turtle(text);
        benchmark::DoNotOptimize(result.graph->size());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(ontology_graph().size()));
}
BENCHMARK(BM_ParseTurtle);

void BM_SerializeTurtle(benchmark::State& state) {
    const rdf::Graph& graph = ontology_graph();
    for (auto _ : state) {
        std::string out = rdf::serialize_turtle(graph);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(graph.size()));
}
BENCHMARK(BM_SerializeTurtle);

void BM_ReasonerClosure(benchmark::State& state) {
    for (auto _ : state) {
        rdf::Graph closed = reason::compute_closure(ontology_graph(), schema_graph());
        benchmark::DoNotOptimize(closed.size());
    }
}
BENCHMARK(BM_ReasonerClosure);

void BM_ConsistencyCheck(benchmark::State& state) {
    for (auto _ : state) {
        auto verdict = reason::check_consistency(ontology_graph(), schema_graph());
        benchmark::DoNotOptimize(verdict.consistent);
    }
}
BENCHMARK(BM_ConsistencyCheck);

void BM_ShaclValidate(benchmark::State& state) {
    for (auto _ : state) {
        auto report = shacl::validate(ontology_graph(), schema_graph(), capability_shapes());
        benchmark::DoNotOptimize(report.conforms);
    }
}
BENCHMARK(BM_ShaclValidate);

void BM_PipelineHappyPath(benchmark::State& state) {
    pipeline::PipelineConfig config;
    config.templateDir = kData / "prompt-template";
    config.schemaFile = kData / "prompt-template/context.ttl";
    config.shapesFile = kData / "shapes/capability-shapes.ttl";
    config.maxRepeatPerStep = 1;
    config.provider.kind = llm::ProviderKind::Replay;
    config.provider.model = "replay-model";
    config.provider.replaySessionPath = (kData / "replay/happy-path.json").string();

    for (auto _ : state) {
        pipeline::Pipeline pipe(config);
        auto result = pipe.run("Produce bottled coffee soda on the beverage line.");
        if (result.status != pipeline::PipelineStatus::Verified) {
            state.SkipWithError("pipeline run did not verify");
            break;
        }
        benchmark::DoNotOptimize(result.ontologyText.data());
    }
}
BENCHMARK(BM_PipelineHappyPath)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();

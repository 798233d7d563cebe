#include "llm4cap/prompt/prompt.hpp"

#include "llm4cap/rdf/turtle.hpp"
#include "llm4cap/util/sha256.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace llm4cap::prompt {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string trimmed(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void require_turtle(const std::string& text, const fs::path& origin) {
    auto r = rdf::parse_turtle(text);
    if (!r.ok()) {
        throw ConfigError("Turtle in " + origin.string() + " does not parse:\n" +
                          rdf::render_diagnostics(r.diagnostics));
    }
}

void reject_placeholder(const std::string& text, const std::string& marker,
                        const fs::path& origin) {
    if (text.find(marker) != std::string::npos) {
        throw ConfigError(origin.string() + " contains the reserved placeholder marker " + marker);
    }
}

} // namespace

PromptTemplate load_template(const fs::path& dir) {
    PromptTemplate t;
    const auto instruction_path = dir / "instruction.txt";
    const auto context_path = dir / "context.ttl";
    t.instruction = read_file(instruction_path);
    if (trimmed(t.instruction).empty()) {
        throw ConfigError("instruction in " + instruction_path.string() + " is empty");
    }
    t.contextOntology = read_file(context_path);
    require_turtle(t.contextOntology, context_path);

    const auto examples_dir = dir / "examples";
    std::vector<fs::path> subdirs;
    if (fs::is_directory(examples_dir)) {
        for (const auto& entry : fs::directory_iterator(examples_dir)) {
            if (entry.is_directory()) subdirs.push_back(entry.path());
        }
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& sub : subdirs) {
        ExamplePair pair;
        const auto desc_path = sub / "description.txt";
        const auto onto_path = sub / "ontology.ttl";
        pair.description = read_file(desc_path);
        if (trimmed(pair.description).empty()) {
            throw ConfigError("example description in " + desc_path.string() + " is empty");
        }
        pair.ontology = read_file(onto_path);
        require_turtle(pair.ontology, onto_path);
        t.examples.push_back(std::move(pair));
    }
    if (t.examples.empty()) {
        throw ConfigError("no examples found under " + examples_dir.string());
    }

    reject_placeholder(t.instruction, t.taskPlaceholder, instruction_path);
    reject_placeholder(t.contextOntology, t.taskPlaceholder, context_path);
    for (std::size_t i = 0; i < t.examples.size(); ++i) {
        reject_placeholder(t.examples[i].description, t.taskPlaceholder, subdirs[i]);
        reject_placeholder(t.examples[i].ontology, t.taskPlaceholder, subdirs[i]);
    }
    return t;
}

PromptBundle build_prompt(const PromptTemplate& t, const std::string& taskDescription) {
    const std::string task = trimmed(taskDescription);
    if (task.empty()) throw InputError("task description is empty");

    std::ostringstream text;
    text << trimmed(t.instruction) << "\n\n";
    text << "## Context ontology\n\n```turtle\n" << trimmed(t.contextOntology) << "\n```\n\n";
    for (std::size_t i = 0; i < t.examples.size(); ++i) {
        const auto& e = t.examples[i];
        text << "## Example " << (i + 1) << "\n\nDescription:\n" << trimmed(e.description)
             << "\n\nOntology:\n```turtle\n" << trimmed(e.ontology) << "\n```\n\n";
    }
    text << "## Task\n\n" << t.taskPlaceholder << "\n";

    std::string skeleton = text.str();
    auto at = skeleton.rfind(t.taskPlaceholder);
    skeleton.replace(at, t.taskPlaceholder.size(), task);

    PromptBundle bundle;
    bundle.renderedText = std::move(skeleton);
    bundle.tokenEstimate = static_cast<int>(bundle.renderedText.size() / 4);
    bundle.sectionsDigest.push_back(util::sha256_hex(t.instruction));
    bundle.sectionsDigest.push_back(util::sha256_hex(t.contextOntology));
    for (const auto& e : t.examples) {
        bundle.sectionsDigest.push_back(util::sha256_hex(e.description + "\n" + e.ontology));
    }
    bundle.sectionsDigest.push_back(util::sha256_hex(task));
    return bundle;
}

PromptBundle build_backprompt(const PromptBundle& previous, const std::string& failedOntology,
                              const std::string& stepName, const std::string& diagnosticsText) {
    if (trimmed(diagnosticsText).empty()) throw InputError("diagnostics text is empty");

    std::ostringstream text;
    text << "The generated ontology failed the " << stepName << " verification step.\n\n"
         << "Rejected ontology:\n```turtle\n" << failedOntology << "\n```\n\n"
         << "Diagnostics:\n" << diagnosticsText << "\n\n"
         << "Fix every reported problem and return the full corrected ontology as Turtle, "
            "nothing else.\n";

    PromptBundle bundle;
    bundle.renderedText = text.str();
    bundle.tokenEstimate = static_cast<int>(bundle.renderedText.size() / 4);
    if (!previous.sectionsDigest.empty()) {
        bundle.sectionsDigest.push_back(util::sha256_hex(previous.renderedText));
    }
    bundle.sectionsDigest.push_back(util::sha256_hex(stepName));
    bundle.sectionsDigest.push_back(util::sha256_hex(failedOntology));
    bundle.sectionsDigest.push_back(util::sha256_hex(diagnosticsText));
    return bundle;
}

} // namespace llm4cap::prompt

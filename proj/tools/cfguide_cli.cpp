// cfguide command line: generate | guide | serve | analyze.
// JSON goes to stdout, diagnostics to stderr. Exit codes: 0 ok, 1 user error,
// 2 internal error.

#include "cfguide/causal_synth.hpp"
#include "cfguide/errors.hpp"
#include "cfguide/guidance.hpp"
#include "cfguide/http_api.hpp"
#include "cfguide/json_io.hpp"
#include "cfguide/kernels.hpp"
#include "cfguide/session_service.hpp"
#include "cfguide/study_metrics.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cfguide;

namespace {

constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;
constexpr const char* kDataDirEnv = "CFGUIDE_DATA_DIR";

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + p.string() + "'");
    out << content;
}

double parse_number(std::string_view text, std::string_view whole) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw ValidationError("bad filter '" + std::string(whole) + "': '" + std::string(text) +
                              "' is not a number");
    return v;
}

// var=lo:hi; the variable name may itself contain '='.
FilterClause parse_filter(std::string_view text) {
    const auto eq = text.rfind('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ValidationError("bad filter '" + std::string(text) + "': expected var=lo:hi");
    const auto bounds = text.substr(eq + 1);
    // Skip a leading sign so "-1:2" splits at the right colon.
    const auto colon = bounds.find(':', 1);
    if (colon == std::string_view::npos)
        throw ValidationError("bad filter '" + std::string(text) + "': expected var=lo:hi");
    return {std::string(text.substr(0, eq)),
            {parse_number(bounds.substr(0, colon), text), parse_number(bounds.substr(colon + 1), text)}};
}

MatchingSpaceMode parse_matching(const std::string& s) {
    if (s == "complement") return MatchingSpaceMode::complement;
    if (s == "all") return MatchingSpaceMode::all_dimensions;
    throw ValidationError("--matching must be complement or all");
}

DissimilaritySpaceMode parse_space(const std::string& s) {
    if (s == "selected") return DissimilaritySpaceMode::selected;
    if (s == "all") return DissimilaritySpaceMode::all_dimensions;
    throw ValidationError("--space must be selected or all");
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string spec;
    std::size_t n = 1000;
    std::string out;
    std::optional<std::uint64_t> seed;
};

int cmd_generate(const GenerateArgs& a) {
    CausalGraphSpec spec = a.spec.empty() ? default_study_spec()
                                          : CausalGraphSpec::from_json(read_file(a.spec));
    if (a.seed) spec.seed = *a.seed;
    const auto data = generate(spec, a.n);

    const fs::path out(a.out);
    const fs::path stem = out.parent_path() / out.stem();
    write_file(out, to_csv(data.dataset));
    write_file(stem.string() + ".truth.json", data.truth.to_json());
    write_file(stem.string() + ".config.json", data.dataset.config().to_json());
    std::cout << dump({{"csv", out.string()},
                       {"truth", stem.string() + ".truth.json"},
                       {"config", stem.string() + ".config.json"},
                       {"rows", data.dataset.rows()},
                       {"columns", data.dataset.cols()}})
              << '\n';
    return 0;
}

struct GuideArgs {
    std::string csv;
    std::string config;
    std::string outcome;
    std::vector<std::string> filters;
    std::string mode = "cf";
    std::string matching = "complement";
    std::string space = "selected";
    int threads = 0;
};

int cmd_guide(const GuideArgs& a) {
    DatasetConfig cfg;
    if (!a.config.empty()) cfg = DatasetConfig::from_json(read_file(a.config));
    if (!a.outcome.empty()) cfg.outcome = a.outcome;
    if (cfg.outcome.empty()) throw ValidationError("an outcome is required (--config or --outcome)");
    if (a.threads > 0) kernels::set_thread_count(a.threads);

    const Dataset d = load_csv(read_file(a.csv), cfg);
    const NormalizedView view(d);
    FilterSet f;
    for (const auto& text : a.filters) f.add(parse_filter(text));

    GuidanceOptions opt;
    opt.matching = parse_matching(a.matching);
    opt.dissimilarity = parse_space(a.space);
    const GuidanceMode mode = parse_guidance_mode(a.mode);

    json out;
    if (!f.empty()) {
        out = to_json(guidance_report(view, f, mode, opt));
    } else if (mode == GuidanceMode::both) {
        out = {{"cf", to_json(rank_variables(view, f, GuidanceMode::cf, opt))},
               {"corr", to_json(rank_variables(view, f, GuidanceMode::corr, opt))}};
    } else {
        out = to_json(rank_variables(view, f, mode, opt));
    }
    std::cout << dump(out) << '\n';
    return 0;
}

struct AnalyzeArgs {
    std::string log;
    std::string truth;
    std::string answers;
};

int cmd_analyze(const AnalyzeArgs& a) {
    const auto events = parse_event_log(read_file(a.log));
    std::optional<GroundTruth> truth;
    if (!a.truth.empty()) truth = GroundTruth::from_json(read_file(a.truth));
    AnalysisReport rep =
        analyze_events(events, truth ? std::optional(truth->top_k) : std::nullopt);
    if (!a.answers.empty()) {
        if (!truth) throw ValidationError("--answers needs --truth");
        const json doc = json::parse(read_file(a.answers));
        rep.evaluation = evaluate_answers(doc.value("t1", std::vector<std::string>{}),
                                          doc.value("t2", std::vector<std::string>{}),
                                          truth->ranked_names());
    }
    std::cout << dump(to_json(rep)) << '\n';
    return 0;
}

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir;
    std::size_t row_cap = 5000;
    std::uint64_t sample_seed = 1;
};

httplib::Server* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const ServeArgs& a) {
    ServiceConfig cfg;
    cfg.data_dir = a.data_dir;
    cfg.row_cap = a.row_cap;
    cfg.sample_seed = a.sample_seed;
    SessionService service(cfg);

    httplib::Server server;
    register_routes(server, service);
    if (!server.bind_to_port(a.host, a.port)) {
        std::cerr << "error: cannot listen on " << a.host << ':' << a.port
                  << " (port in use or not permitted)\n";
        return kExitUser;
    }
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on http://" << a.host << ':' << a.port << " ("
              << service.dataset_ids().size() << " datasets, " << service.session_ids().size()
              << " sessions restored)\n";
    server.listen_after_bind();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual feature guidance toolkit"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Sample a synthetic dataset from a causal graph");
    g->add_option("--spec", gen.spec, "Causal graph JSON (default: built-in 14-factor study graph)")
        ->check(CLI::ExistingFile);
    g->add_option("-n,--rows", gen.n, "Number of rows")->check(CLI::PositiveNumber);
    g->add_option("-o,--out", gen.out, "Output CSV; .truth.json and .config.json land beside it")
        ->required();
    g->add_option("--seed", gen.seed, "Override the spec seed");

    GuideArgs guide;
    auto* gd = app.add_subcommand("guide", "Guidance report (with filters) or variable ranking");
    gd->add_option("--csv", guide.csv, "Dataset CSV")->required()->check(CLI::ExistingFile);
    gd->add_option("--config", guide.config, "Dataset config JSON")->check(CLI::ExistingFile);
    gd->add_option("--outcome", guide.outcome, "Outcome column (overrides the config)");
    gd->add_option("-f,--filter", guide.filters, "Filter var=lo:hi (repeatable)");
    gd->add_option("-m,--mode", guide.mode, "cf | corr | both");
    gd->add_option("--matching", guide.matching, "Matching space: complement | all");
    gd->add_option("--space", guide.space, "Dissimilarity space: selected | all");
    gd->add_option("--threads", guide.threads, "Worker threads (0: OpenMP default)");

    AnalyzeArgs an;
    auto* a = app.add_subcommand("analyze", "Behavior, tree and accuracy metrics for an event log");
    a->add_option("--log", an.log, "Interaction log (JSONL)")->required()->check(CLI::ExistingFile);
    a->add_option("--truth", an.truth, "Ground truth JSON")->check(CLI::ExistingFile);
    a->add_option("--answers", an.answers, "Answers JSON {t1: [...], t2: [...]}")
        ->check(CLI::ExistingFile);

    ServeArgs serve;
    if (const char* env = std::getenv(kDataDirEnv)) serve.data_dir = env;
    auto* s = app.add_subcommand("serve", "Run the HTTP session service");
    s->add_option("--host", serve.host, "Bind address");
    s->add_option("-p,--port", serve.port, "Port")->check(CLI::Range(1, 65535));
    s->add_option("--data-dir", serve.data_dir,
                  std::string("Persistence directory (default: $") + kDataDirEnv + ")");
    s->add_option("--row-cap", serve.row_cap, "Subsample datasets above this many rows (0: off)");
    s->add_option("--sample-seed", serve.sample_seed, "Seed for row subsampling");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUser;
    }

    try {
        if (*g) return cmd_generate(gen);
        if (*gd) return cmd_guide(guide);
        if (*a) return cmd_analyze(an);
        if (*s) return cmd_serve(serve);
    } catch (const ParseError& e) {
        std::cerr << "error [" << e.code() << "] row " << e.row() << ": " << e.what() << '\n';
        return kExitUser;
    } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << '\n';
        return http_status_for(e.code()) >= 500 ? kExitInternal : kExitUser;
    } catch (const json::exception& e) {
        std::cerr << "error [validation_error]: malformed JSON: " << e.what() << '\n';
        return kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}

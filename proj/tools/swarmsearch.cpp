// swarmsearch: command line front end for the pheromone search toolkit.

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "swarm/analytics.hpp"
#include "swarm/digest.hpp"
#include "swarm/error.hpp"
#include "swarm/examination.hpp"
#include "swarm/http.hpp"
#include "swarm/index.hpp"
#include "swarm/intent.hpp"
#include "swarm/querylog.hpp"
#include "swarm/service.hpp"
#include "swarm/simulation.hpp"
#include "swarm/text.hpp"

#ifndef SWARM_DATA_DIR
#define SWARM_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace swarm;

namespace {

constexpr const char* tool_version = "0.1.0";

// Records what a run read and wrote so it can be repeated.
class Manifest {
  public:
    Manifest(std::string command, int argc, char** argv) : command_(std::move(command)) {
        for (int i = 1; i < argc; ++i) args_.emplace_back(argv[i]);
    }

    void input(const fs::path& path) { inputs_.push_back(path); }
    void output(const fs::path& path) { outputs_.push_back(path); }
    void config(std::string text) { config_ = std::move(text); }
    void seed(std::uint64_t s) { seed_ = s; }

    void write(const fs::path& path) const {
        nlohmann::ordered_json j;
        j["tool"] = "swarmsearch";
        j["version"] = tool_version;
        j["command"] = command_;
        j["args"] = args_;
        if (seed_) j["seed"] = *seed_;
        if (!config_.empty()) j["config"] = config_;
        auto files = [](const std::vector<fs::path>& paths) {
            auto list = nlohmann::ordered_json::array();
            for (const auto& p : paths) {
                nlohmann::ordered_json f;
                f["path"] = p.string();
                f["sha256"] = fs::is_regular_file(p) ? sha256_file(p) : "";
                list.push_back(std::move(f));
            }
            return list;
        };
        j["inputs"] = files(inputs_);
        j["outputs"] = files(outputs_);
        std::ofstream out(path);
        if (!out) throw Error(Errc::io, "cannot write manifest " + path.string());
        out << j.dump(2) << '\n';
    }

  private:
    std::string command_;
    std::vector<std::string> args_;
    std::vector<fs::path> inputs_;
    std::vector<fs::path> outputs_;
    std::string config_;
    std::optional<std::uint64_t> seed_;
};

fs::path manifest_path_for(const fs::path& output) {
    return output.string() + ".manifest.json";
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot read " + path.string());
    return in;
}

ExaminationTable exam_table_from(const fs::path& path) {
    return path.empty() ? ExaminationTable::single_browsing_approximation()
                        : ExaminationTable::load(path);
}

struct LexiconFlags {
    std::vector<fs::path> names;
    fs::path suffixes;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--names", names, "Name list files (default: bundled sample)")->check(CLI::ExistingFile);
        cmd->add_option("--suffixes", suffixes, "Domain suffix file (default: bundled list)")->check(CLI::ExistingFile);
    }

    NameLexicon load(Manifest* manifest) const {
        auto name_files = names;
        if (name_files.empty()) name_files.push_back(fs::path(SWARM_DATA_DIR) / "lexicon" / "names_sample.txt");
        auto suffix_file = suffixes.empty() ? fs::path(SWARM_DATA_DIR) / "lexicon" / "suffixes.txt" : suffixes;
        if (manifest) {
            for (const auto& f : name_files) manifest->input(f);
            manifest->input(suffix_file);
        }
        return load_lexicon(name_files, suffix_file);
    }
};

std::vector<Session> load_sessions_or_log(const fs::path& sessions, const std::vector<fs::path>& logs,
                                          bool dedup, Manifest& manifest) {
    if (!sessions.empty()) {
        manifest.input(sessions);
        return read_sessions_file(sessions);
    }
    std::vector<Interaction> rows;
    for (const auto& log : logs) {
        manifest.input(log);
        auto part = read_log_file(log);
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    if (dedup) remove_consecutive_duplicates(rows);
    return sessionize(std::move(rows));
}

IntentLabeler labeler_for(NameLexicon lexicon) {
    return [lexicon = std::move(lexicon)](const std::string& q) { return classify(q, lexicon); };
}

std::vector<DocRef> synthetic_page(int size) {
    std::vector<DocRef> page;
    for (int r = 1; r <= size; ++r) {
        page.emplace_back("http://synthetic.example/doc-" + std::string(r < 10 ? "0" : "") + std::to_string(r));
    }
    return page;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pheromone-trail search: log processing, offline simulation and a live service"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    std::unique_ptr<Manifest> manifest;
    std::function<void()> action;

    // sessionize -------------------------------------------------------------
    auto* sessionize_cmd = app.add_subcommand("sessionize", "Group AOL log rows into sessions (JSON lines)");
    std::vector<fs::path> sz_in;
    fs::path sz_out;
    bool sz_dedup = false;
    Timestamp sz_gap = session_gap_seconds;
    sessionize_cmd->add_option("--in", sz_in, "AOL log files, plain or gzip")->required()->check(CLI::ExistingFile);
    sessionize_cmd->add_option("--out", sz_out, "Output sessions file")->required();
    sessionize_cmd->add_flag("--dedup", sz_dedup, "Drop rows identical to the previous row");
    sessionize_cmd->add_option("--gap", sz_gap, "Inactivity threshold in seconds")->check(CLI::PositiveNumber);
    sessionize_cmd->callback([&] {
        action = [&] {
            manifest = std::make_unique<Manifest>("sessionize", argc, argv);
            std::vector<Interaction> rows;
            std::size_t skipped = 0, removed = 0;
            for (const auto& path : sz_in) {
                manifest->input(path);
                LogReadStats stats;
                auto part = read_log_file(path, &stats);
                skipped += stats.skipped;
                rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
            }
            if (sz_dedup) removed = remove_consecutive_duplicates(rows);
            const auto n_rows = rows.size();
            auto sessions = sessionize(std::move(rows), sz_gap);
            auto out = open_out(sz_out);
            write_sessions(out, sessions);
            out.close();
            manifest->output(sz_out);
            manifest->write(manifest_path_for(sz_out));
            std::cerr << n_rows << " rows (" << skipped << " blank-query rows skipped, " << removed
                      << " duplicates removed) -> " << sessions.size() << " sessions\n";
        };
    });

    // filter -----------------------------------------------------------------
    auto* filter_cmd = app.add_subcommand("filter", "Keep sessions of frequent/easy/difficult queries");
    fs::path ft_in, ft_out;
    std::string ft_subset = "all";
    filter_cmd->add_option("--in", ft_in, "Sessions file")->required()->check(CLI::ExistingFile);
    filter_cmd->add_option("--out", ft_out, "Filtered sessions file")->required();
    filter_cmd->add_option("--subset", ft_subset, "frequent, easy, difficult or all")
        ->check(CLI::IsMember({"frequent", "easy", "difficult", "all"}));
    filter_cmd->callback([&] {
        action = [&] {
            manifest = std::make_unique<Manifest>("filter", argc, argv);
            manifest->input(ft_in);
            auto sessions = read_sessions_file(ft_in);
            const int days = span_days(sessions);
            auto subset = filter_dataset(sessions, days);
            const auto& keep = ft_subset == "frequent" ? subset.frequent
                               : ft_subset == "easy"   ? subset.easy
                               : ft_subset == "difficult" ? subset.difficult
                                                          : subset.all;
            std::vector<Session> kept;
            for (const auto& s : sessions) {
                if (keep.contains(QueryKey(s.query))) kept.push_back(s);
            }
            auto out = open_out(ft_out);
            write_sessions(out, kept);
            out.close();
            manifest->output(ft_out);
            manifest->write(manifest_path_for(ft_out));
            std::cerr << "span " << days << " days; queries: frequent " << subset.frequent.size() << ", easy "
                      << subset.easy.size() << ", difficult " << subset.difficult.size() << ", union "
                      << subset.all.size() << "; kept " << kept.size() << " of " << sessions.size()
                      << " sessions\n";
        };
    });

    // classify ---------------------------------------------------------------
    auto* classify_cmd = app.add_subcommand("classify", "Label queries navigational or non-navigational");
    classify_cmd->alias("classify-intent");
    fs::path cl_in, cl_out;
    LexiconFlags cl_lex;
    classify_cmd->add_option("--in", cl_in, "One query per line, or a sessions file (.jsonl)")
        ->required()
        ->check(CLI::ExistingFile);
    classify_cmd->add_option("--out", cl_out, "Output TSV (query, intent); stdout when omitted");
    cl_lex.add_to(classify_cmd);
    classify_cmd->callback([&] {
        action = [&] {
            Manifest m("classify", argc, argv);
            m.input(cl_in);
            auto lexicon = cl_lex.load(&m);
            std::vector<std::string> queries;
            if (cl_in.extension() == ".jsonl") {
                std::set<std::string> seen;
                for (const auto& s : read_sessions_file(cl_in)) {
                    if (seen.insert(s.query).second) queries.push_back(s.query);
                }
            } else {
                auto in = open_in(cl_in);
                std::string line;
                while (std::getline(in, line)) {
                    if (!normalize_query(line).empty()) queries.push_back(line);
                }
            }
            std::ofstream file;
            if (!cl_out.empty()) file = open_out(cl_out);
            std::ostream& out = cl_out.empty() ? std::cout : file;
            for (const auto& q : queries) out << normalize_query(q) << '\t' << to_string(classify(q, lexicon)) << '\n';
            if (!cl_out.empty()) {
                file.close();
                m.output(cl_out);
                m.write(manifest_path_for(cl_out));
            }
        };
    });

    // train ------------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Build a pheromone store from sessions");
    fs::path tr_sessions, tr_out, tr_exam;
    std::string tr_flavor = "naive", tr_key_mode = "exact", tr_until;
    double tr_delta = DecayConfig::one_day;
    train_cmd->add_option("--sessions", tr_sessions, "Sessions file")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out", tr_out, "Store snapshot (TSV)")->required();
    train_cmd->add_option("--flavor", tr_flavor, "naive, ranking_bias or elaborate");
    train_cmd->add_option("--delta", tr_delta, "Half-life in seconds")->check(CLI::PositiveNumber);
    train_cmd->add_option("--until", tr_until, "Only sessions starting before this date or epoch");
    train_cmd->add_option("--key-mode", tr_key_mode, "exact or ngram");
    train_cmd->add_option("--exam-table", tr_exam, "Examination table TSV")->check(CLI::ExistingFile);
    train_cmd->callback([&] {
        action = [&] {
            manifest = std::make_unique<Manifest>("train", argc, argv);
            manifest->input(tr_sessions);
            if (!tr_exam.empty()) manifest->input(tr_exam);
            auto sessions = read_sessions_file(tr_sessions);
            if (!tr_until.empty()) {
                auto split = tr_until.find('-') != std::string::npos ? parse_date(tr_until)
                                                                    : std::stoll(tr_until);
                sessions = partition(sessions, split).first;
            }
            const auto flavor = parse_flavor(tr_flavor);
            PheromoneStore store(flavor, DecayConfig{tr_delta, 1e-6});
            train(store, sessions, exam_table_from(tr_exam), parse_key_mode(tr_key_mode));
            auto out = open_out(tr_out);
            store.save(out);
            out.close();
            manifest->output(tr_out);
            manifest->write(manifest_path_for(tr_out));
            std::cerr << "trained " << to_string(flavor) << " on " << sessions.size() << " sessions: "
                      << store.size() << " trails\n";
        };
    });

    // simulate ---------------------------------------------------------------
    auto* simulate_cmd = app.add_subcommand("simulate", "Offline Monte Carlo evaluation of one or more runs");
    std::vector<fs::path> sm_configs, sm_logs;
    fs::path sm_sessions, sm_store, sm_exam, sm_out_dir = "runs";
    bool sm_preset = false, sm_serial = false, sm_dedup = false, sm_pages = false;
    std::optional<std::uint64_t> sm_seed;
    LexiconFlags sm_lex;
    simulate_cmd->add_option("--config", sm_configs, "Run configs (key=value)")->check(CLI::ExistingFile);
    simulate_cmd->add_flag("--preset", sm_preset, "Run the 24-run matrix");
    simulate_cmd->add_option("--sessions", sm_sessions, "Sessions file")->check(CLI::ExistingFile);
    simulate_cmd->add_option("--log", sm_logs, "AOL logs, sessionized on the fly")->check(CLI::ExistingFile);
    simulate_cmd->add_flag("--dedup", sm_dedup, "Drop consecutive duplicate rows of --log input");
    simulate_cmd->add_option("--store", sm_store, "Use this trained store instead of training")
        ->check(CLI::ExistingFile);
    simulate_cmd->add_option("--exam-table", sm_exam, "Examination table TSV")->check(CLI::ExistingFile);
    simulate_cmd->add_option("--out-dir", sm_out_dir, "Directory for reports, outcomes and manifests");
    simulate_cmd->add_option("--seed", sm_seed, "Override the seed of every run");
    simulate_cmd->add_flag("--serial", sm_serial, "Use the single-threaded reference loop");
    simulate_cmd->add_flag("--record-pages", sm_pages, "Keep injected pages in the outcomes");
    sm_lex.add_to(simulate_cmd);
    simulate_cmd->callback([&] {
        if (sm_sessions.empty() == sm_logs.empty()) throw CLI::ValidationError("give exactly one of --sessions or --log");
        if (sm_configs.empty() && !sm_preset) throw CLI::ValidationError("give --config or --preset");
        if (!sm_store.empty() && (sm_configs.size() != 1 || sm_preset)) {
            throw CLI::ValidationError("--store needs exactly one --config");
        }
        action = [&] {
            std::vector<std::pair<RunConfig, fs::path>> runs;
            for (const auto& path : sm_configs) runs.emplace_back(RunConfig::load(path), path);
            if (sm_preset) {
                for (auto& r : preset_run_matrix(sm_seed.value_or(1))) runs.emplace_back(std::move(r), fs::path());
            }
            if (sm_seed) {
                for (auto& r : runs) r.first.seed = *sm_seed;
            }
            Manifest inputs("simulate", argc, argv);
            auto sessions = load_sessions_or_log(sm_sessions, sm_logs, sm_dedup, inputs);
            auto lexicon = sm_lex.load(&inputs);
            const auto table = exam_table_from(sm_exam);
            fs::create_directories(sm_out_dir);

            for (const auto& [run, config_path] : runs) {
                Manifest m = inputs;
                if (!config_path.empty()) m.input(config_path);
                if (!sm_exam.empty()) m.input(sm_exam);
                m.config(run.to_text());
                m.seed(run.seed);

                auto [train_set, test_set] = partition(sessions, run.split);
                PheromoneStore store(run.flavor, run.decay());
                if (!sm_store.empty()) {
                    m.input(sm_store);
                    auto in = open_in(sm_store);
                    store = PheromoneStore::load(in, run.flavor, run.decay());
                } else {
                    train(store, train_set, table, run.key_mode);
                }
                SimulationOptions options{sm_pages};
                auto outcomes = sm_serial ? run_monte_carlo_serial(store, test_set, run, options)
                                          : run_monte_carlo(store, test_set, run, options);

                const auto base = sm_out_dir / run.name;
                const fs::path report_path = base.string() + ".report.tsv";
                const fs::path outcomes_path = base.string() + ".outcomes.jsonl";
                {
                    auto out = open_out(outcomes_path);
                    write_outcomes(out, outcomes);
                }
                if (outcomes.empty()) {
                    std::cerr << run.name << ": no scorable test sessions\n";
                    auto out = open_out(report_path);
                    write_report(out, Report{});
                } else {
                    auto report = summarize({{run.flavor, outcomes}}, labeler_for(lexicon));
                    auto out = open_out(report_path);
                    write_report(out, report);
                }
                m.output(report_path);
                m.output(outcomes_path);
                m.write(base.string() + ".manifest.json");
                std::cerr << run.name << ": trained on " << train_set.size() << " sessions, scored "
                          << outcomes.size() << " -> " << report_path.string() << '\n';
            }
        };
    });

    // report -----------------------------------------------------------------
    auto* report_cmd = app.add_subcommand("report", "Combine per-flavor outcomes into the nine report tables");
    fs::path rp_naive, rp_rb, rp_elab, rp_out;
    LexiconFlags rp_lex;
    report_cmd->add_option("--naive", rp_naive, "Outcomes of the naive run")->check(CLI::ExistingFile);
    report_cmd->add_option("--ranking-bias", rp_rb, "Outcomes of the ranking-bias run")->check(CLI::ExistingFile);
    report_cmd->add_option("--elaborate", rp_elab, "Outcomes of the elaborate run")->check(CLI::ExistingFile);
    report_cmd->add_option("--out", rp_out, "Report TSV; stdout when omitted");
    rp_lex.add_to(report_cmd);
    report_cmd->callback([&] {
        if (rp_naive.empty() && rp_rb.empty() && rp_elab.empty()) {
            throw CLI::ValidationError("give at least one outcomes file");
        }
        action = [&] {
            Manifest m("report", argc, argv);
            std::map<Flavor, std::vector<SessionOutcome>> outcomes;
            for (const auto& [flavor, path] : {std::pair{Flavor::naive, rp_naive}, std::pair{Flavor::ranking_bias, rp_rb},
                                               std::pair{Flavor::elaborate, rp_elab}}) {
                if (path.empty()) continue;
                m.input(path);
                auto in = open_in(path);
                outcomes[flavor] = read_outcomes(in);
            }
            auto report = summarize(outcomes, labeler_for(rp_lex.load(&m)));
            if (rp_out.empty()) {
                write_report(std::cout, report);
            } else {
                auto out = open_out(rp_out);
                write_report(out, report);
                out.close();
                m.output(rp_out);
                m.write(manifest_path_for(rp_out));
            }
        };
    });

    // synth ------------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic AOL log from the browsing model");
    int sy_users = 200, sy_relevant = 7, sy_page = results_per_page;
    std::uint64_t sy_seed = 1;
    fs::path sy_out, sy_exam;
    SyntheticClickModel sy_model;
    synth_cmd->add_option("--users", sy_users, "Number of users (one session each)")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--relevant-rank", sy_relevant, "Rank of the relevant document")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--page-size", sy_page, "Results on the page")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", sy_seed, "Random seed");
    synth_cmd->add_option("--query", sy_model.query, "Query text");
    synth_cmd->add_option("--top-attractiveness", sy_model.top_attractiveness, "Click probability of result 1")
        ->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--distractor-attractiveness", sy_model.distractor_attractiveness,
                          "Click probability of other non-relevant results")
        ->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--exam-table", sy_exam, "Examination table TSV")->check(CLI::ExistingFile);
    synth_cmd->add_option("--out", sy_out, "Output log")->required();
    synth_cmd->callback([&] {
        action = [&] {
            manifest = std::make_unique<Manifest>("synth", argc, argv);
            if (!sy_exam.empty()) manifest->input(sy_exam);
            manifest->seed(sy_seed);
            auto page = synthetic_page(sy_page);
            auto rows = gen_synthetic_log(sy_users, page, sy_relevant, exam_table_from(sy_exam), sy_seed, sy_model);
            auto out = open_out(sy_out);
            write_log(out, rows);
            out.close();
            manifest->output(sy_out);
            manifest->write(manifest_path_for(sy_out));
        };
    });

    // presets ----------------------------------------------------------------
    auto* presets_cmd = app.add_subcommand("presets", "Write the 24-run matrix as editable config files");
    fs::path pr_dir = "configs/runs";
    std::uint64_t pr_seed = 1;
    presets_cmd->add_option("--out-dir", pr_dir, "Directory for <name>.cfg files");
    presets_cmd->add_option("--seed", pr_seed, "Seed written into every config");
    presets_cmd->callback([&] {
        action = [&] {
            fs::create_directories(pr_dir);
            for (const auto& run : preset_run_matrix(pr_seed)) {
                auto out = open_out(pr_dir / (run.name + ".cfg"));
                out << run.to_text();
            }
        };
    });

    // serve ------------------------------------------------------------------
    auto* serve_cmd = app.add_subcommand("serve", "Run the meta-search HTTP service");
    fs::path sv_config;
    std::optional<int> sv_port;
    serve_cmd->add_option("--config", sv_config, "Service config (key=value); SWARM_<KEY> variables override")
        ->check(CLI::ExistingFile);
    serve_cmd->add_option("--port", sv_port, "Listen port (overrides config and environment)");
    serve_cmd->callback([&] {
        action = [&] {
            auto cfg = sv_config.empty() ? ServiceConfig{} : ServiceConfig::load(sv_config);
            cfg.apply_env([](const char* name) { return std::getenv(name); });
            if (sv_port) cfg.port = *sv_port;
            cfg.validate();
            std::shared_ptr<const SearchProvider> provider;
            if (cfg.provider == ProviderKind::fixture) {
                provider = std::make_shared<FixtureProvider>(cfg.provider_path);
            } else {
                provider = std::make_shared<LocalIndexProvider>(load_index(cfg.provider_path));
            }
            InteractionLog log(cfg.log_path);
            SearchService service(cfg, provider, log, exam_table_from(cfg.exam_table));
            httplib::Server server;
            install_routes(server, service);
            static httplib::Server* running = &server;
            std::signal(SIGINT, [](int) { running->stop(); });
            std::signal(SIGTERM, [](int) { running->stop(); });
            std::cerr << "listening on http://" << cfg.host << ':' << cfg.port << " (" << to_string(cfg.flavor)
                      << ", k=" << cfg.k << ", log " << cfg.log_path.string() << ")\n";
            if (!server.listen(cfg.host, cfg.port)) throw Error(Errc::io, "cannot listen on port " + std::to_string(cfg.port));
            log.flush();
        };
    });

    // analyze ----------------------------------------------------------------
    auto* analyze_cmd = app.add_subcommand(
        "analyze",
        "Correlation and similarity analysis of a controlled experiment.\n"
        "Input CSV header: order,group,task,trivial,seconds,queries\n"
        "  order    participation position within the group (>= 1)\n"
        "  group    control or experimental\n"
        "  trivial  1/0 (or true/false)\n"
        "  queries  the queries issued, joined by '|'");
    fs::path an_in, an_out;
    analyze_cmd->add_option("--in", an_in, "Experiment CSV")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--out", an_out, "Report TSV; stdout when omitted");
    analyze_cmd->callback([&] {
        action = [&] {
            Manifest m("analyze", argc, argv);
            m.input(an_in);
            auto in = open_in(an_in);
            auto records = read_experiment_csv(in);
            auto report = analyze_experiment(records);
            if (an_out.empty()) {
                write_experiment_report(std::cout, report);
            } else {
                auto out = open_out(an_out);
                write_experiment_report(out, report);
                out.close();
                m.output(an_out);
                m.write(manifest_path_for(an_out));
            }
        };
    });

    // ingest -----------------------------------------------------------------
    auto* ingest_cmd = app.add_subcommand("ingest", "Build the local tf-idf index of a corpus directory");
    fs::path in_dir;
    ingest_cmd->add_option("--dir", in_dir, "Directory of *.jsonl documents {url, title, body}")
        ->required()
        ->check(CLI::ExistingDirectory);
    ingest_cmd->callback([&] {
        action = [&] {
            auto result = ingest_corpus(in_dir);
            std::cerr << "indexed " << result.index.size() << " documents from " << result.files << " files ("
                      << result.skipped << " skipped) -> " << result.index_path.string() << " sha256 "
                      << sha256_file(result.index_path) << '\n';
        };
    });

    // exam-table -------------------------------------------------------------
    auto* exam_cmd = app.add_subcommand("exam-table", "Write the built-in examination probability table");
    fs::path ex_out;
    int ex_max = 100;
    exam_cmd->add_option("--out", ex_out, "Output TSV; stdout when omitted");
    exam_cmd->add_option("--max-position", ex_max, "Deepest position covered")->check(CLI::PositiveNumber);
    exam_cmd->callback([&] {
        action = [&] {
            auto table = ExaminationTable::single_browsing_approximation(ex_max);
            if (ex_out.empty()) {
                table.save(std::cout);
            } else {
                auto out = open_out(ex_out);
                table.save(out);
            }
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (action) action();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

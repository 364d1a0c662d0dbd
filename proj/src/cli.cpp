#include "hgd/cli.hpp"

#include <charconv>
#include <filesystem>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "hgd/dataset.hpp"
#include "hgd/embeddings.hpp"
#include "hgd/experiments.hpp"
#include "hgd/io.hpp"
#include "hgd/model.hpp"

namespace hgd::cli {

namespace fs = std::filesystem;

std::string_view to_string(Subcommand s) {
    for (const auto& spec : command_table())
        if (spec.id == s) return spec.name;
    return "unknown";
}

const std::vector<SubcommandSpec>& command_table() {
    static const std::vector<SubcommandSpec> table = [] {
        const FlagSpec dataset{"--dataset", true, false, "", "dataset TSV (homograph, phoneme, sentence)"};
        const FlagSpec store{"--store", true, false, "", "embedding store (hgd-emb/1)"};
        const FlagSpec out{"--out", true, false, "", "output file"};
        const FlagSpec out_dir{"--out-dir", true, false, "", "output directory for CSV files"};
        const FlagSpec normalize{"--normalize-arabic-yeh-kaf", false, true, "false",
                                 "map Arabic yeh/kaf to their Persian forms before processing"};
        const FlagSpec seed{"--seed", false, false, "0", "random seed"};
        const FlagSpec jobs{"--jobs", false, false, "1", "worker threads for per-homograph jobs"};
        auto test_fraction = [](const char* dflt) {
            return FlagSpec{"--test-fraction", false, false, dflt, "fraction of each homograph held out for testing"};
        };
        return std::vector<SubcommandSpec>{
            {Subcommand::Stats, "stats", "write dataset statistics as CSV histograms", {dataset, out_dir, normalize}},
            {Subcommand::Validate, "validate", "report dataset issues as CSV", {dataset, out_dir, normalize}},
            {Subcommand::Synth,
             "synth",
             "generate a synthetic embedding store from a JSON spec",
             {{"--spec", true, false, "", "synthetic store spec (JSON)"}, out}},
            {Subcommand::ExtractCheck,
             "extract-check",
             "check an embedding store against a dataset",
             {dataset, store}},
            {Subcommand::Train,
             "train",
             "train one classifier for one homograph and save it",
             {dataset,
              store,
              {"--homograph", true, false, "", "homograph to train on"},
              {"--model", true, false, "", "one of knn, logreg, ridge, mlp, forest"},
              out,
              seed,
              test_fraction("0.2")}},
            {Subcommand::CompareModels,
             "compare-models",
             "per-homograph model comparison",
             {dataset,
              store,
              out,
              {"--models", false, false, "forest,knn,logreg,mlp,ridge", "comma-separated model list"},
              seed,
              test_fraction("0.2"),
              jobs,
              {"--weighted", false, true, "false", "weight homograph means by sentence count"}}},
            {Subcommand::CompareEmbeddings,
             "compare-embeddings",
             "MLP accuracy of two pooling strategies grouped by phoneme count",
             {dataset,
              {"--store-last", true, false, "", "last-layer embedding store"},
              {"--store-avg4", true, false, "", "average-of-last-four embedding store"},
              out,
              seed,
              test_fraction("0.3"),
              jobs}},
            {Subcommand::Cosine,
             "cosine",
             "mean pairwise cosine per homograph and its histogram",
             {store, out, {"--pairs", false, false, "all", "all, within-phoneme or cross-phoneme"}}},
        };
    }();
    return table;
}

const std::string& Command::get(const std::string& name) const {
    const auto it = flags.find(name);
    if (it == flags.end()) throw UsageError("flag not available: " + name);
    return it->second;
}

namespace {

struct Parser {
    std::unique_ptr<CLI::App> app;
    // Bound storage; std::map nodes stay put while CLI11 holds references.
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::map<std::string, bool>> switches;
};

std::unique_ptr<Parser> build_parser() {
    auto p = std::make_unique<Parser>();
    p->app = std::make_unique<CLI::App>("Homograph disambiguation toolkit", "hgd");
    p->app->require_subcommand(1, 1);
    for (const auto& sc : command_table()) {
        auto* sub = p->app->add_subcommand(sc.name, sc.help);
        for (const auto& f : sc.flags) {
            if (f.is_switch) {
                sub->add_flag(f.name, p->switches[sc.name][f.name], f.help);
            } else {
                auto& slot = p->values[sc.name][f.name];
                slot = f.default_value;
                auto* opt = sub->add_option(f.name, slot, f.help);
                if (f.required) opt->required();
                else opt->default_str(f.default_value);
            }
        }
    }
    return p;
}

void check_uint(const std::string& flag, const std::string& v, std::uint64_t min_value = 0) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || x < min_value)
        throw UsageError(flag + " expects an integer >= " + std::to_string(min_value) + ", got '" + v + "'");
}

void check_fraction(const std::string& v) {
    double x = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !(x >= 0.0 && x < 1.0))
        throw UsageError("--test-fraction expects a number in [0, 1), got '" + v + "'");
}

void validate_values(const Command& c) {
    for (const auto& [name, value] : c.flags) {
        if (name == "--seed") check_uint(name, value);
        else if (name == "--jobs") check_uint(name, value, 1);
        else if (name == "--test-fraction") check_fraction(value);
        else if (name == "--model") {
            try {
                parse_model_kind(value);
            } catch (const Error& e) {
                throw UsageError(e.what());
            }
        } else if (name == "--models") {
            std::set<std::string> seen;
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                try {
                    parse_model_kind(item);
                } catch (const Error& e) {
                    throw UsageError(e.what());
                }
                if (!seen.insert(item).second) throw UsageError("model listed twice: " + item);
            }
            if (seen.empty()) throw UsageError("--models must name at least one model");
        } else if (name == "--pairs") {
            try {
                parse_pair_filter(value);
            } catch (const Error& e) {
                throw UsageError(e.what());
            }
        }
    }
}

}  // namespace

Command parse_args(std::span<const std::string> args) {
    auto parser = build_parser();
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        parser->app->parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(parser->app->help());
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested(parser->app->help("", CLI::AppFormatMode::All));
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    const auto selected = parser->app->get_subcommands();
    if (selected.size() != 1) throw UsageError("exactly one subcommand is required");
    const auto name = selected.front()->get_name();
    for (const auto& sc : command_table()) {
        if (sc.name != name) continue;
        Command c;
        c.subcommand = sc.id;
        for (const auto& f : sc.flags) {
            c.flags[f.name] = f.is_switch ? (parser->switches[name][f.name] ? "true" : "false")
                                          : parser->values[name][f.name];
        }
        validate_values(c);
        return c;
    }
    throw UsageError("unknown subcommand: " + name);
}

std::string help_text(std::string_view subcommand) {
    auto parser = build_parser();
    if (subcommand.empty()) return parser->app->help("", CLI::AppFormatMode::All);
    try {
        parse_args(std::vector<std::string>{std::string(subcommand), "--help"});
    } catch (const HelpRequested& h) {
        return h.what();
    }
    throw UsageError("unknown subcommand: " + std::string(subcommand));
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t to_u64(const std::string& v) {
    std::uint64_t x = 0;
    std::from_chars(v.data(), v.data() + v.size(), x);
    return x;
}

double to_double(const std::string& v) {
    double x = 0.0;
    std::from_chars(v.data(), v.data() + v.size(), x);
    return x;
}

Dataset load_dataset(const Command& c) {
    const fs::path path = c.get("--dataset");
    ParseOptions opts;
    opts.normalize_arabic_yeh_kaf = c.has("--normalize-arabic-yeh-kaf") && c.get("--normalize-arabic-yeh-kaf") == "true";
    try {
        return parse_dataset_string(io::read_file(path), opts);
    } catch (const ParseError& e) {
        throw Error(path.string() + ": " + e.what());
    } catch (const EncodingError& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

EmbeddingStore load_store(const std::string& path) {
    try {
        return read_store_string(io::read_file(path));
    } catch (const FormatError& e) {
        throw Error(path + ": " + e.what());
    }
}

/// Computes every file first, then writes them, so a failure leaves nothing
/// behind from this run.
void write_outputs(const std::vector<std::pair<fs::path, std::string>>& files) {
    for (const auto& [path, _] : files) {
        if (path.has_parent_path() && !fs::exists(path.parent_path()))
            throw Error("output directory does not exist: " + path.parent_path().string());
    }
    for (const auto& [path, contents] : files) io::atomic_write(path, contents);
}

void report_excluded(std::ostream& err, const std::vector<ExcludedHomograph>& excluded) {
    for (const auto& e : excluded) err << "excluded homograph " << e.homograph << ": " << e.reason << '\n';
}

int cmd_stats(const Command& c, std::ostream& out) {
    const auto d = load_dataset(c);
    const auto s = compute_stats(d);
    const fs::path dir = c.get("--out-dir");
    fs::create_directories(dir);
    std::string summary = "key,count\n";
    summary += "records," + std::to_string(d.size()) + '\n';
    summary += "homographs," + std::to_string(d.index().size()) + '\n';
    summary += "position_unresolved," + std::to_string(s.position_unresolved) + '\n';
    write_outputs({
        {dir / "sentence_lengths.csv", histogram_to_csv(s.sentence_length_hist)},
        {dir / "homograph_positions.csv", histogram_to_csv(s.homograph_position_hist)},
        {dir / "phoneme_counts.csv", histogram_to_csv(s.phoneme_count_dist)},
        {dir / "homograph_lengths.csv", histogram_to_csv(s.homograph_length_hist)},
        {dir / "inventories.csv", inventories_to_csv(s)},
        {dir / "summary.csv", summary},
    });
    out << "records=" << d.size() << " homographs=" << d.index().size()
        << " position_unresolved=" << s.position_unresolved << '\n';
    return kExitOk;
}

int cmd_validate(const Command& c, std::ostream& out) {
    const auto d = load_dataset(c);
    const auto report = validate(d);
    const fs::path dir = c.get("--out-dir");
    fs::create_directories(dir);
    write_outputs({{dir / "validation.csv", validation_to_csv(d, report)}});
    out << "issues=" << report.issues.size() << " homograph-absent=" << report.count(IssueKind::HomographAbsent)
        << " duplicate=" << report.count(IssueKind::Duplicate)
        << " single-phoneme=" << report.count(IssueKind::SinglePhoneme) << '\n';
    return kExitOk;
}

int cmd_synth(const Command& c, std::ostream& out) {
    const auto spec = parse_synth_spec(io::read_file(c.get("--spec")));
    const auto store = generate_synthetic_store(spec);
    write_outputs({{c.get("--out"), store_to_string(store)}});
    out << "records=" << store.size() << " dim=" << store.dim() << '\n';
    return kExitOk;
}

int cmd_extract_check(const Command& c, std::ostream& out, std::ostream& err) {
    const auto d = load_dataset(c);
    const auto store = load_store(c.get("--store"));
    std::size_t problems = 0;
    for (const auto& r : store.records()) {
        if (r.record_id >= d.size()) {
            err << "record " << r.record_id << " is not in the dataset\n";
            ++problems;
            continue;
        }
        const auto& dr = d.at(r.record_id);
        if (dr.homograph != r.homograph || dr.phoneme != r.phoneme) {
            err << "record " << r.record_id << " disagrees with the dataset (homograph/phoneme)\n";
            ++problems;
        }
    }
    std::size_t missing = 0;
    for (const auto& r : d.records())
        if (!store.find(r.record_id)) ++missing;
    out << "store_records=" << store.size() << " dataset_records=" << d.size() << " missing=" << missing
        << " dim=" << store.dim() << " pooling=" << to_string(store.pooling()) << " model=" << store.model_id()
        << '\n';
    if (problems) {
        err << "extract-check failed: " << problems << " inconsistent records\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_train(const Command& c, std::ostream& out) {
    const auto d = load_dataset(c);
    const auto store = load_store(c.get("--store"));
    const auto& homograph = c.get("--homograph");
    SplitSpec spec{to_double(c.get("--test-fraction")), to_u64(c.get("--seed")), true};
    const auto parts = split(d, homograph, spec);
    const auto cfg = ModelConfig::defaults(parse_model_kind(c.get("--model")), spec.seed);
    const auto train = labeled_subset(d, store, parts.train);
    const auto model = fit_model(cfg, train);
    const auto serialized = serialize_model(model);

    out << "homograph=" << homograph << " model=" << to_string(cfg.kind) << " train=" << parts.train.size()
        << " test=" << parts.test.size();
    if (!parts.test.empty()) {
        const auto test = labeled_subset(d, store, parts.test);
        std::vector<std::string> pred;
        for (RecordId id : parts.test) pred.push_back(predict(model, store.find(id)->vector));
        const auto m = compute_metrics(test.y, pred);
        out << " accuracy=" << io::format_double(m.accuracy) << " precision=" << io::format_double(m.precision_macro)
            << " recall=" << io::format_double(m.recall_macro) << " f1=" << io::format_double(m.f1_macro);
    }
    out << '\n';
    write_outputs({{c.get("--out"), serialized}});
    return kExitOk;
}

int cmd_compare_models(const Command& c, std::ostream& out, std::ostream& err) {
    const auto d = load_dataset(c);
    const auto store = load_store(c.get("--store"));
    const auto seed = to_u64(c.get("--seed"));
    std::vector<ModelConfig> models;
    std::stringstream ss(c.get("--models"));
    std::string item;
    while (std::getline(ss, item, ',')) models.push_back(ModelConfig::defaults(parse_model_kind(item), seed));
    ModelComparisonOptions opts;
    opts.jobs = to_u64(c.get("--jobs"));
    opts.weighted = c.get("--weighted") == "true";
    const auto report =
        run_model_comparison(d, store, models, {to_double(c.get("--test-fraction")), seed, true}, opts);
    write_outputs({{c.get("--out"), to_csv(report)}});
    report_excluded(err, report.excluded);
    out << "models=" << report.rows.size() << " homographs=" << (report.rows.empty() ? 0 : report.rows[0].homographs)
        << " excluded=" << report.excluded.size() << '\n';
    return kExitOk;
}

int cmd_compare_embeddings(const Command& c, std::ostream& out, std::ostream& err) {
    const auto d = load_dataset(c);
    const auto last = load_store(c.get("--store-last"));
    const auto avg4 = load_store(c.get("--store-avg4"));
    EmbeddingComparisonOptions opts;
    opts.jobs = to_u64(c.get("--jobs"));
    opts.seed = to_u64(c.get("--seed"));
    const auto report =
        run_embedding_comparison(d, last, avg4, {to_double(c.get("--test-fraction")), opts.seed, true}, opts);
    write_outputs({{c.get("--out"), to_csv(report)}});
    report_excluded(err, report.excluded);
    out << "cells=" << report.cells.size() << " excluded=" << report.excluded.size() << '\n';
    return kExitOk;
}

}  // namespace

fs::path histogram_path(const fs::path& out) {
    auto p = out;
    p.replace_extension(".hist.csv");
    return p;
}

namespace {

int cmd_cosine(const Command& c, std::ostream& out, std::ostream& err) {
    const auto store = load_store(c.get("--store"));
    const auto report = run_cosine_analysis(store, parse_pair_filter(c.get("--pairs")));
    const fs::path path = c.get("--out");
    write_outputs({{path, per_homograph_csv(report)}, {histogram_path(path), histogram_csv(report)}});
    report_excluded(err, report.excluded);
    out << "homographs=" << report.per_homograph.size() << " excluded=" << report.excluded.size() << '\n';
    return kExitOk;
}

}  // namespace

int execute(const Command& c, std::ostream& out, std::ostream& err) {
    try {
        switch (c.subcommand) {
            case Subcommand::Stats: return cmd_stats(c, out);
            case Subcommand::Validate: return cmd_validate(c, out);
            case Subcommand::Synth: return cmd_synth(c, out);
            case Subcommand::ExtractCheck: return cmd_extract_check(c, out, err);
            case Subcommand::Train: return cmd_train(c, out);
            case Subcommand::CompareModels: return cmd_compare_models(c, out, err);
            case Subcommand::CompareEmbeddings: return cmd_compare_embeddings(c, out, err);
            case Subcommand::Cosine: return cmd_cosine(c, out, err);
        }
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& ch : msg)
            if (ch == '\n') ch = ' ';
        err << "error: " << msg << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    Command c;
    try {
        c = parse_args(args);
    } catch (const HelpRequested& h) {
        out << h.what();
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nrun 'hgd --help' for usage\n";
        return kExitUsage;
    }
    return execute(c, out, err);
}

}  // namespace hgd::cli

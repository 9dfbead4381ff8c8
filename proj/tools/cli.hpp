#pragma once

// Command-line front end. Every command writes its outputs plus a
// manifest.json into --out; `replay` re-runs a manifest into another
// directory.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "oascen/oascen.hpp"

namespace oascen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kManifest = "manifest.json";

enum ExitCode { kOk = 0, kInternal = 1, kValidation = 2, kSolver = 3, kIo = 4 };

inline int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Validation: return kValidation;
        case ErrorCategory::Solver: return kSolver;
        case ErrorCategory::Io: return kIo;
    }
    return kInternal;
}

inline std::string one_line(std::string s) {
    std::string out;
    for (char ch : s) {
        if (ch == '\n' || ch == '\r') out += ' ';
        else if (ch == '"' || ch == '\\') {
            out += '\\';
            out += ch;
        } else out += ch;
    }
    return out;
}

inline void diagnose(std::ostream& err, int code, const std::string& kind, const std::string& msg) {
    err << "error: code=" << code << " kind=" << kind << " msg=\"" << one_line(msg) << "\"\n";
}

inline std::string abs_path(const std::string& p) { return fs::absolute(fs::path(p)).lexically_normal().string(); }

inline fs::path prepare_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    return fs::path(dir);
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

/// Given options of one subcommand, as replayable (flag, value) pairs. Path
/// values are made absolute so a manifest replays from any directory.
class ArgRecorder {
public:
    enum class Kind { Plain, Path, ErrorSource };

    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& flag, T& var, const std::string& help,
                     Kind kind = Kind::Plain) {
        auto* o = app->add_option(flag, var, help);
        entries_.push_back({o, flag, kind});
        return o;
    }

    [[nodiscard]] std::vector<std::pair<std::string, std::string>> record() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& e : entries_) {
            if (e.opt->count() == 0) continue;
            for (const auto& raw : e.opt->results()) out.emplace_back(e.flag, canonical(e.kind, raw));
        }
        return out;
    }

private:
    struct Entry {
        CLI::Option* opt;
        std::string flag;
        Kind kind;
    };

    static std::string canonical(Kind k, const std::string& raw) {
        if (k == Kind::Path) return abs_path(raw);
        if (k == Kind::ErrorSource && raw.rfind("generated:", 0) == 0) return "generated:" + abs_path(raw.substr(10));
        return raw;
    }

    std::vector<Entry> entries_;
};

struct Manifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> args;
    std::vector<std::string> outputs;
    json config = json::object();
    std::uint64_t seed{0};
};

inline void write_manifest(const fs::path& out, const Manifest& m) {
    json args = json::array();
    for (const auto& [flag, value] : m.args) args.push_back(json::array({flag, value}));
    json j = {{"tool", "oascen"},          {"version", OASCEN_VERSION}, {"command", m.command},
              {"args", args},              {"seed", m.seed},            {"config", m.config},
              {"outputs", m.outputs}};
    write_text(out / kManifest, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Commands

struct IngestArgs {
    std::string load, grid, out;
    int horizon{24};
    double train_frac{0.9};
    std::uint64_t seed{0};
};

inline Manifest cmd_ingest(const IngestArgs& a, std::ostream& log) {
    if (!(a.train_frac > 0.0 && a.train_frac < 1.0)) throw ConfigError("--train-frac must lie in (0, 1)");
    const auto grid = load_grid(a.grid);
    auto rep = ingest_load_csv(a.load, grid, a.horizon);
    const auto n = rep.days.size();
    if (n < 2) throw InsufficientData("need at least two complete days to split, got " + std::to_string(n));
    auto n_train = static_cast<std::size_t>(std::floor(a.train_frac * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    auto split = split_dataset(rep.days, n_train, a.seed);
    DatasetBundle b{std::move(split.train), std::move(split.test)};

    const auto out = prepare_out(a.out);
    Manifest m{"ingest"};
    m.outputs = write_bundle(b, grid, out.string());
    m.seed = a.seed;
    m.config = {{"horizon", a.horizon}, {"train_frac", a.train_frac}, {"n_train", b.train.size()},
                {"n_test", b.test.size()}};
    log << "kept=" << n << " dropped_incomplete=" << rep.dropped_incomplete.size()
        << " dropped_flat=" << rep.dropped_flat.size() << " train=" << b.train.size() << " test=" << b.test.size()
        << "\n";
    return m;
}

struct TrainArgs {
    std::string bundle, grid, out;
    TrainConfig cfg;
    std::string sign{"roundtrip"}, infeasible{"skip"}, order{"algorithm1"};
};

inline json config_json(const TrainConfig& c) {
    return {{"k", c.k},
            {"alpha", c.alpha},
            {"alpha_g2", c.step_g2()},
            {"batch_size", c.batch_size},
            {"epoch_max", c.epoch_max},
            {"n_z", c.noise.n_z},
            {"delta_shift", c.scale.delta_shift},
            {"delta_scale", c.scale.delta_scale},
            {"seed", c.seed},
            {"infeasible_policy", to_string(c.infeasible_policy)},
            {"penalty_weight", c.penalty_weight},
            {"order", to_string(c.order)},
            {"sign", to_string(c.sign)},
            {"opf_enabled", c.opf_enabled},
            {"hidden", c.hidden},
            {"output_range", c.output_range},
            {"n_labels", c.n_labels}};
}

inline Manifest cmd_train(TrainArgs a, std::ostream& log) {
    a.cfg.sign = parse_sign_mode(a.sign);
    a.cfg.infeasible_policy = parse_infeasible_policy(a.infeasible);
    a.cfg.order = parse_update_order(a.order);
    a.cfg.validate();
    const auto grid = load_grid(a.grid);
    const auto bundle = read_bundle(a.bundle, grid);
    auto result = train(bundle.train, grid, a.cfg);

    const auto out = prepare_out(a.out);
    save_checkpoint(result.model, (out / "checkpoint.json").string());
    trace_csv(result.trace).save((out / "trace.csv").string());
    Manifest m{"train"};
    m.outputs = {"checkpoint.json", "trace.csv"};
    m.seed = a.cfg.seed;
    m.config = config_json(a.cfg);
    m.config["n_train"] = bundle.train.size();
    m.config["horizon"] = bundle.horizon();
    const auto& last = result.trace.epochs.back();
    log << "epochs=" << result.trace.epochs.size() << " loss_d=" << csv::fmt(last.loss_d)
        << " loss_g=" << csv::fmt(last.loss_g) << " n_infeasible=" << last.n_infeasible << "\n";
    return m;
}

struct GenerateArgs {
    std::string checkpoint, out, bundle, grid, set{"test"};
    int label{-1};
    std::size_t n{0};
    std::uint64_t seed{0};
};

inline csv::Writer keyed_csv(const std::string& key_column, const std::vector<KeyedField>& fields,
                             const std::vector<std::string>& nodes) {
    csv::Writer w({key_column, "zone", "hour", "eps"});
    for (const auto& f : fields)
        for (Eigen::Index i = 0; i < f.values.rows(); ++i)
            for (Eigen::Index t = 0; t < f.values.cols(); ++t)
                w.add(f.key, nodes[static_cast<std::size_t>(i)], t + 1, f.values(i, t));
    return w;
}

inline const std::vector<DaySample>& pick_set(const DatasetBundle& b, const std::string& set,
                                              std::vector<DaySample>& storage) {
    if (set == "test") return b.test;
    if (set == "train") return b.train;
    if (set == "all") {
        storage = b.train;
        storage.insert(storage.end(), b.test.begin(), b.test.end());
        std::sort(storage.begin(), storage.end(), [](const auto& x, const auto& y) { return x.date < y.date; });
        return storage;
    }
    throw ConfigError("--set must be test, train or all, got '" + set + "'");
}

inline Manifest cmd_generate(const GenerateArgs& a, std::ostream& log) {
    const auto model = load_checkpoint(a.checkpoint);
    std::vector<KeyedField> fields;
    std::string key = "sample";
    if (!a.bundle.empty()) {
        if (a.grid.empty()) throw ConfigError("--bundle needs --grid");
        const auto grid = load_grid(a.grid);
        require_compatible(model, grid);
        const auto bundle = read_bundle(a.bundle, grid);
        std::vector<DaySample> storage;
        const auto& days = pick_set(bundle, a.set, storage);
        // Same per-sample seeding as a generated evaluation case.
        for (std::size_t k = 0; k < days.size(); ++k) {
            if (days[k].hours() != model.horizon) throw DimensionMismatch("bundle horizon differs from checkpoint");
            fields.push_back({days[k].date, generate(model, days[k].label, 1, derive_seed(a.seed, k)).front().values});
        }
        key = "date";
    } else {
        if (a.label < 0 && a.n == 0) throw ConfigError("generate needs --label and --n, or --bundle");
        if (a.n < 1) throw ConfigError("--n must be at least 1");
        auto errs = generate(model, a.label, a.n, a.seed);
        for (std::size_t k = 0; k < errs.size(); ++k) fields.push_back({std::to_string(k), errs[k].values});
    }
    const auto out = prepare_out(a.out);
    keyed_csv(key, fields, model.nodes).save((out / "errors.csv").string());
    Manifest m{"generate"};
    m.outputs = {"errors.csv"};
    m.seed = a.seed;
    m.config = {{"mode", key == "date" ? "bundle" : "label"}, {"n_fields", fields.size()}};
    if (key == "sample") m.config["label"] = a.label;
    log << "fields=" << fields.size() << " rows=" << fields.size() * static_cast<std::size_t>(model.data_dim()) << "\n";
    return m;
}

struct EvaluateArgs {
    std::string bundle, grid, out, set{"test"};
    std::vector<std::string> sources{"none"};
    std::string sign{"roundtrip"}, downward{"symmetric"};
    double tol{1e-5};
};

inline DownwardTest parse_downward(const std::string& s) {
    if (s == "symmetric") return DownwardTest::Symmetric;
    if (s == "verbatim") return DownwardTest::Verbatim;
    throw ConfigError("--downward must be symmetric or verbatim, got '" + s + "'");
}

inline EvalCase parse_error_source(const std::string& spec, const std::vector<DaySample>& days,
                                   const GridModel& grid) {
    if (spec == "none") return EvalCase::none();
    if (spec.rfind("robust:", 0) == 0) return EvalCase::robust(csv::to_double(spec.substr(7), "--error-source"));
    if (spec.rfind("generated:", 0) == 0) {
        const std::string path = spec.substr(10);
        const int horizon = days.empty() ? 0 : static_cast<int>(days.front().hours());
        auto fields = parse_fields(csv::read(path), "date", grid, horizon);
        std::map<std::string, const KeyedField*> by_date;
        for (const auto& f : fields) by_date[f.key] = &f;
        std::vector<ErrorField> errs;
        for (const auto& s : days) {
            auto it = by_date.find(s.date);
            if (it == by_date.end()) throw DimensionMismatch("'" + path + "' has no error for day " + s.date);
            errs.push_back({it->second->values, ErrorKind::Normalized});
        }
        if (fields.size() != days.size())
            throw DimensionMismatch("'" + path + "' has " + std::to_string(fields.size()) + " days, evaluation set has " +
                                    std::to_string(days.size()));
        return EvalCase::from_errors(std::move(errs), "generated:" + fs::path(path).filename().string());
    }
    throw ConfigError("unknown error source '" + spec + "' (none | generated:<csv> | robust:<r>)");
}

inline Manifest cmd_evaluate(const EvaluateArgs& a, std::ostream& log) {
    EvalOptions opt;
    opt.downward = parse_downward(a.downward);
    opt.tol = a.tol;
    const auto sign = parse_sign_mode(a.sign);
    const auto grid = load_grid(a.grid);
    const auto bundle = read_bundle(a.bundle, grid);
    std::vector<DaySample> storage;
    const auto& days = pick_set(bundle, a.set, storage);
    std::vector<EvalCase> cases;
    for (const auto& s : a.sources) cases.push_back(parse_error_source(s, days, grid));
    auto rows = run_case_table(days, grid, cases, sign, opt);

    const auto out = prepare_out(a.out);
    Manifest m{"evaluate"};
    json records = json::array();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        records.push_back(metrics_json(rows[k]));
        const std::string detail = rows.size() == 1 ? "detail.csv" : "detail_" + std::to_string(k + 1) + ".csv";
        sample_detail_csv(rows[k]).save((out / detail).string());
        m.outputs.push_back(detail);
        log << rows[k].case_id << " c_total=" << csv::fmt(rows[k].c_total) << " i_up=" << csv::fmt(rows[k].i_up)
            << " i_dn=" << csv::fmt(rows[k].i_dn) << " n_infeasible=" << rows[k].n_infeasible << "\n";
    }
    write_text(out / "metrics.json", records.dump(2) + "\n");
    case_table_csv(rows).save((out / "case_table.csv").string());
    m.outputs.insert(m.outputs.begin(), {"metrics.json", "case_table.csv"});
    m.config = {{"sign_mode", to_string(sign)}, {"downward", to_string(opt.downward)}, {"tol", opt.tol},
                {"set", a.set}, {"n_samples", days.size()}};
    return m;
}

struct SynthArgs {
    std::string out;
    synthetic::DayConfig days;
};

inline Manifest cmd_synth(const SynthArgs& a, std::ostream& log) {
    const auto grid = synthetic::three_zone_grid();
    const auto days = synthetic::make_days(grid, a.days);
    const auto out = prepare_out(a.out);
    write_grid(grid, (out / "grid.json").string());
    samples_csv(days, grid).save((out / "load.csv").string());
    Manifest m{"synth"};
    m.outputs = {"grid.json", "load.csv"};
    m.seed = a.days.seed;
    m.config = {{"n_days", a.days.n_days}, {"horizon", a.days.horizon}, {"rt_sigma", a.days.rt_sigma},
                {"rt_rho", a.days.rt_rho}, {"first_date", a.days.first_date}};
    log << "days=" << days.size() << "\n";
    return m;
}

// ---------------------------------------------------------------------------
// Entry point

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

inline int replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
                  std::ostream& err) {
    std::ifstream f(manifest_path, std::ios::binary);
    if (!f) throw IoError("cannot open manifest '" + manifest_path + "'");
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ParseError("manifest '" + manifest_path + "': " + e.what());
    }
    if (!j.is_object() || j.value("tool", "") != "oascen" || !j.contains("command") || !j.contains("args"))
        throw ParseError("'" + manifest_path + "' is not an oascen manifest");
    const auto command = j["command"].get<std::string>();
    if (command == "replay") throw ValidationError("manifest records a replay");
    if (j.value("version", "") != OASCEN_VERSION)
        err << "warning: manifest written by version " << j.value("version", "?") << ", running " << OASCEN_VERSION
            << "\n";
    std::vector<std::string> argv{"oascen", command};
    for (const auto& pair : j["args"]) {
        argv.push_back(pair.at(0).get<std::string>());
        argv.push_back(pair.at(1).get<std::string>());
    }
    argv.push_back("--out");
    argv.push_back(out_dir);
    return run(argv, out, err);
}

inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Operation-adversarial scenario generation: ingest, train, generate, evaluate"};
    app.set_version_flag("--version", std::string(OASCEN_VERSION));
    app.require_subcommand(1);
    using Kind = ArgRecorder::Kind;

    ArgRecorder r_ingest, r_train, r_generate, r_evaluate, r_synth;

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "Build a dataset bundle from a DA/RT load CSV");
    r_ingest.add(ingest, "--load", ia.load, "CSV with date,zone,hour,da_mw,rt_mw", Kind::Path)->required();
    r_ingest.add(ingest, "--grid", ia.grid, "grid JSON", Kind::Path)->required();
    r_ingest.add(ingest, "--horizon", ia.horizon, "hours per day")->capture_default_str();
    r_ingest.add(ingest, "--train-frac", ia.train_frac, "share of days used for training")->capture_default_str();
    r_ingest.add(ingest, "--seed", ia.seed, "split seed")->capture_default_str();
    ingest->add_option("--out", ia.out, "output bundle directory")->required();

    TrainArgs ta;
    auto* trainc = app.add_subcommand("train", "Train the generator/discriminator pair");
    r_train.add(trainc, "--bundle", ta.bundle, "dataset bundle directory", Kind::Path)->required();
    r_train.add(trainc, "--grid", ta.grid, "grid JSON", Kind::Path)->required();
    r_train.add(trainc, "--k", ta.cfg.k, "weight of the adversarial loss")->capture_default_str();
    r_train.add(trainc, "--epochs", ta.cfg.epoch_max, "epochs")->capture_default_str();
    r_train.add(trainc, "--batch", ta.cfg.batch_size, "mini-batch size")->capture_default_str();
    r_train.add(trainc, "--alpha", ta.cfg.alpha, "SGD step")->capture_default_str();
    r_train.add(trainc, "--alpha-g2", ta.cfg.alpha_g2, "SGD step of the cost-driven update (default: --alpha)");
    r_train.add(trainc, "--seed", ta.cfg.seed, "root seed")->capture_default_str();
    r_train.add(trainc, "--hidden", ta.cfg.hidden, "hidden width")->capture_default_str();
    r_train.add(trainc, "--noise-dim", ta.cfg.noise.n_z, "noise dimension")->capture_default_str();
    r_train.add(trainc, "--output-range", ta.cfg.output_range, "generator output bound")->capture_default_str();
    r_train.add(trainc, "--delta-shift", ta.cfg.scale.delta_shift, "cost shift, $")->capture_default_str();
    r_train.add(trainc, "--delta-scale", ta.cfg.scale.delta_scale, "cost scale, $")->capture_default_str();
    r_train.add(trainc, "--sign", ta.sign, "denormalization sign: roundtrip | paperplus")->capture_default_str();
    r_train.add(trainc, "--infeasible", ta.infeasible, "skip | penalty")->capture_default_str();
    r_train.add(trainc, "--penalty-weight", ta.cfg.penalty_weight, "loss per infeasible sample")
        ->capture_default_str();
    r_train.add(trainc, "--order", ta.order, "algorithm1 | fused")->capture_default_str();
    trainc->add_option("--out", ta.out, "output directory")->required();

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "Sample error fields from a checkpoint");
    r_generate.add(gen, "--checkpoint", ga.checkpoint, "checkpoint JSON", Kind::Path)->required();
    auto* o_label = r_generate.add(gen, "--label", ga.label, "quarter label");
    auto* o_n = r_generate.add(gen, "--n", ga.n, "number of fields");
    auto* o_bundle = r_generate.add(gen, "--bundle", ga.bundle, "one field per day of this bundle", Kind::Path);
    r_generate.add(gen, "--grid", ga.grid, "grid JSON (with --bundle)", Kind::Path);
    r_generate.add(gen, "--set", ga.set, "bundle days: test | train | all")->capture_default_str();
    r_generate.add(gen, "--seed", ga.seed, "noise seed")->capture_default_str();
    o_bundle->excludes(o_label)->excludes(o_n);
    gen->add_option("--out", ga.out, "output directory")->required();

    EvaluateArgs ea;
    auto* evalc = app.add_subcommand("evaluate", "Score error sources by DA cost and RT security levels");
    r_evaluate.add(evalc, "--bundle", ea.bundle, "dataset bundle directory", Kind::Path)->required();
    r_evaluate.add(evalc, "--grid", ea.grid, "grid JSON", Kind::Path)->required();
    r_evaluate.add(evalc, "--error-source", ea.sources, "none | generated:<csv> | robust:<r> (repeatable)",
                   Kind::ErrorSource)
        ->capture_default_str();
    r_evaluate.add(evalc, "--sign", ea.sign, "denormalization sign: roundtrip | paperplus")->capture_default_str();
    r_evaluate.add(evalc, "--downward", ea.downward, "downward test: symmetric | verbatim")->capture_default_str();
    r_evaluate.add(evalc, "--set", ea.set, "bundle days: test | train | all")->capture_default_str();
    r_evaluate.add(evalc, "--tol", ea.tol, "MW slack on coverage tests")->capture_default_str();
    evalc->add_option("--out", ea.out, "output directory")->required();

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Write the synthetic three-zone grid and load CSV");
    r_synth.add(synth, "--days", sa.days.n_days, "number of days")->capture_default_str();
    r_synth.add(synth, "--horizon", sa.days.horizon, "hours per day")->capture_default_str();
    r_synth.add(synth, "--seed", sa.days.seed, "seed")->capture_default_str();
    r_synth.add(synth, "--rt-sigma", sa.days.rt_sigma, "relative RT deviation")->capture_default_str();
    synth->add_option("--out", sa.out, "output directory")->required();

    std::string manifest, replay_out;
    auto* rep = app.add_subcommand("replay", "Re-run a manifest into another directory");
    rep->add_option("manifest", manifest, "manifest.json of an earlier run")->required();
    rep->add_option("--out", replay_out, "output directory")->required();

    try {
        std::vector<const char*> cargv;
        for (const auto& a : argv) cargv.push_back(a.c_str());
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        diagnose(err, kValidation, "UsageError", e.what());
        return kValidation;
    }

    try {
        Manifest m;
        std::string out_dir;
        if (*ingest) {
            m = cmd_ingest(ia, out);
            m.args = r_ingest.record();
            out_dir = ia.out;
        } else if (*trainc) {
            m = cmd_train(ta, out);
            m.args = r_train.record();
            out_dir = ta.out;
        } else if (*gen) {
            m = cmd_generate(ga, out);
            m.args = r_generate.record();
            out_dir = ga.out;
        } else if (*evalc) {
            m = cmd_evaluate(ea, out);
            m.args = r_evaluate.record();
            out_dir = ea.out;
        } else if (*synth) {
            m = cmd_synth(sa, out);
            m.args = r_synth.record();
            out_dir = sa.out;
        } else {
            return replay(manifest, replay_out, out, err);
        }
        write_manifest(fs::path(out_dir), m);
        return kOk;
    } catch (const Error& e) {
        const int code = exit_code(e.category());
        diagnose(err, code, e.kind(), e.what());
        return code;
    } catch (const json::exception& e) {
        diagnose(err, kValidation, "ParseError", e.what());
        return kValidation;
    } catch (const fs::filesystem_error& e) {
        diagnose(err, kIo, "IoError", e.what());
        return kIo;
    } catch (const std::exception& e) {
        diagnose(err, kInternal, "InternalError", e.what());
        return kInternal;
    }
}

}  // namespace oascen::cli

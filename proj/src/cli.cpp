#include "sfcast/cli.hpp"

#include "sfcast/baselines.hpp"
#include "sfcast/binary_io.hpp"
#include "sfcast/error.hpp"
#include "sfcast/metadata.hpp"
#include "sfcast/metrics.hpp"
#include "sfcast/model.hpp"
#include "sfcast/predictor.hpp"
#include "sfcast/profile_matrix.hpp"
#include "sfcast/scenarios.hpp"
#include "sfcast/trainer.hpp"
#include "sfcast/tuning.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace sfcast::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_rho(const std::string& text) {
    if (text == "inf" || text == "Inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_argument, "bad rho '" + text + "'");
    }
}

void write_json(const fs::path& path, const json& j) { io::write_atomic(path, j.dump(2) + "\n"); }

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    return in;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
}

struct SpecArgs {
    std::string variant = "low_rank";
    std::size_t rank = 5;
    std::size_t knots = 8;
    std::size_t hidden = 100;
    bool mf = true;
    std::size_t mf_rank = 5;

    void add(CLI::App& app) {
        app.add_option("--variant", variant, "Regression variant: full, low_rank, functional, neural, none")
            ->capture_default_str();
        app.add_option("--rank", rank, "Regression rank k (low_rank)")->capture_default_str();
        app.add_option("--knots", knots, "B-spline knot spans K (functional)")->capture_default_str();
        app.add_option("--hidden", hidden, "First hidden layer width (neural)")->capture_default_str();
        app.add_option("--mf", mf, "Enable the matrix-factorization term (true/false)")->capture_default_str();
        app.add_option("--mf-rank", mf_rank, "MF rank k'")->capture_default_str();
    }

    ModelSpec spec() const {
        ModelSpec s;
        s.variant = parse_variant(variant);
        s.regression_rank = rank;
        s.knots = knots;
        s.hidden_units = hidden;
        s.mf_enabled = mf;
        s.mf_rank = mf_rank;
        s.validate();
        return s;
    }
};

struct TrainArgs {
    TrainConfig cfg;
    std::string mode = "stochastic";

    void add(CLI::App& app) {
        app.add_option("--lambda1", cfg.lambda1, "Regression regularization")->capture_default_str();
        app.add_option("--lambda2", cfg.lambda2, "MF regularization")->capture_default_str();
        app.add_option("--minibatch", cfg.minibatch, "Columns per SGD step")->capture_default_str();
        app.add_option("--iterations", cfg.iterations, "Steps per restart")->capture_default_str();
        app.add_option("--step-size", cfg.step_size, "Constant step size")->capture_default_str();
        app.add_option("--restarts", cfg.restarts, "Random restarts")->capture_default_str();
        app.add_option("--seed", cfg.seed, "Root seed")->capture_default_str();
        app.add_option("--mode", mode, "stochastic or full_batch")->capture_default_str();
        app.add_option("--trace-every", cfg.trace_every, "Loss trace interval (0 = auto)")->capture_default_str();
    }

    TrainConfig config() const {
        TrainConfig c = cfg;
        c.mode = parse_train_mode(mode);
        c.validate();
        return c;
    }
};

json spec_json(const ModelSpec& s) {
    return json{{"variant", to_string(s.variant)}, {"rank", s.regression_rank}, {"knots", s.knots},
                {"hidden", s.hidden_units},        {"mf", s.mf_enabled},        {"mf_rank", s.mf_rank}};
}

json config_json(const TrainConfig& c) {
    return json{{"lambda1", c.lambda1},       {"lambda2", c.lambda2},     {"minibatch", c.minibatch},
                {"iterations", c.iterations}, {"step_size", c.step_size}, {"restarts", c.restarts},
                {"seed", c.seed},             {"mode", to_string(c.mode)}};
}

std::unordered_map<std::string, StandardizationStats> read_stats(const fs::path& path) {
    auto in = open_input(path);
    std::unordered_map<std::string, StandardizationStats> out;
    std::string line;
    std::getline(in, line);
    if (line.rfind("series_id,mean,std", 0) != 0) throw Error(ErrorCode::format_error, "stats header must be series_id,mean,std");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id, mean, sd;
        std::getline(ss, id, ',');
        std::getline(ss, mean, ',');
        std::getline(ss, sd, ',');
        try {
            out[id] = {std::stod(mean), std::stod(sd)};
        } catch (const std::exception&) {
            throw Error(ErrorCode::format_error, "bad stats line: " + line);
        }
    }
    return out;
}

// `series_id,t,value[,value_natural]` over every in-extent sample of every series.
std::string forecast_csv(const ProfileMatrix& layout, const Matrix& values,
                         const std::unordered_map<std::string, StandardizationStats>* stats) {
    std::string text = stats ? "series_id,t,value,value_natural\n" : "series_id,t,value\n";
    for (const auto& blk : layout.index.blocks()) {
        const StandardizationStats* st = nullptr;
        if (stats) {
            auto it = stats->find(blk.id);
            if (it == stats->end()) throw Error(ErrorCode::not_found, "no standardization stats for '" + blk.id + "'");
            st = &it->second;
        }
        for (std::size_t t = 0; t < blk.length; ++t) {
            std::size_t pos = blk.start_offset + t;
            double v = values(static_cast<Eigen::Index>(pos % layout.period),
                              static_cast<Eigen::Index>(blk.first_column + pos / layout.period));
            text += blk.id + ',' + std::to_string(t) + ',' + fmt(v);
            if (st) text += ',' + fmt(destandardize(v, *st));
            text += '\n';
        }
    }
    return text;
}

Matrix read_forecast_csv(const fs::path& path, const ProfileMatrix& layout) {
    auto in = open_input(path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("series_id,t,value", 0) != 0) throw Error(ErrorCode::format_error, "forecast header must start with series_id,t,value");
    Matrix out = Matrix::Constant(layout.rows(), layout.cols(), std::numeric_limits<double>::quiet_NaN());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id, t_text, v_text;
        std::getline(ss, id, ',');
        std::getline(ss, t_text, ',');
        std::getline(ss, v_text, ',');
        std::size_t t;
        double v;
        try {
            t = std::stoull(t_text);
            v = std::stod(v_text);
        } catch (const std::exception&) {
            throw Error(ErrorCode::format_error, "bad forecast line: " + line);
        }
        const auto& blk = layout.index.block(id);
        if (t >= blk.length) throw Error(ErrorCode::shape_error, "forecast t beyond series '" + id + "'");
        std::size_t pos = blk.start_offset + t;
        out(static_cast<Eigen::Index>(pos % layout.period), static_cast<Eigen::Index>(blk.first_column + pos / layout.period)) = v;
    }
    return out;
}

Grid read_grid(const fs::path& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format_error, std::string("grid file: ") + e.what());
    }
    auto values = [&](const char* key) -> std::vector<double> {
        if (!j.contains(key)) return {};
        const auto& v = j.at(key);
        if (v.is_object()) return log_grid(v.at("lo").get<double>(), v.at("hi").get<double>(), v.at("n").get<std::size_t>());
        return v.get<std::vector<double>>();
    };
    Grid g;
    try {
        g.lambda1 = values("lambda1");
        g.lambda2 = values("lambda2");
        if (j.contains("knots")) g.knots = j.at("knots").get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format_error, std::string("grid file: ") + e.what());
    }
    return g;
}

// ---------------------------------------------------------------- commands

struct IngestArgs {
    std::string series, offsets, metadata, out_dir, calendar_start;
    std::size_t period = 0;
    int align_weekday = -1;
    bool standardize = false;
};

void cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
    std::unordered_map<std::string, std::size_t> offsets;
    if (!a.offsets.empty()) {
        auto in = open_input(a.offsets);
        offsets = read_offsets(in);
    }
    auto in = open_input(a.series);
    auto raw = read_long_format(in, offsets);

    if (a.align_weekday >= 0) {
        if (a.align_weekday > 6) throw Error(ErrorCode::invalid_argument, "weekday must be 0 (Sunday) .. 6");
        int y = 0;
        unsigned m = 0, d = 0;
        if (std::sscanf(a.calendar_start.c_str(), "%d-%u-%u", &y, &m, &d) != 3)
            throw Error(ErrorCode::invalid_argument, "--calendar-start must be YYYY-MM-DD");
        std::chrono::year_month_day start{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
        for (auto& s : raw)
            s = align_to_weekday(s, std::chrono::weekday{static_cast<unsigned>(a.align_weekday)}, start, a.period);
    }

    json warnings = json::array();
    std::string stats_text = "series_id,mean,std\n";
    if (a.standardize) {
        std::vector<RawSeries> kept;
        for (auto& s : raw) {
            try {
                auto [z, st] = standardize(s);
                stats_text += z.id + ',' + fmt(st.mean) + ',' + fmt(st.std) + '\n';
                kept.push_back(std::move(z));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::degenerate_series) throw;
                err << "warning: dropping series '" << s.id << "': " << e.what() << '\n';
                warnings.push_back("dropped " + s.id + ": " + e.what());
            }
        }
        raw = std::move(kept);
    }
    ProfileMatrix pm = reorganize(raw, a.period);

    auto meta_in = open_input(a.metadata);
    auto docs = read_documents_jsonl(meta_in);
    // Only series that made it into the matrix take part in the corpus.
    std::erase_if(docs, [&](const Document& d) { return pm.index.find(d.series_id) == nullptr; });
    MetadataMatrix meta = replicate_for_years(tfidf_featurize(docs), pm.index);

    fs::path dir(a.out_dir);
    ensure_dir(dir);
    save_profile_matrix(pm, dir / "profile.sfpm");
    save_metadata(meta, dir / "metadata.sfsm", dir / "vocab.txt");
    if (a.standardize) io::write_atomic(dir / "stats.csv", stats_text);
    json summary{{"series", pm.index.blocks().size()}, {"period", pm.period},       {"columns", pm.cols()},
                 {"observed", pm.observed_count()},    {"vocabulary", meta.dim()},  {"nnz_ratio", meta.nnz_ratio()},
                 {"standardized", a.standardize},      {"warnings", warnings}};
    write_json(dir / "ingest.json", summary);
    out << summary.dump(2) << '\n';
}

struct SynthArgs {
    SyntheticDims dims;
    SyntheticOptions opt;
    std::string variant = "low_rank";
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string out_dir;
};

void cmd_synth(SynthArgs a, std::ostream& out) {
    a.opt.variant = parse_variant(a.variant);
    auto ds = generate_synthetic(a.dims, a.noise, a.seed, a.opt);
    fs::path dir(a.out_dir);
    ensure_dir(dir);
    save_profile_matrix(ds.profiles, dir / "profile.sfpm");
    save_metadata(ds.meta, dir / "metadata.sfsm", dir / "vocab.txt");
    save_model(ds.truth, dir / "truth.sfmd");
    std::string csv = "series_id,t,value\n";
    for (const auto& s : ds.series)
        for (std::size_t t = 0; t < s.values.size(); ++t) csv += s.id + ',' + std::to_string(t) + ',' + fmt(s.values[t]) + '\n';
    io::write_atomic(dir / "series.csv", csv);
    json manifest{{"command", "synth"},
                  {"seed", a.seed},
                  {"noise_std", a.noise},
                  {"dims", {{"T", a.dims.T}, {"N", a.dims.N}, {"m", a.dims.m}, {"k", a.dims.k}, {"mf_rank", a.dims.mf_rank}}},
                  {"options",
                   {{"variant", a.variant},
                    {"mf", a.opt.mf_enabled},
                    {"smooth", a.opt.smooth},
                    {"years_per_series", a.opt.years_per_series},
                    {"density", a.opt.density}}},
                  {"files", {{"profile", "profile.sfpm"}, {"metadata", "metadata.sfsm"}, {"truth", "truth.sfmd"}, {"series", "series.csv"}}}};
    write_json(dir / "manifest.json", manifest);
    out << manifest.dump(2) << '\n';
}

struct SplitArgs {
    std::string scenario, data, out_dir;
    std::uint64_t seed = 0;
    double holdout = 0.25;
    std::size_t prefix = 8;
    double fraction = 0.2;
    double mean_len = 0.0; // 0 = T/2
};

void cmd_split(const SplitArgs& a, std::ostream& out, std::ostream& err) {
    ProfileMatrix pm = load_profile_matrix(a.data);
    json params{{"seed", a.seed}};
    Scenario sc;
    std::vector<std::string> ids;
    for (const auto& blk : pm.index.blocks()) ids.push_back(blk.id);

    if (a.scenario == "long_range") {
        sc = split_long_range(pm);
    } else if (a.scenario == "cold_start" || a.scenario == "warm_start") {
        auto split = split_cold_start(ids, a.holdout, a.seed);
        params["holdout_fraction"] = a.holdout;
        params["test_series"] = split.test_ids;
        if (a.scenario == "warm_start") {
            params["prefix"] = a.prefix;
            sc = split_warm_start(pm, split, a.prefix);
        } else {
            sc = cold_start_scenario(pm, split);
        }
    } else if (a.scenario == "missing_uniform") {
        params["fraction"] = a.fraction;
        ProfileMatrix train = mask_uniform(pm, a.fraction, a.seed);
        Mask eval = pm.mask && !train.mask;
        sc = Scenario{std::move(train), std::move(eval), {}};
    } else if (a.scenario == "missing_contiguous") {
        double mean_len = a.mean_len > 0.0 ? a.mean_len : static_cast<double>(pm.period) / 2.0;
        params["mean_len"] = mean_len;
        sc = mask_contiguous(pm, mean_len, a.seed);
    } else {
        throw Error(ErrorCode::invalid_argument, "unknown scenario '" + a.scenario + "'");
    }
    for (const auto& w : sc.warnings) err << "warning: " << w << '\n';

    fs::path dir(a.out_dir);
    ensure_dir(dir);
    save_profile_matrix(sc.train, dir / "train.sfpm");
    save_profile_matrix(pm.with_mask(sc.eval_mask), dir / "truth.sfpm");
    json manifest{{"command", "split"},
                  {"scenario", a.scenario},
                  {"source", a.data},
                  {"parameters", params},
                  {"train_observed", sc.train.observed_count()},
                  {"eval_cells", static_cast<std::size_t>(sc.eval_mask.count())},
                  {"warnings", sc.warnings},
                  {"files", {{"train", "train.sfpm"}, {"truth", "truth.sfpm"}}}};
    write_json(dir / "manifest.json", manifest);
    out << manifest.dump(2) << '\n';
}

struct TrainCmdArgs {
    std::string data, metadata, out, report, trace;
};

void cmd_train(const TrainCmdArgs& a, const SpecArgs& sa, const TrainArgs& ta, std::ostream& out) {
    ModelSpec spec = sa.spec();
    TrainConfig cfg = ta.config();
    ProfileMatrix pm = load_profile_matrix(a.data);
    MetadataMatrix meta = load_metadata(a.metadata);
    FitResult result;
    try {
        result = fit(spec, pm, meta, cfg);
    } catch (const DivergenceError& e) {
        if (!a.trace.empty()) {
            std::ostringstream tr;
            write_loss_trace(e.report(), tr);
            io::write_atomic(a.trace, tr.str());
        }
        throw;
    }
    save_model(result.params, a.out);
    json losses = json::array();
    for (double l : result.report.restart_losses) losses.push_back(std::isfinite(l) ? json(l) : json("diverged"));
    json report{{"spec", spec_json(spec)},
                {"config", config_json(cfg)},
                {"final_loss", result.report.final_loss},
                {"best_restart", result.report.best_restart},
                {"restart_losses", losses},
                {"wall_time", result.report.wall_time},
                {"cold_start_applicable", cold_start_applicable(spec)}};
    if (!a.report.empty()) write_json(a.report, report);
    if (!a.trace.empty()) {
        std::ostringstream tr;
        write_loss_trace(result.report, tr);
        io::write_atomic(a.trace, tr.str());
    }
    out << report.dump(2) << '\n';
}

struct TuneArgs {
    std::string data, metadata, grid, report, chosen;
    std::size_t folds = 5;
    std::uint64_t cv_seed = 0;
    bool single_holdout = false;
    std::string rho = "inf";
};

void cmd_tune(const TuneArgs& a, const SpecArgs& sa, const TrainArgs& ta, std::ostream& out) {
    ModelSpec spec = sa.spec();
    TrainConfig cfg = ta.config();
    ProfileMatrix pm = load_profile_matrix(a.data);
    MetadataMatrix meta = load_metadata(a.metadata);
    CvOptions opts{a.folds, a.cv_seed, a.single_holdout, parse_rho(a.rho)};
    CvResult cv = two_stage_cv(spec, pm, meta, read_grid(a.grid), cfg, opts);

    std::ostringstream report;
    write_cv_report(cv, report);
    if (!a.report.empty()) io::write_atomic(a.report, report.str());

    std::string ini = "[train]\nvariant = " + std::string(to_string(spec.variant)) + "\nlambda1 = " + fmt(cv.lambda1) + "\n";
    if (cv.lambda2) ini += "lambda2 = " + fmt(*cv.lambda2) + "\n";
    if (cv.knots) ini += "knots = " + std::to_string(*cv.knots) + "\n";
    if (!a.chosen.empty()) io::write_atomic(a.chosen, ini);

    json summary{{"lambda1", cv.lambda1},
                 {"lambda2", cv.lambda2 ? json(*cv.lambda2) : json(nullptr)},
                 {"knots", cv.knots ? json(*cv.knots) : json(nullptr)},
                 {"candidates", cv.candidates.size()}};
    out << summary.dump(2) << '\n';
}

struct ForecastArgs {
    std::string mode, model, data, metadata, stats, out, summary, weighting = "inverse_distance";
    double lambda2 = 1.0;
    std::size_t k = 10;
};

void cmd_forecast(const ForecastArgs& a, std::ostream& out, std::ostream& err) {
    ProfileMatrix pm = load_profile_matrix(a.data);
    json summary{{"mode", a.mode}, {"columns", pm.cols()}};
    json warnings = json::array();
    Matrix values;

    auto need_model = [&] {
        if (a.model.empty()) throw Error(ErrorCode::invalid_argument, "--model is required for mode " + a.mode);
        if (a.metadata.empty()) throw Error(ErrorCode::invalid_argument, "--metadata is required for mode " + a.mode);
        return std::pair{load_model(a.model), load_metadata(a.metadata)};
    };

    if (a.mode == "cold") {
        auto [params, meta] = need_model();
        if (meta.cols() != pm.cols()) throw Error(ErrorCode::shape_error, "metadata columns differ from data columns");
        values = forecast_cold_all(params, meta);
        summary["cold_start_applicable"] = cold_start_applicable(params.spec);
        if (!cold_start_applicable(params.spec)) warnings.push_back("model has no regression term; cold forecast is the bias only");
    } else if (a.mode == "warm") {
        auto [params, meta] = need_model();
        auto batch = forecast_warm_all(params, pm, meta, a.lambda2);
        values = std::move(batch.values);
        summary["cold_fallbacks"] = batch.cold_fallbacks;
        if (batch.cold_fallbacks > 0)
            warnings.push_back(std::to_string(batch.cold_fallbacks) + " columns had no observations and use the cold forecast");
    } else if (a.mode == "impute") {
        auto [params, meta] = need_model();
        values = impute(params, pm, meta);
    } else if (a.mode == "avg_py" || a.mode == "knn") {
        values = Matrix::Zero(pm.rows(), pm.cols());
        std::size_t unavailable = 0;
        MetadataMatrix series_meta;
        if (a.mode == "knn") {
            if (a.metadata.empty()) throw Error(ErrorCode::invalid_argument, "--metadata is required for mode knn");
            series_meta = per_series(load_metadata(a.metadata), pm.index);
        }
        KnnWeighting weighting = a.weighting == "uniform" ? KnnWeighting::uniform : KnnWeighting::inverse_distance;
        for (std::size_t s = 0; s < pm.index.blocks().size(); ++s) {
            const auto& blk = pm.index.blocks()[s];
            ProfileEstimate est;
            try {
                est = a.mode == "avg_py"
                          ? avg_py(pm, blk.id)
                          : knn_forecast(series_meta.column(static_cast<Eigen::Index>(s)), series_meta, pm, a.k, weighting, blk.id);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::no_observations) throw;
                ++unavailable;
                continue;
            }
            for (std::size_t u = 0; u < blk.years; ++u) values.col(static_cast<Eigen::Index>(blk.first_column + u)) = est.values;
        }
        summary["series_without_history"] = unavailable;
        if (unavailable > 0) warnings.push_back(std::to_string(unavailable) + " series have no training data; forecast set to 0");
    } else {
        throw Error(ErrorCode::invalid_argument, "unknown forecast mode '" + a.mode + "'");
    }

    std::unordered_map<std::string, StandardizationStats> stats;
    if (!a.stats.empty()) stats = read_stats(a.stats);
    io::write_atomic(a.out, forecast_csv(pm, values, a.stats.empty() ? nullptr : &stats));
    for (const auto& w : warnings) err << "warning: " << w.get<std::string>() << '\n';
    summary["warnings"] = warnings;
    summary["forecast_file"] = a.out;
    summary["natural_scale"] = !a.stats.empty();
    if (!a.summary.empty()) write_json(a.summary, summary);
    out << summary.dump(2) << '\n';
}

struct EvaluateArgs {
    std::string forecast, truth, out, rho = "inf", metric = "mse";
};

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    ProfileMatrix truth = load_profile_matrix(a.truth);
    Matrix pred = read_forecast_csv(a.forecast, truth);
    for (Eigen::Index c = 0; c < truth.cols(); ++c)
        for (Eigen::Index j = 0; j < truth.rows(); ++j)
            if (truth.mask(j, c) && !std::isfinite(pred(j, c)))
                throw Error(ErrorCode::shape_error, "forecast lacks an evaluated cell of series '" +
                                                        truth.index.block_of_column(static_cast<std::size_t>(c)).id + "'");
    MetricConfig cfg{parse_rho(a.rho), parse_metric_kind(a.metric), truth.mask};
    std::string report = metric_report_json(cfg, apst_detailed(truth.data, pred, cfg));
    if (!a.out.empty()) io::write_atomic(a.out, report);
    out << report;
}

void emit_error(std::ostream& err, std::string_view code, std::string_view message) {
    err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"sfcast: seasonal profile forecasting with regression + matrix factorization"};
    app.set_config("--config", "", "INI file; [<subcommand>] sections supply option values, flags override");
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Long-format series + metadata JSONL -> containers");
    c_ingest->add_option("--series", ingest.series, "series_id,t,value file")->required();
    c_ingest->add_option("--offsets", ingest.offsets, "series_id,start_offset sidecar");
    c_ingest->add_option("--metadata", ingest.metadata, "JSON lines with series_id and tokens")->required();
    c_ingest->add_option("--period", ingest.period, "Samples per period T")->required();
    c_ingest->add_option("--standardize", ingest.standardize, "Zero-mean / unit-std each series")->capture_default_str();
    c_ingest->add_option("--align-weekday", ingest.align_weekday, "Start each period on this weekday (0 = Sunday)");
    c_ingest->add_option("--calendar-start", ingest.calendar_start, "Date of t = 0 (YYYY-MM-DD), with --align-weekday");
    c_ingest->add_option("--out-dir", ingest.out_dir)->required();

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a planted synthetic dataset");
    c_synth->add_option("--T", synth.dims.T)->capture_default_str();
    c_synth->add_option("--N", synth.dims.N, "Year-columns")->capture_default_str();
    c_synth->add_option("--m", synth.dims.m)->capture_default_str();
    c_synth->add_option("--k", synth.dims.k)->capture_default_str();
    c_synth->add_option("--mf-rank", synth.dims.mf_rank)->capture_default_str();
    c_synth->add_option("--variant", synth.variant)->capture_default_str();
    c_synth->add_option("--mf", synth.opt.mf_enabled)->capture_default_str();
    c_synth->add_option("--smooth", synth.opt.smooth)->capture_default_str();
    c_synth->add_option("--years", synth.opt.years_per_series)->capture_default_str();
    c_synth->add_option("--density", synth.opt.density)->capture_default_str();
    c_synth->add_option("--noise", synth.noise)->capture_default_str();
    c_synth->add_option("--seed", synth.seed)->capture_default_str();
    c_synth->add_option("--out-dir", synth.out_dir)->required();

    SplitArgs split;
    auto* c_split = app.add_subcommand("split", "Emit train/truth matrices for an experiment setup");
    c_split->add_option("scenario", split.scenario,
                        "long_range, cold_start, warm_start, missing_uniform, missing_contiguous")
        ->required();
    c_split->add_option("--data", split.data, "Source profile.sfpm")->required();
    c_split->add_option("--seed", split.seed)->capture_default_str();
    c_split->add_option("--holdout", split.holdout, "Held-out series fraction")->capture_default_str();
    c_split->add_option("--prefix", split.prefix, "Warm-start observed prefix")->capture_default_str();
    c_split->add_option("--fraction", split.fraction, "Uniform missing fraction")->capture_default_str();
    c_split->add_option("--mean-len", split.mean_len, "Mean contiguous chunk length (default T/2)");
    c_split->add_option("--out-dir", split.out_dir)->required();

    TrainCmdArgs train;
    SpecArgs train_spec;
    TrainArgs train_cfg;
    auto* c_train = app.add_subcommand("train", "Fit a model");
    c_train->fallthrough();
    c_train->add_option("--data", train.data, "Training profile.sfpm")->required();
    c_train->add_option("--metadata", train.metadata, "metadata.sfsm")->required();
    train_spec.add(*c_train);
    train_cfg.add(*c_train);
    c_train->add_option("--out", train.out, "Model container")->required();
    c_train->add_option("--report", train.report, "Fit report JSON");
    c_train->add_option("--trace", train.trace, "Loss trace CSV");

    TuneArgs tune;
    SpecArgs tune_spec;
    TrainArgs tune_cfg;
    auto* c_tune = app.add_subcommand("tune", "Two-stage cross-validation");
    c_tune->fallthrough();
    c_tune->add_option("--data", tune.data)->required();
    c_tune->add_option("--metadata", tune.metadata)->required();
    c_tune->add_option("--grid", tune.grid, "Grid JSON")->required();
    tune_spec.add(*c_tune);
    tune_cfg.add(*c_tune);
    c_tune->add_option("--folds", tune.folds)->capture_default_str();
    c_tune->add_option("--cv-seed", tune.cv_seed)->capture_default_str();
    c_tune->add_option("--single-holdout", tune.single_holdout)->capture_default_str();
    c_tune->add_option("--rho", tune.rho)->capture_default_str();
    c_tune->add_option("--report", tune.report, "CV report CSV");
    c_tune->add_option("--chosen", tune.chosen, "Chosen settings as an INI usable with --config");

    ForecastArgs forecast;
    auto* c_forecast = app.add_subcommand("forecast", "Produce forecasts");
    c_forecast->add_option("mode", forecast.mode, "cold, warm, impute, avg_py, knn")->required();
    c_forecast->add_option("--model", forecast.model);
    c_forecast->add_option("--data", forecast.data, "Profile layout / observed cells")->required();
    c_forecast->add_option("--metadata", forecast.metadata);
    c_forecast->add_option("--lambda2", forecast.lambda2, "Ridge weight for warm-start")->capture_default_str();
    c_forecast->add_option("--k", forecast.k, "Neighbors for knn")->capture_default_str();
    c_forecast->add_option("--weighting", forecast.weighting, "knn weights: inverse_distance or uniform")->capture_default_str();
    c_forecast->add_option("--stats", forecast.stats, "stats.csv for natural-scale output");
    c_forecast->add_option("--out", forecast.out)->required();
    c_forecast->add_option("--summary", forecast.summary);

    EvaluateArgs evaluate;
    auto* c_evaluate = app.add_subcommand("evaluate", "Score forecasts against a truth matrix");
    c_evaluate->add_option("--forecast", evaluate.forecast)->required();
    c_evaluate->add_option("--truth", evaluate.truth, "truth.sfpm; its mask selects scored cells")->required();
    c_evaluate->add_option("--rho", evaluate.rho)->capture_default_str();
    c_evaluate->add_option("--metric", evaluate.metric, "mse or mae")->capture_default_str();
    c_evaluate->add_option("--out", evaluate.out, "Metric JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        emit_error(err, "usage", e.what());
        return 2;
    }

    try {
        if (*c_ingest) cmd_ingest(ingest, out, err);
        else if (*c_synth) cmd_synth(synth, out);
        else if (*c_split) cmd_split(split, out, err);
        else if (*c_train) cmd_train(train, train_spec, train_cfg, out);
        else if (*c_tune) cmd_tune(tune, tune_spec, tune_cfg, out);
        else if (*c_forecast) cmd_forecast(forecast, out, err);
        else if (*c_evaluate) cmd_evaluate(evaluate, out);
    } catch (const Error& e) {
        emit_error(err, to_string(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error(err, "internal", e.what());
        return 1;
    }
    return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"sfcast"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace sfcast::cli

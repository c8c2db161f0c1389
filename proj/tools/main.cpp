// fdd: command-line front end for the functional depth library.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdd/core.hpp"
#include "fdd/depths.hpp"
#include "fdd/diagnostics.hpp"
#include "fdd/gp_sim.hpp"
#include "fdd/lightcurve.hpp"
#include "fdd/parallel.hpp"
#include "fdd/robust.hpp"

namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(s)) {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(item, &used);
        if (used != item.size() || v == 0) throw fdd::DomainError("invalid size '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

/// Explicit seed, or a fresh one announced on stderr so the run can be replayed.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
    if (seed) return *seed;
    std::random_device rd;
    const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "fdd: no --seed given, using " << s << '\n';
    return s;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fdd::Error("cannot write " + path);
    out << text;
    if (!out) throw fdd::Error("error while writing " + path);
}

std::string config_comment(const json& config) { return "fdd " + config.dump(); }

/// CSV with the run configuration on a leading '#' line.
std::string with_config(const json& config, const std::string& csv) {
    return "# " + config_comment(config) + "\n" + csv;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_file(path, text);
}

fdd::DepthMethod make_method(const std::string& token, std::size_t n_proj, std::uint64_t seed,
                             const std::string& quadrature, const std::string& directions) {
    fdd::DepthMethod m;
    m.kind = fdd::parse_depth_kind(token);
    m.n_proj = n_proj;
    m.seed = seed;
    if (quadrature == "trapezoid")
        m.quadrature = fdd::Quadrature::Trapezoid;
    else if (quadrature == "uniform")
        m.quadrature = fdd::Quadrature::Uniform;
    else
        throw fdd::DomainError("unknown quadrature '" + quadrature + "'");
    if (directions == "gaussian")
        m.directions = fdd::ProjectionFamily::Gaussian;
    else if (directions == "brownian")
        m.directions = fdd::ProjectionFamily::Brownian;
    else
        throw fdd::DomainError("unknown projection family '" + directions + "'");
    if (m.n_proj == 0) throw fdd::DomainError("--n-proj must be at least 1");
    return m;
}

fdd::DepthVector run_depth(const fdd::FunctionalDataset& query, const fdd::FunctionalDataset& reference,
                           const fdd::DepthMethod& m, unsigned threads) {
    if (m.kind == fdd::DepthKind::RandomTukey) {
        const auto proj = fdd::draw_projections(reference.grid(), m.n_proj, m.seed, m.directions, m.quadrature);
        auto d = fdd::random_tukey_depth(query, reference, proj, threads);
        d.seed = m.seed;
        return d;
    }
    return fdd::compute_depth(query, reference, m, threads);
}

std::vector<fdd::ModelSpec> model_list(const std::string& models, std::optional<double> magnitude,
                                       std::optional<double> q, std::size_t n) {
    std::vector<fdd::ModelSpec> out;
    for (const auto& token : split_list(models)) {
        auto spec = fdd::ModelSpec::preset(fdd::parse_model_id(token), magnitude.value_or(5.0));
        if (q) spec.q = *q;
        spec.n = n;
        spec.validate();
        out.push_back(spec);
    }
    if (out.empty()) throw fdd::DomainError("no models selected");
    return out;
}

json models_json(const std::vector<fdd::ModelSpec>& models) {
    json j = json::array();
    for (const auto& m : models) j.push_back(fdd::to_json(m));
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional data depths: computation, simulation benchmarks and diagnostics"};
    app.require_subcommand(1);
    unsigned threads = fdd::default_threads();
    app.add_option("--threads", threads, "Worker threads (default: FDD_THREADS or hardware concurrency)")
        ->check(CLI::Range(1u, 1024u));

    // depth
    auto* depth = app.add_subcommand("depth", "Depths (and ranks) of every curve in a dataset");
    std::string d_method, d_in, d_ref, d_out, d_quad = "trapezoid", d_dirs = "gaussian";
    std::size_t d_nproj = 250;
    std::optional<std::uint64_t> d_seed;
    depth->add_option("--method", d_method, "linf, bd, mbd, hrd, mhrd, rtd or spatd")->required();
    depth->add_option("--in", d_in, "Dataset CSV")->required()->check(CLI::ExistingFile);
    depth->add_option("--reference", d_ref, "Reference dataset CSV (default: the input itself)")
        ->check(CLI::ExistingFile);
    depth->add_option("--out", d_out, "Output CSV (default: stdout)");
    depth->add_option("--n-proj", d_nproj, "Random projections for rtd");
    depth->add_option("--seed", d_seed, "Seed for rtd projections and rank tie-breaking");
    depth->add_option("--quadrature", d_quad, "trapezoid or uniform (rtd, spatd)");
    depth->add_option("--directions", d_dirs, "gaussian or brownian (rtd)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Draw a dataset from a simulation model or the light-curve analog");
    std::string s_model = "M0", s_out, s_raw_dir;
    std::optional<double> s_M, s_q;
    std::size_t s_n = 50;
    std::optional<std::uint64_t> s_seed;
    double s_infl = 0.015, s_defl = 0.015, s_shift = 0.015;
    std::size_t s_obs = 120;
    simulate->add_option("--model", s_model, "M0..M9, lc (preprocessed light curves) or lc-raw (photometry)");
    simulate->add_option("--M", s_M, "Contamination magnitude (M1-M4)");
    simulate->add_option("--q", s_q, "Contamination probability");
    simulate->add_option("--n", s_n, "Number of curves")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", s_seed, "Random seed");
    simulate->add_option("--out", s_out, "Dataset CSV (M*, lc); a JSON sidecar is written next to it");
    simulate->add_option("--raw-dir", s_raw_dir, "Output directory for lc-raw (star files + manifest.csv)");
    simulate->add_option("--inflated", s_infl, "lc: fraction of amplitude-inflated curves");
    simulate->add_option("--deflated", s_defl, "lc: fraction of smooth low-amplitude curves");
    simulate->add_option("--shifted", s_shift, "lc: fraction of phase-shifted curves");
    simulate->add_option("--observations", s_obs, "lc-raw: epochs per star")->check(CLI::PositiveNumber);

    // mise
    auto* mise = app.add_subcommand("mise", "MISE of the mean, median and depth-trimmed means");
    std::string m_models = "M0,M1,M2,M3,M4", m_est, m_out, m_json;
    std::optional<double> m_M, m_q;
    std::size_t m_reps = 200, m_nproj = 250, m_n = 50;
    double m_alpha = 0.2;
    std::optional<std::uint64_t> m_seed;
    mise->add_option("--models", m_models, "Comma-separated model ids");
    mise->add_option("--M", m_M, "Contamination magnitude");
    mise->add_option("--q", m_q, "Contamination probability (default: model preset)");
    mise->add_option("--n", m_n, "Curves per sample")->check(CLI::PositiveNumber);
    mise->add_option("--reps", m_reps, "Monte Carlo replicates")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30));
    mise->add_option("--alpha", m_alpha, "Trimming fraction");
    mise->add_option("--n-proj", m_nproj, "Random projections for RTD");
    mise->add_option("--estimators", m_est, "Comma-separated subset of MEAN,MED,BD,MBD,HRD,MHRD,RTD,SPATD,LINFD");
    mise->add_option("--seed", m_seed, "Random seed");
    mise->add_option("--out", m_out, "Report CSV (default: stdout)");
    mise->add_option("--json", m_json, "Report JSON");

    // detect
    auto* detect = app.add_subcommand("detect", "Detection rate of one planted shape outlier");
    std::string t_models = "M5,M6,M7,M8,M9", t_methods = "bd,mbd,hrd,mhrd,rtd,spatd,linf", t_out, t_json,
                t_ranking = "counting";
    std::size_t t_reps = 200, t_nproj = 250, t_n = 50;
    double t_fraction = 0.2, t_shift = 0.0;
    std::optional<std::uint64_t> t_seed;
    detect->add_option("--models", t_models, "Comma-separated shape model ids");
    detect->add_option("--methods", t_methods, "Comma-separated depth methods");
    detect->add_option("--n", t_n, "Curves per sample")->check(CLI::Range(std::size_t{3}, std::size_t{1} << 20));
    detect->add_option("--reps", t_reps, "Monte Carlo replicates")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30));
    detect->add_option("--fraction", t_fraction, "Least-deep fraction counted as detected");
    detect->add_option("--shift", t_shift, "Constant added to the planted curve");
    detect->add_option("--ranking", t_ranking, "counting or random");
    detect->add_option("--n-proj", t_nproj, "Random projections for RTD");
    detect->add_option("--seed", t_seed, "Random seed");
    detect->add_option("--out", t_out, "Report CSV (default: stdout)");
    detect->add_option("--json", t_json, "Report JSON");

    // rankrank
    auto* rankrank = app.add_subcommand("rankrank", "Rank-rank stability of a depth across a random half split");
    std::string r_method, r_in, r_out, r_svg, r_quad = "trapezoid", r_dirs = "gaussian";
    std::size_t r_nproj = 250, r_k = 0;
    std::optional<std::uint64_t> r_seed, r_tie;
    rankrank->add_option("--method", r_method, "Depth method")->required();
    rankrank->add_option("--in", r_in, "Dataset CSV")->required()->check(CLI::ExistingFile);
    rankrank->add_option("--out", r_out, "Rank pairs CSV (default: stdout)");
    rankrank->add_option("--svg", r_svg, "Scatter plot SVG");
    rankrank->add_option("--k", r_k, "Also report normalized cross ranks of the k deepest curves");
    rankrank->add_option("--n-proj", r_nproj, "Random projections for rtd");
    rankrank->add_option("--quadrature", r_quad, "trapezoid or uniform");
    rankrank->add_option("--directions", r_dirs, "gaussian or brownian");
    rankrank->add_option("--seed", r_seed, "Split seed (also seeds rtd projections)");
    rankrank->add_option("--tie-seed", r_tie, "Tie-breaking seed (default: --seed)");

    // lc-prep
    auto* lcprep = app.add_subcommand("lc-prep", "Fold, smooth and align light curves listed in a manifest");
    std::string l_manifest, l_out;
    std::size_t l_knots = 15, l_grid = 100;
    lcprep->add_option("--manifest", l_manifest, "Manifest CSV star_id,period,path")->required()->check(CLI::ExistingFile);
    lcprep->add_option("--out", l_out, "Dataset CSV (default: stdout)");
    lcprep->add_option("--knots", l_knots, "Spline knots including both boundary knots")->check(CLI::Range(3, 1000));
    lcprep->add_option("--grid-size", l_grid, "Phase grid points k/G, k = 0..G-1")->check(CLI::Range(2, 100000));

    // bench
    auto* bench = app.add_subcommand("bench", "Wall-clock scaling of the depth routines");
    std::string b_out, b_json;
    std::string b_mbd = "250,500,1000,2000,4000", b_naive = "50,100,200", b_linf = "100,200,400,800",
                b_bd = "40,57,80,113,160";
    std::size_t b_points = 50, b_repeats = 3;
    std::optional<std::uint64_t> b_seed;
    bench->add_option("--mbd", b_mbd, "Sample sizes for MBD (fast)");
    bench->add_option("--mbd-naive", b_naive, "Sample sizes for MBD (naive); empty to skip");
    bench->add_option("--linf", b_linf, "Sample sizes for the L-infinity depth");
    bench->add_option("--bd", b_bd, "Sample sizes for BD3; empty to skip");
    bench->add_option("--points", b_points, "Grid points")->check(CLI::Range(2, 100000));
    bench->add_option("--repeats", b_repeats, "Timed repetitions per size (median reported)")->check(CLI::Range(1, 1000));
    bench->add_option("--seed", b_seed, "Data seed");
    bench->add_option("--out", b_out, "Timings CSV (default: stdout)");
    bench->add_option("--json", b_json, "Timings and slopes JSON");

    // asymptotics
    auto* asym = app.add_subcommand("asymptotics", "Law of large numbers and CLT checks of the L-infinity depth");
    std::string a_model = "M0", a_schedule = "100,300,1000,3000,10000", a_out;
    double a_offset = 0.0;
    std::size_t a_ref = 100000, a_n = 500, a_reps = 1000, a_plugin = 100000;
    std::optional<std::uint64_t> a_seed;
    asym->add_option("--model", a_model, "Model generating P");
    asym->add_option("--offset", a_offset, "Query curve is the model mean plus this constant");
    asym->add_option("--schedule", a_schedule, "Sample sizes for the law of large numbers trace");
    asym->add_option("--n-reference", a_ref, "Draws for the reference depth")->check(CLI::PositiveNumber);
    asym->add_option("--n", a_n, "Sample size for the CLT replicates")->check(CLI::PositiveNumber);
    asym->add_option("--reps", a_reps, "CLT replicates")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30));
    asym->add_option("--n-plugin", a_plugin, "Draws for plug-in moments")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
    asym->add_option("--seed", a_seed, "Random seed");
    asym->add_option("--out", a_out, "Report JSON (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (depth->parsed()) {
            const std::uint64_t seed = resolve_seed(d_seed);
            const auto method = make_method(d_method, d_nproj, seed, d_quad, d_dirs);
            const auto query = fdd::load_dataset(d_in);
            const auto reference = d_ref.empty() ? query : fdd::load_dataset(d_ref);
            const auto dv = run_depth(query, reference, method, threads);
            const auto ranks = fdd::rank_curves(dv, seed);
            const json config = {{"subcommand", "depth"}, {"method", d_method},    {"in", d_in},
                                 {"reference", d_ref},    {"n_proj", d_nproj},     {"seed", seed},
                                 {"quadrature", d_quad},  {"directions", d_dirs}};
            std::string csv = "label,depth,rank\n";
            for (std::size_t i = 0; i < query.size(); ++i)
                csv += query.labels()[i] + "," + fdd::format_real(dv.values[i]) + "," +
                       std::to_string(ranks.ranks[i]) + "\n";
            emit(d_out, with_config(config, csv));
        } else if (simulate->parsed()) {
            const std::uint64_t seed = resolve_seed(s_seed);
            json config = {{"subcommand", "simulate"}, {"model", s_model}, {"n", s_n}, {"seed", seed}};
            if (s_model == "lc-raw") {
                if (s_raw_dir.empty()) throw fdd::DomainError("lc-raw needs --raw-dir");
                fdd::save_light_curves(fdd::synth_raw_lightcurves(s_n, seed, s_obs), s_raw_dir);
                config["observations"] = s_obs;
                write_file(s_raw_dir + "/run.json", config.dump(2) + "\n");
            } else if (s_model == "lc") {
                if (s_out.empty()) throw fdd::DomainError("simulate needs --out");
                const auto syn = fdd::synth_lightcurves(s_n, {s_infl, s_defl, s_shift}, seed);
                config["inflated"] = s_infl;
                config["deflated"] = s_defl;
                config["shifted"] = s_shift;
                fdd::save_dataset(syn.data, s_out, config_comment(config));
                static const char* names[] = {"inlier", "inflated", "deflated", "shifted"};
                json kinds = json::array();
                for (auto k : syn.kinds) kinds.push_back(names[static_cast<int>(k)]);
                write_file(s_out + ".json", json{{"config", config}, {"kinds", kinds}}.dump(2) + "\n");
            } else {
                if (s_out.empty()) throw fdd::DomainError("simulate needs --out");
                const auto spec = model_list(s_model, s_M, s_q, s_n).front();
                const auto sample = fdd::ModelSampler(spec).generate(seed);
                config["spec"] = fdd::to_json(spec);
                fdd::save_dataset(sample.data, s_out, config_comment(config));
                json flags = json::array();
                for (bool b : sample.outliers) flags.push_back(b);
                write_file(s_out + ".json",
                           json{{"config", config}, {"truth", sample.truth}, {"outliers", flags}}.dump(2) + "\n");
            }
        } else if (mise->parsed()) {
            fdd::MiseConfig cfg;
            cfg.models = model_list(m_models, m_M, m_q, m_n);
            if (!m_est.empty()) {
                cfg.estimators.clear();
                for (const auto& e : split_list(m_est)) cfg.estimators.push_back(fdd::Estimator::parse(e));
            }
            cfg.n_reps = m_reps;
            cfg.seed = resolve_seed(m_seed);
            cfg.trim.alpha = m_alpha;
            cfg.trim.validate();
            cfg.n_proj = m_nproj;
            cfg.threads = threads;
            auto report = fdd::mise_experiment(cfg);
            const json config = {{"subcommand", "mise"}, {"models", models_json(cfg.models)}, {"reps", m_reps},
                                 {"seed", cfg.seed},     {"alpha", m_alpha},                  {"n_proj", m_nproj},
                                 {"estimators", m_est}};
            report.metadata["config"] = config;
            emit(m_out, with_config(config, report.to_csv()));
            if (!m_json.empty()) write_file(m_json, report.to_json().dump(2) + "\n");
        } else if (detect->parsed()) {
            fdd::DetectionConfig cfg;
            cfg.models = model_list(t_models, std::nullopt, std::nullopt, t_n);
            for (const auto& m : cfg.models)
                if (!fdd::is_shape_model(m.id)) throw fdd::DomainError("detect uses the shape models M5-M9");
            cfg.methods.clear();
            for (const auto& m : split_list(t_methods)) cfg.methods.push_back(fdd::parse_depth_kind(m));
            cfg.n_reps = t_reps;
            cfg.seed = resolve_seed(t_seed);
            if (!(t_fraction > 0.0 && t_fraction <= 1.0)) throw fdd::DomainError("--fraction must lie in (0, 1]");
            cfg.fraction = t_fraction;
            cfg.outlier_shift = t_shift;
            cfg.n_proj = t_nproj;
            cfg.threads = threads;
            if (t_ranking == "counting")
                cfg.ranking = fdd::DetectionRank::Counting;
            else if (t_ranking == "random")
                cfg.ranking = fdd::DetectionRank::RandomTies;
            else
                throw fdd::DomainError("--ranking must be counting or random");
            auto report = fdd::detection_experiment(cfg);
            const json config = {{"subcommand", "detect"}, {"models", models_json(cfg.models)},
                                 {"methods", t_methods},   {"reps", t_reps},
                                 {"seed", cfg.seed},       {"fraction", t_fraction},
                                 {"shift", t_shift},       {"ranking", t_ranking},
                                 {"n_proj", t_nproj}};
            report.metadata["config"] = config;
            emit(t_out, with_config(config, report.to_csv()));
            if (!t_json.empty()) write_file(t_json, report.to_json().dump(2) + "\n");
        } else if (rankrank->parsed()) {
            const std::uint64_t seed = resolve_seed(r_seed);
            const std::uint64_t tie = r_tie.value_or(seed);
            const auto method = make_method(r_method, r_nproj, seed, r_quad, r_dirs);
            const auto ds = fdd::load_dataset(r_in);
            const auto report = fdd::rank_rank(ds, method, seed, tie, threads);
            json config = {{"subcommand", "rankrank"}, {"method", r_method}, {"in", r_in},
                           {"n_proj", r_nproj},        {"seed", seed},       {"tie_seed", tie},
                           {"quadrature", r_quad},     {"directions", r_dirs}};
            json summary = report.to_json();
            summary["config"] = config;
            if (r_k > 0) summary["deepest_stability"] = fdd::deepest_stability(report, r_k);
            emit(r_out, with_config(config, report.to_csv(ds)));
            if (!r_svg.empty()) write_file(r_svg, fdd::rank_rank_svg(report));
            std::cerr << summary.dump() << '\n';
        } else if (lcprep->parsed()) {
            fdd::PrepOptions options;
            options.knots = l_knots;
            options.grid_size = l_grid;
            options.threads = threads;
            const auto ds = fdd::preprocess(fdd::load_manifest(l_manifest), options);
            const json config = {{"subcommand", "lc-prep"}, {"manifest", l_manifest}, {"knots", l_knots},
                                 {"grid_size", l_grid}};
            if (l_out.empty())
                std::cout << fdd::format_dataset(ds, config_comment(config));
            else
                fdd::save_dataset(ds, l_out, config_comment(config));
        } else if (bench->parsed()) {
            const std::uint64_t seed = resolve_seed(b_seed);
            std::vector<std::pair<fdd::BenchMethod, std::vector<std::size_t>>> plan;
            if (!b_mbd.empty()) plan.emplace_back(fdd::bench_method(fdd::DepthKind::ModifiedBand2), parse_sizes(b_mbd));
            if (!b_naive.empty()) plan.emplace_back(fdd::bench_mbd_naive(), parse_sizes(b_naive));
            if (!b_linf.empty()) plan.emplace_back(fdd::bench_method(fdd::DepthKind::Linf), parse_sizes(b_linf));
            if (!b_bd.empty()) plan.emplace_back(fdd::bench_method(fdd::DepthKind::Band3), parse_sizes(b_bd));
            const auto report = fdd::timing_bench(plan, b_points, seed, b_repeats);
            // Timings vary between runs; the configuration line is the reproducible part.
            const json config = {{"subcommand", "bench"}, {"mbd", b_mbd},      {"mbd_naive", b_naive},
                                 {"linf", b_linf},        {"bd", b_bd},        {"points", b_points},
                                 {"repeats", b_repeats},  {"seed", seed}};
            emit(b_out, with_config(config, report.to_csv()));
            json j = report.to_json();
            j["config"] = config;
            if (!b_json.empty()) write_file(b_json, j.dump(2) + "\n");
            for (const auto& s : report.series)
                std::cerr << s.method << " log-log slope " << fdd::format_real(s.slope) << '\n';
        } else if (asym->parsed()) {
            const std::uint64_t seed = resolve_seed(a_seed);
            const auto spec = model_list(a_model, std::nullopt, std::nullopt, 50).front();
            fdd::Curve x = spec.truth();
            for (double& v : x) v += a_offset;
            const auto source = fdd::model_source(spec, seed);
            const auto slln = fdd::slln_check(x, source, parse_sizes(a_schedule), a_ref, threads);
            const auto clt = fdd::clt_check(x, source, a_n, a_reps, a_plugin, threads);
            const json config = {{"subcommand", "asymptotics"}, {"model", fdd::to_json(spec)},
                                 {"offset", a_offset},          {"schedule", a_schedule},
                                 {"n_reference", a_ref},        {"n", a_n},
                                 {"reps", a_reps},              {"n_plugin", a_plugin},
                                 {"seed", seed}};
            const json out = {{"config", config}, {"slln", slln.to_json()}, {"clt", clt.to_json()}};
            emit(a_out, out.dump(2) + "\n");
        }
    } catch (const std::exception& e) {
        std::cerr << "fdd: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

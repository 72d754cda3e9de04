// delaykit: batch front door for series generation, embedding-lag
// selection, freerun prediction benchmarks and static SVG charts.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "delaykit/fft.hpp"
#include "delaykit/io.hpp"
#include "delaykit/lag_nonuniform.hpp"
#include "delaykit/lag_uniform.hpp"
#include "delaykit/predictor.hpp"
#include "delaykit/profiles.hpp"
#include "delaykit/rng.hpp"
#include "delaykit/series.hpp"
#include "delaykit/stops.hpp"
#include "delaykit/svg.hpp"
#include "delaykit/threadpool.hpp"

namespace dk = delaykit;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 1;
    int threads = 0;  // 0: all cores
    bool no_normalize = false;
    std::size_t max_points = 25000;
};

int resolve_thread_count(const GlobalOpts& g) {
    if (g.threads > 0) return g.threads;
    if (const char* env = std::getenv("DELAYKIT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return dk::resolve_threads(0);
}

// Input pipeline shared by the analysis commands: load, cap, normalize.
dk::TimeSeries load_input(const std::string& path, int column, double dt,
                          const GlobalOpts& g, bool warn_on_cap = true) {
    dk::TimeSeries ts = dk::load_csv(path, column, dt);
    if (g.max_points > 0 && ts.size() > g.max_points) {
        if (warn_on_cap)
            std::cerr << "note: input capped to the first " << g.max_points
                      << " points (--max-points)\n";
        ts.values.resize(g.max_points);
    }
    if (!g.no_normalize) ts = dk::normalize(ts);
    return ts;
}

// "a:b", "a:b:s" or comma-joined segments thereof; plain integers allowed.
std::vector<int> parse_tau_grid(const std::string& text) {
    std::vector<int> taus;
    std::stringstream outer(text);
    std::string segment;
    while (std::getline(outer, segment, ',')) {
        if (segment.empty()) continue;
        int a = 0, b = 0, s = 1;
        const int fields = std::sscanf(segment.c_str(), "%d:%d:%d", &a, &b, &s);
        if (fields == 1) {
            taus.push_back(a);
        } else if (fields >= 2) {
            if (s < 1) throw std::runtime_error("tau grid step must be >= 1");
            for (int t = a; t <= b; t += s) taus.push_back(t);
        } else {
            throw std::runtime_error("cannot parse tau grid segment '" + segment + "'");
        }
    }
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    if (taus.empty()) throw std::runtime_error("empty tau grid");
    return taus;
}

std::string sidecar_path(const std::string& out) {
    const auto dot = out.find_last_of('.');
    const std::string stem = dot == std::string::npos ? out : out.substr(0, dot);
    return stem + ".json";
}

void write_outputs(const std::string& out, const std::string& csv,
                   const dk::OutputMeta& meta, nlohmann::json result) {
    dk::write_text_file(out, csv);
    dk::write_text_file(sidecar_path(out), dk::wrap_result(meta, std::move(result)));
}

// Exit code 3 marks runs whose primary result is all gaps.
int gap_exit(bool any_primary, const std::string& what) {
    if (any_primary) return 0;
    std::cerr << "error: " << what << " produced no non-gap results\n";
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delaykit: delay-embedding lag selection toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--threads", g.threads,
                   "worker threads (0 = all cores; 1 = deterministic baseline)")
        ->capture_default_str();
    app.add_flag("--no-normalize", g.no_normalize, "skip input normalization");
    app.add_option("--max-points", g.max_points,
                   "cap input length (0 = unlimited)")
        ->capture_default_str();

    auto* gen = app.add_subcommand("generate", "write a synthetic series as CSV");
    std::string gen_kind = "lorenz";
    std::string gen_out = "series.csv";
    std::size_t gen_n = 25000;
    double gen_dt = 0.001;
    std::vector<double> gen_freqs = {1.0, 5.0, 30.0};
    std::vector<double> gen_phases = {0.0, 0.25, 0.75};
    std::vector<double> gen_amps = {1.0, 0.5, 0.2};
    double gen_dt_int = 0.0004;
    int gen_subsample = 10;
    double gen_fast = 20.0, gen_slow = 2000.0, gen_amp_fast = 0.35;
    gen->add_option("--kind", gen_kind, "sines|lorenz|fastslow")
        ->check(CLI::IsMember({"sines", "lorenz", "fastslow"}))
        ->capture_default_str();
    gen->add_option("--out", gen_out, "output CSV path")->capture_default_str();
    gen->add_option("--n", gen_n, "series length")->capture_default_str();
    gen->add_option("--dt", gen_dt, "sample step (sines)")->capture_default_str();
    gen->add_option("--freqs", gen_freqs, "sines: frequencies");
    gen->add_option("--phases", gen_phases, "sines: phases (units of pi)");
    gen->add_option("--amps", gen_amps, "sines: amplitudes");
    gen->add_option("--dt-int", gen_dt_int, "lorenz: integrator step")->capture_default_str();
    gen->add_option("--subsample", gen_subsample, "lorenz: keep every k-th step")
        ->capture_default_str();
    gen->add_option("--fast-period", gen_fast, "fastslow: samples per spike cycle")
        ->capture_default_str();
    gen->add_option("--slow-period", gen_slow, "fastslow: samples per burst cycle")
        ->capture_default_str();
    gen->add_option("--amp-fast", gen_amp_fast, "fastslow: spike amplitude")
        ->capture_default_str();

    auto* lag = app.add_subcommand("lag", "run a lag-selection method");
    std::string lag_method;
    std::string lag_input;
    std::string lag_out = "lag.csv";
    int lag_column = 0;
    double lag_dt = 1.0;
    int lag_tau_max = 200;
    int lag_bins = 16;
    int lag_theiler = -1;
    int lag_n_ref = 500;
    int lag_k = 3;
    double lag_r = -1.0;
    std::vector<int> lag_ms = {2, 3, 4, 5};
    double lag_fraction = 0.5;
    int lag_m = 3;
    int lag_n_samples = 1000;
    int lag_n_neighbors = 3;
    double lag_rtol = 10.0;
    int lag_max_dims = 6;
    double lag_fnn_threshold = 0.05;
    int lag_t_max = 40;
    std::string lag_taus;
    int lag_strands = 250;
    int lag_np = 250;
    int lag_nhole = 8;
    double lag_prominence = 0.1;
    int lag_top_k = 3;
    std::vector<int> lag_existing;
    int lag_horizon_max = 20;
    lag->add_option("method", lag_method,
                    "ac|mi|quarter|recdist|gaozheng|charlen|wavering|fillfactor|"
                    "noiseamp|lstat|fnn|garcia|continuity|pecuzal|mdop|reducedar|stops")
        ->required();
    lag->add_option("--input", lag_input, "input CSV")->required();
    lag->add_option("--column", lag_column, "CSV column")->capture_default_str();
    lag->add_option("--dt", lag_dt, "sample step of the input")->capture_default_str();
    lag->add_option("--out", lag_out, "output CSV path")->capture_default_str();
    lag->add_option("--tau-max", lag_tau_max, "largest candidate lag")->capture_default_str();
    lag->add_option("--bins", lag_bins, "mi: histogram bins")->capture_default_str();
    lag->add_option("--theiler", lag_theiler,
                    "Theiler window (-1: dominant quarter period)")
        ->capture_default_str();
    lag->add_option("--n-ref", lag_n_ref, "reference sample count")->capture_default_str();
    lag->add_option("--k", lag_k, "neighbor count / evolution steps / fnn tau")
        ->capture_default_str();
    lag->add_option("--r", lag_r, "gaozheng: pair radius (<=0: 10th percentile)")
        ->capture_default_str();
    lag->add_option("--ms", lag_ms, "dimension grid for (m,tau) methods");
    lag->add_option("--fraction", lag_fraction, "charlen: divergence fraction")
        ->capture_default_str();
    lag->add_option("--m", lag_m, "fillfactor embedding dimension")->capture_default_str();
    lag->add_option("--n-samples", lag_n_samples, "fillfactor: volume draws")
        ->capture_default_str();
    lag->add_option("--n-neighbors", lag_n_neighbors, "wavering: neighbors")
        ->capture_default_str();
    lag->add_option("--rtol", lag_rtol, "fnn ratio threshold")->capture_default_str();
    lag->add_option("--max-dims", lag_max_dims, "pecuzal/mdop dimension cap")
        ->capture_default_str();
    lag->add_option("--fnn-threshold", lag_fnn_threshold, "mdop termination")
        ->capture_default_str();
    lag->add_option("--t-max", lag_t_max, "lstat horizon")->capture_default_str();
    lag->add_option("--taus", lag_taus, "stops: tau grid, e.g. 2:300 or 2:60:1,64:300:4")
        ->capture_default_str();
    lag->add_option("--strands", lag_strands, "stops: strands per tau")->capture_default_str();
    lag->add_option("--np", lag_np, "stops: strand point budget")->capture_default_str();
    lag->add_option("--nhole", lag_nhole, "stops: minimum boundary points")
        ->capture_default_str();
    lag->add_option("--min-prominence", lag_prominence, "stops: peak prominence fraction")
        ->capture_default_str();
    lag->add_option("--top-k", lag_top_k, "stops: peaks to report")->capture_default_str();
    lag->add_option("--existing", lag_existing, "garcia/continuity/lstat: existing lags");
    lag->add_option("--horizon-max", lag_horizon_max, "noiseamp horizons 1..H")
        ->capture_default_str();

    auto* predict = app.add_subcommand("predict", "train a one-step MLP and freerun");
    std::string pred_input;
    std::string pred_out = "prediction.csv";
    std::vector<int> pred_lags;
    int pred_horizon = 25;
    int pred_column = 0;
    double pred_dt = 1.0;
    double pred_lr = 1e-3;
    int pred_batch = 512;
    int pred_epochs = 30;
    int pred_subsample = 1;
    bool pred_sgd = false;
    std::vector<int> pred_layers = {128, 128};
    std::string pred_model_out;
    predict->add_option("--input", pred_input, "input CSV")->required();
    predict->add_option("--lags", pred_lags, "embedding lags")->required();
    predict->add_option("--horizon", pred_horizon, "freerun steps")->capture_default_str();
    predict->add_option("--column", pred_column, "CSV column")->capture_default_str();
    predict->add_option("--dt", pred_dt, "sample step")->capture_default_str();
    predict->add_option("--out", pred_out, "report CSV path")->capture_default_str();
    predict->add_option("--lr", pred_lr, "learning rate")->capture_default_str();
    predict->add_option("--batch", pred_batch, "batch size")->capture_default_str();
    predict->add_option("--epochs", pred_epochs, "training epochs")->capture_default_str();
    predict->add_option("--subsample", pred_subsample, "keep every k-th sample first")
        ->capture_default_str();
    predict->add_flag("--sgd", pred_sgd, "plain SGD instead of Adam");
    predict->add_option("--hidden", pred_layers, "hidden layer sizes");
    predict->add_option("--model-out", pred_model_out, "also save the model JSON");

    auto* plot = app.add_subcommand("plot", "render a result file as SVG");
    std::string plot_kind;
    std::string plot_input;
    std::string plot_out = "plot.svg";
    plot->add_option("kind", plot_kind, "profile|spectrum|diagram|recurrence|timeseries")
        ->required()
        ->check(CLI::IsMember({"profile", "spectrum", "diagram", "recurrence", "timeseries"}));
    plot->add_option("--input", plot_input, "input file (JSON sidecar or CSV)")->required();
    plot->add_option("--out", plot_out, "output SVG path")->capture_default_str();

    auto* rp = app.add_subcommand("rp", "compute a recurrence plot");
    std::string rp_input;
    std::string rp_out = "recurrence.csv";
    std::vector<int> rp_lags;
    double rp_quantile = 0.1;
    int rp_column = 0;
    double rp_dt = 1.0;
    rp->add_option("--input", rp_input, "input CSV")->required();
    rp->add_option("--lags", rp_lags, "embedding lags (empty: 1D)");
    rp->add_option("--quantile", rp_quantile, "distance quantile for the threshold")
        ->capture_default_str();
    rp->add_option("--column", rp_column, "CSV column")->capture_default_str();
    rp->add_option("--dt", rp_dt, "sample step")->capture_default_str();
    rp->add_option("--out", rp_out, "output CSV path")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "time lag methods across tau_max values");
    std::string bench_input;
    std::string bench_out = "bench.json";
    std::vector<std::string> bench_methods;
    std::vector<int> bench_tau_max = {50, 100, 150, 200};
    int bench_column = 0;
    double bench_dt = 1.0;
    bench->add_option("--input", bench_input, "input CSV")->required();
    bench->add_option("--methods", bench_methods, "pecuzal mdop stops mi reducedar")
        ->required();
    bench->add_option("--tau-max", bench_tau_max, "tau_max grid");
    bench->add_option("--column", bench_column, "CSV column")->capture_default_str();
    bench->add_option("--dt", bench_dt, "sample step")->capture_default_str();
    bench->add_option("--out", bench_out, "output JSON path")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    const int threads = resolve_thread_count(g);

    try {
        if (gen->parsed()) {
            dk::TimeSeries ts;
            dk::OutputMeta meta;
            meta.command = "generate";
            meta.seed = g.seed;
            meta.config["kind"] = gen_kind;
            meta.config["n"] = gen_n;
            if (gen_kind == "sines") {
                ts = dk::generate_sines(gen_freqs, gen_phases, gen_amps, gen_dt, gen_n);
                meta.config["dt"] = gen_dt;
                meta.config["freqs"] = gen_freqs;
                meta.config["phases"] = gen_phases;
                meta.config["amps"] = gen_amps;
            } else if (gen_kind == "lorenz") {
                ts = dk::generate_lorenz(gen_dt_int, gen_subsample, gen_n);
                meta.config["dt_int"] = gen_dt_int;
                meta.config["subsample"] = gen_subsample;
            } else {
                dk::SurrogateParams params;
                params.fast_period = gen_fast;
                params.slow_period = gen_slow;
                params.amp_fast = gen_amp_fast;
                params.seed = g.seed;
                ts = dk::generate_fastslow(params, gen_n);
                meta.config["fast_period"] = gen_fast;
                meta.config["slow_period"] = gen_slow;
                meta.config["amp_fast"] = gen_amp_fast;
            }
            write_outputs(gen_out, dk::series_to_csv(ts, meta), meta,
                          {{"kind", "series"}, {"n", ts.size()}, {"dt", ts.dt}});
            return 0;
        }

        if (lag->parsed()) {
            dk::TimeSeries ts = load_input(lag_input, lag_column, lag_dt, g);
            dk::OutputMeta meta;
            meta.command = "lag";
            meta.seed = g.seed;
            meta.config["method"] = lag_method;
            meta.config["input"] = lag_input;
            meta.config["normalized"] = !g.no_normalize;
            meta.config["max_points"] = g.max_points;

            const int theiler = lag_theiler >= 0 ? lag_theiler : dk::quarter_period(ts);
            meta.config["theiler"] = theiler;

            if (lag_method == "ac") {
                meta.config["tau_max"] = lag_tau_max;
                const auto profile = dk::autocorrelation(ts, lag_tau_max);
                auto result = dk::profile_to_json(profile);
                const auto sel = dk::first_minimum(profile);
                if (sel.has_value()) result["selected"] = *sel;
                write_outputs(lag_out, dk::profile_to_csv(profile, meta), meta, result);
                return 0;
            }
            if (lag_method == "mi") {
                meta.config["tau_max"] = lag_tau_max;
                meta.config["bins"] = lag_bins;
                const auto profile = dk::mutual_information(ts, lag_tau_max, lag_bins);
                auto result = dk::profile_to_json(profile);
                const auto sel = dk::first_minimum(profile);
                if (sel.has_value()) result["selected"] = *sel;
                result["minima"] = dk::local_minima(profile);
                write_outputs(lag_out, dk::profile_to_csv(profile, meta), meta, result);
                return 0;
            }
            if (lag_method == "quarter") {
                const int tau = dk::quarter_period(ts);
                dk::write_text_file(
                    lag_out, meta.csv_comment_block() + "tau\n" + std::to_string(tau) + "\n");
                dk::write_text_file(sidecar_path(lag_out),
                                    dk::wrap_result(meta, {{"selected", tau}}));
                return 0;
            }
            if (lag_method == "recdist") {
                meta.config["tau_max"] = lag_tau_max;
                const auto profile = dk::recurrence_distance(ts, lag_tau_max);
                write_outputs(lag_out, dk::profile_to_csv(profile, meta), meta,
                              dk::profile_to_json(profile));
                return 0;
            }
            if (lag_method == "gaozheng" || lag_method == "charlen" ||
                lag_method == "wavering") {
                meta.config["tau_max"] = lag_tau_max;
                meta.config["ms"] = lag_ms;
                meta.config["n_ref"] = lag_n_ref;
                dk::GridProfile grid;
                if (lag_method == "gaozheng") {
                    meta.config["k"] = lag_k;
                    grid = dk::gao_zheng(ts, lag_ms, lag_tau_max, lag_k, lag_r, theiler,
                                         lag_n_ref, g.seed);
                } else if (lag_method == "charlen") {
                    meta.config["fraction"] = lag_fraction;
                    grid = dk::characteristic_lengths(ts, lag_ms, lag_tau_max, lag_fraction,
                                                      theiler, lag_n_ref, g.seed);
                } else {
                    meta.config["n_neighbors"] = lag_n_neighbors;
                    grid = dk::wavering_product(ts, lag_ms, lag_tau_max, lag_n_neighbors,
                                                lag_n_ref, theiler, g.seed);
                }
                bool any = false;
                for (const auto flag : grid.gap)
                    if (!flag) any = true;
                write_outputs(lag_out, dk::grid_to_csv(grid, meta), meta,
                              dk::grid_to_json(grid));
                return gap_exit(any, lag_method);
            }
            if (lag_method == "fillfactor") {
                meta.config["m"] = lag_m;
                meta.config["tau_max"] = lag_tau_max;
                meta.config["n_samples"] = lag_n_samples;
                const auto profile =
                    dk::fill_factor(ts, lag_m, lag_tau_max, lag_n_samples, g.seed);
                bool any = false;
                for (const auto flag : profile.gap)
                    if (!flag) any = true;
                write_outputs(lag_out, dk::profile_to_csv(profile, meta), meta,
                              dk::profile_to_json(profile));
                return gap_exit(any, lag_method);
            }
            if (lag_method == "noiseamp" || lag_method == "lstat") {
                dk::EmbeddingSpec spec;
                spec.lags = lag_existing;
                meta.config["lags"] = lag_existing;
                meta.config["k"] = lag_k;
                meta.config["n_ref"] = lag_n_ref;
                double value = 0.0;
                if (lag_method == "noiseamp") {
                    std::vector<int> horizons;
                    for (int h = 1; h <= lag_horizon_max; ++h) horizons.push_back(h);
                    meta.config["horizon_max"] = lag_horizon_max;
                    value = dk::noise_amplification(ts, spec, horizons, lag_k, theiler,
                                                    lag_n_ref, g.seed);
                } else {
                    meta.config["t_max"] = lag_t_max;
                    value = dk::l_statistic(ts, spec, lag_t_max, lag_k, theiler, lag_n_ref,
                                            g.seed);
                }
                dk::write_text_file(lag_out, meta.csv_comment_block() + "value\n" +
                                                 dk::format_double(value) + "\n");
                dk::write_text_file(sidecar_path(lag_out),
                                    dk::wrap_result(meta, {{"value", value}}));
                return 0;
            }
            if (lag_method == "fnn") {
                meta.config["tau"] = lag_k;
                meta.config["ms"] = lag_ms;
                meta.config["rtol"] = lag_rtol;
                const auto profile = dk::fnn_fraction(ts, lag_k, lag_ms, lag_rtol, theiler);
                write_outputs(lag_out, dk::profile_to_csv(profile, meta), meta,
                              dk::profile_to_json(profile));
                return 0;
            }
            if (lag_method == "garcia") {
                meta.config["tau_max"] = lag_tau_max;
                meta.config["existing"] = lag_existing;
                const auto profile =
                    dk::garcia_almeida(ts, lag_existing, lag_tau_max, theiler);
                write_outputs(lag_out, dk::profile_to_csv(profile, meta), meta,
                              dk::profile_to_json(profile));
                return 0;
            }
            if (lag_method == "continuity") {
                meta.config["tau_max"] = lag_tau_max;
                meta.config["existing"] = lag_existing;
                dk::ContinuityParams params;
                params.theiler = theiler;
                params.n_ref = lag_n_ref;
                params.seed = g.seed;
                const auto profile =
                    dk::continuity_statistic(ts, lag_existing, lag_tau_max, params);
                dk::LagProfile as_profile;
                as_profile.method = "continuity";
                for (std::size_t i = 0; i < profile.taus.size(); ++i) {
                    if (profile.gap[i])
                        as_profile.push_gap(profile.taus[i]);
                    else
                        as_profile.push(profile.taus[i], profile.eps_star[i],
                                        profile.n_used[i]);
                }
                write_outputs(lag_out, dk::profile_to_csv(as_profile, meta), meta,
                              dk::continuity_to_json(profile));
                return 0;
            }
            if (lag_method == "pecuzal" || lag_method == "mdop" ||
                lag_method == "reducedar") {
                meta.config["tau_max"] = lag_tau_max;
                dk::LagSequence seq;
                if (lag_method == "pecuzal") {
                    dk::LParams lp;
                    lp.t_max = lag_t_max;
                    lp.theiler = theiler;
                    lp.n_ref = lag_n_ref;
                    lp.seed = g.seed;
                    dk::ContinuityParams cp;
                    cp.theiler = theiler;
                    cp.n_ref = lag_n_ref;
                    cp.seed = g.seed;
                    meta.config["max_dims"] = lag_max_dims;
                    seq = dk::pecuzal_select(ts, lag_tau_max, lag_max_dims, lp, cp);
                } else if (lag_method == "mdop") {
                    meta.config["max_dims"] = lag_max_dims;
                    meta.config["fnn_threshold"] = lag_fnn_threshold;
                    seq = dk::mdop_select(ts, lag_tau_max, lag_fnn_threshold, lag_max_dims,
                                          theiler, lag_n_ref, g.seed);
                } else {
                    seq = dk::reduced_ar_select(ts, lag_tau_max);
                }
                dk::write_text_file(sidecar_path(lag_out),
                                    dk::wrap_result(meta, dk::sequence_to_json(seq)));
                std::string csv = meta.csv_comment_block();
                csv += "order,lag,score\n";
                for (std::size_t i = 0; i < seq.lags.size(); ++i) {
                    csv += std::to_string(i + 1) + "," + std::to_string(seq.lags[i]) + "," +
                           dk::format_double(seq.scores[i]) + "\n";
                }
                dk::write_text_file(lag_out, csv);
                return 0;
            }
            if (lag_method == "stops") {
                std::vector<int> taus;
                if (lag_taus.empty()) {
                    const int hi = std::min<int>(
                        lag_tau_max, (static_cast<int>(ts.size()) - 2) / 4);
                    for (int t = 2; t <= hi; ++t) taus.push_back(t);
                } else {
                    taus = parse_tau_grid(lag_taus);
                }
                meta.config["taus"] = taus;
                meta.config["n_strands"] = lag_strands;
                meta.config["n_p"] = lag_np;
                meta.config["n_hole"] = lag_nhole;
                const auto spec = dk::significance_spectrum(ts, taus, lag_strands, lag_np,
                                                            lag_nhole, g.seed, threads);
                auto result = dk::spectrum_to_json(spec);
                result["peaks"] = dk::find_peaks(spec, lag_prominence, lag_top_k);
                bool any = false;
                for (const int nv : spec.n_valid)
                    if (nv > 0) any = true;
                write_outputs(lag_out, dk::spectrum_to_csv(spec, meta), meta, result);
                return gap_exit(any, "stops");
            }
            std::cerr << "error: unknown method '" << lag_method << "'\n";
            return 2;
        }

        if (predict->parsed()) {
            dk::TimeSeries ts = load_input(pred_input, pred_column, pred_dt, g);
            if (pred_subsample > 1) {
                dk::TimeSeries sub;
                sub.dt = ts.dt * pred_subsample;
                sub.name = ts.name;
                for (std::size_t i = 0; i < ts.size();
                     i += static_cast<std::size_t>(pred_subsample))
                    sub.values.push_back(ts.values[i]);
                ts = sub;
            }
            dk::EmbeddingSpec spec;
            spec.lags = pred_lags;
            const dk::PointCloud cloud = dk::delay_embed(ts, spec);

            // First half trains, second half validates.
            const std::size_t half = cloud.n_pts() / 2;
            dk::PointCloud train_cloud, test_cloud;
            train_cloud.dim = test_cloud.dim = cloud.dim;
            train_cloud.data.assign(
                cloud.data.begin(),
                cloud.data.begin() + static_cast<std::ptrdiff_t>(half * cloud.dim));
            train_cloud.time_index.assign(
                cloud.time_index.begin(),
                cloud.time_index.begin() + static_cast<std::ptrdiff_t>(half));
            test_cloud.data.assign(
                cloud.data.begin() + static_cast<std::ptrdiff_t>(half * cloud.dim),
                cloud.data.end());
            test_cloud.time_index.assign(
                cloud.time_index.begin() + static_cast<std::ptrdiff_t>(half),
                cloud.time_index.end());

            std::vector<int> sizes;
            sizes.push_back(cloud.dim);
            for (const int h : pred_layers) sizes.push_back(h);
            sizes.push_back(cloud.dim);
            dk::MlpModel model = dk::MlpModel::init(sizes, g.seed);
            dk::TrainOptions opts;
            opts.lr = pred_lr;
            opts.batch = pred_batch;
            opts.epochs = pred_epochs;
            opts.seed = g.seed;
            opts.adam = !pred_sgd;
            const auto dataset = dk::make_dataset(train_cloud);
            const auto report = dk::train(model, dataset, opts);
            const auto eval = dk::evaluate(model, test_cloud, pred_horizon, "lags", threads);

            dk::OutputMeta meta;
            meta.command = "predict";
            meta.seed = g.seed;
            meta.config["input"] = pred_input;
            meta.config["lags"] = pred_lags;
            meta.config["horizon"] = pred_horizon;
            meta.config["lr"] = pred_lr;
            meta.config["batch"] = pred_batch;
            meta.config["epochs"] = pred_epochs;
            meta.config["subsample"] = pred_subsample;
            meta.config["optimizer"] = pred_sgd ? "sgd" : "adam";
            meta.config["hidden"] = pred_layers;

            auto result = dk::report_to_json(eval);
            result["train_mse"] = report.final_mse;
            std::string csv = meta.csv_comment_block();
            csv += "start,error\n";
            for (std::size_t i = 0; i < eval.errors.size(); ++i)
                csv += std::to_string(i) + "," + dk::format_double(eval.errors[i]) + "\n";
            dk::write_text_file(pred_out, csv);
            dk::write_text_file(sidecar_path(pred_out), dk::wrap_result(meta, result));
            if (!pred_model_out.empty())
                dk::write_text_file(pred_model_out, dk::model_to_json(model));
            return 0;
        }

        if (rp->parsed()) {
            dk::TimeSeries ts = load_input(rp_input, rp_column, rp_dt, g);
            dk::EmbeddingSpec spec;
            spec.lags = rp_lags;
            const auto cloud = dk::delay_embed(ts, spec);
            const auto matrix = dk::recurrence_plot(cloud, rp_quantile);
            dk::OutputMeta meta;
            meta.command = "rp";
            meta.seed = g.seed;
            meta.config["input"] = rp_input;
            meta.config["lags"] = rp_lags;
            meta.config["quantile"] = rp_quantile;
            dk::write_text_file(rp_out, dk::recurrence_to_csv(matrix, meta));
            dk::write_text_file(
                sidecar_path(rp_out),
                dk::wrap_result(meta, {{"size", matrix.size},
                                       {"threshold", matrix.threshold}}));
            return 0;
        }

        if (plot->parsed()) {
            std::string svg;
            if (plot_kind == "timeseries") {
                const dk::TimeSeries ts = dk::load_csv(plot_input, 0, 1.0);
                dk::SvgSeries series;
                series.label = "x";
                for (std::size_t i = 0; i < ts.size(); ++i) {
                    series.xs.push_back(static_cast<double>(i));
                    series.ys.push_back(ts.values[i]);
                }
                svg = dk::svg_line_chart("series", "t", "x", {series});
            } else if (plot_kind == "recurrence") {
                std::ifstream in(plot_input);
                if (!in) throw std::runtime_error("cannot open " + plot_input);
                std::string line;
                std::vector<std::string> rows;
                while (std::getline(in, line)) {
                    if (line.empty() || line[0] == '#' || line.rfind("row,", 0) == 0)
                        continue;
                    const auto comma = line.find(',');
                    if (comma != std::string::npos) rows.push_back(line.substr(comma + 1));
                }
                dk::RecurrenceMatrix rm;
                rm.size = rows.size();
                rm.bits.assign(rm.size * rm.size, 0);
                for (std::size_t i = 0; i < rows.size(); ++i)
                    for (std::size_t j = 0; j < rm.size && j < rows[i].size(); ++j)
                        rm.bits[i * rm.size + j] = rows[i][j] == '1' ? 1 : 0;
                svg = dk::svg_raster("recurrence plot", rm);
            } else {
                std::ifstream in(plot_input);
                if (!in) throw std::runtime_error("cannot open " + plot_input);
                nlohmann::json j;
                in >> j;
                const auto& result = j.contains("result") ? j.at("result") : j;
                if (plot_kind == "diagram") {
                    std::vector<double> births, deaths;
                    for (const auto& f : result.at("features")) {
                        if (f.at("death").is_null()) continue;
                        births.push_back(f.at("birth").get<double>());
                        deaths.push_back(f.at("death").get<double>());
                    }
                    svg = dk::svg_scatter_diagonal("persistence diagram", births, deaths);
                } else if (plot_kind == "spectrum") {
                    dk::SvgSeries s_mean{"s_mean", "#1f6fb2", {}, {}};
                    dk::SvgSeries s_std{"s_std", "#b2361f", {}, {}};
                    const auto& taus = result.at("taus");
                    for (std::size_t i = 0; i < taus.size(); ++i) {
                        const double tau = taus[i].get<double>();
                        const auto& sm = result.at("s_mean")[i];
                        const auto& ss = result.at("s_std")[i];
                        s_mean.xs.push_back(tau);
                        s_mean.ys.push_back(
                            sm.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                         : sm.get<double>());
                        s_std.xs.push_back(tau);
                        s_std.ys.push_back(
                            ss.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                         : ss.get<double>());
                    }
                    std::vector<double> markers;
                    if (result.contains("peaks"))
                        for (const auto& p : result.at("peaks"))
                            markers.push_back(p.get<double>());
                    svg = dk::svg_line_chart("significance spectrum", "tau", "S",
                                             {s_mean, s_std}, markers);
                } else {
                    dk::SvgSeries series{"value", "#1f6fb2", {}, {}};
                    const auto& taus = result.at("taus");
                    const auto& values = result.contains("values") ? result.at("values")
                                                                   : result.at("eps_star");
                    for (std::size_t i = 0; i < taus.size(); ++i) {
                        series.xs.push_back(taus[i].get<double>());
                        series.ys.push_back(
                            values[i].is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                : values[i].get<double>());
                    }
                    svg = dk::svg_line_chart("lag profile", "tau", "value", {series});
                }
            }
            dk::write_text_file(plot_out, svg);
            return 0;
        }

        if (bench->parsed()) {
            dk::TimeSeries ts = load_input(bench_input, bench_column, bench_dt, g);
            const int theiler = dk::quarter_period(ts);
            nlohmann::json rows = nlohmann::json::array();
            for (const int tau_max : bench_tau_max) {
                for (const std::string& method : bench_methods) {
                    nlohmann::json row;
                    row["method"] = method;
                    row["tau_max"] = tau_max;
                    const auto t0 = std::chrono::steady_clock::now();
                    if (method == "pecuzal") {
                        dk::LParams lp;
                        lp.theiler = theiler;
                        lp.seed = g.seed;
                        dk::ContinuityParams cp;
                        cp.theiler = theiler;
                        cp.seed = g.seed;
                        row["lags"] = dk::pecuzal_select(ts, tau_max, 6, lp, cp).lags;
                    } else if (method == "mdop") {
                        row["lags"] =
                            dk::mdop_select(ts, tau_max, 0.05, 6, theiler, 500, g.seed).lags;
                    } else if (method == "reducedar") {
                        row["lags"] = dk::reduced_ar_select(ts, tau_max).lags;
                    } else if (method == "mi") {
                        const auto profile = dk::mutual_information(ts, tau_max, 16);
                        const auto sel = dk::first_minimum(profile);
                        row["lags"] = sel.has_value() ? nlohmann::json::array({*sel})
                                                      : nlohmann::json::array();
                    } else if (method == "stops") {
                        std::vector<int> taus;
                        for (int t = 2; t <= tau_max; ++t) taus.push_back(t);
                        const auto spec = dk::significance_spectrum(ts, taus, 250, 250, 8,
                                                                    g.seed, threads);
                        row["peaks"] = dk::find_peaks(spec, 0.1, 5);
                    } else {
                        throw std::runtime_error("unknown bench method '" + method + "'");
                    }
                    const auto t1 = std::chrono::steady_clock::now();
                    row["seconds"] = std::chrono::duration<double>(t1 - t0).count();
                    rows.push_back(std::move(row));
                }
            }
            dk::OutputMeta meta;
            meta.command = "bench";
            meta.seed = g.seed;
            meta.config["input"] = bench_input;
            meta.config["methods"] = bench_methods;
            meta.config["tau_max"] = bench_tau_max;
            dk::write_text_file(bench_out, dk::wrap_result(meta, {{"rows", rows}}));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

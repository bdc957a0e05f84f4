// fvarclust: synthesize fibers, build Gram matrices, cluster, evaluate and
// sweep kernel bandwidths.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fvarclust/fvarclust.hpp"

namespace fs = std::filesystem;
using namespace fvarclust;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Argument values that parse fine but are inconsistent with the data.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthOptions {
    std::size_t bundles = 4;
    std::size_t per_bundle = 50;
    std::size_t points = 30;
    double jitter = SyntheticBundleSpec{}.geometry_jitter;
    double spread = SyntheticBundleSpec{}.bundle_spread;
    double signal_jitter = SyntheticBundleSpec{}.signal_jitter;
    bool shared_geometry = false;
    std::uint64_t seed = 0;
    std::string output;
    std::string labels;
};

struct GramOptions {
    std::string input;
    std::string output;
    std::string model = "fvar";
    KernelParams params;
    std::size_t nystrom = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct ClusterOptions {
    std::string gram;
    std::string output;
    FitConfig config;
    std::string seeding = "kmeans++";
};

struct EvalOptions {
    std::string gram;
    std::string result;
    std::string planted;
    std::string output;
};

struct SweepOptions {
    std::string input;
    std::string output;
    std::string model = "fvar";
    std::vector<double> lambda_w = kDefaultSweepLambdaW;
    std::vector<double> lambda_m = kDefaultSweepLambdaM;
    std::vector<std::string> pairs;
    double gamma = KernelParams{}.gamma;
};

void run_synth(const SynthOptions& o) {
    SyntheticBundleSpec spec = planted_bundle_spec(o.bundles, o.per_bundle, o.seed, o.shared_geometry);
    spec.points_per_fiber = o.points;
    spec.geometry_jitter = o.jitter;
    spec.bundle_spread = o.spread;
    spec.signal_jitter = o.signal_jitter;
    const SyntheticSet set = synthesize(spec);
    io::write_fibers(fs::path(o.output), set.fibers);
    const std::string labels = o.labels.empty() ? o.output + ".labels.json" : o.labels;
    io::write_labels(fs::path(labels), set.labels);
    std::cerr << "wrote " << set.fibers.size() << " fibers to " << o.output << " and labels to " << labels << '\n';
}

void run_gram(const GramOptions& o) {
    const KernelModel model = parse_model(o.model);
    o.params.validate();
    const auto fibers = io::read_fibers(fs::path(o.input));
    if (fibers.empty()) throw FormatError("'" + o.input + "' contains no fibers");
    GramMatrix g;
    if (o.nystrom > 0) {
        if (o.nystrom > fibers.size()) {
            throw UsageError("--nystrom " + std::to_string(o.nystrom) + " exceeds the fiber count " +
                             std::to_string(fibers.size()));
        }
        g = nystrom_gram(fibers, model, o.params, o.nystrom, o.seed, o.threads);
    } else {
        g = compute_gram(fibers, model, o.params, o.threads);
    }
    io::write_gram(fs::path(o.output), g);
    std::cerr << "wrote " << g.size() << "x" << g.size() << " " << model_name(model) << " Gram to " << o.output << '\n';
}

void run_cluster(ClusterOptions o) {
    o.config.seeding = io::parse_seeding(o.seeding);
    const GramMatrix g = io::read_gram(fs::path(o.gram));
    if (o.config.m > g.size()) {
        throw UsageError("--m " + std::to_string(o.config.m) + " exceeds the fiber count " + std::to_string(g.size()));
    }
    if (o.config.s_max > o.config.m) throw UsageError("--s-max must not exceed --m");
    io::ResultRecord record;
    record.model = g.model;
    record.params = g.params;
    record.config = o.config;
    record.fit = fit(g, o.config);
    record.labels = hard_assign(record.fit.codes);
    io::write_result(fs::path(o.output), record);
    std::cerr << "ran " << record.fit.iterations_run << " iterations, final objective "
              << std::setprecision(17) << record.fit.objective_trace.back() << ", wrote " << o.output << '\n';
}

void run_eval(const EvalOptions& o) {
    const GramMatrix g = io::read_gram(fs::path(o.gram));
    const io::ResultRecord record = io::read_result(fs::path(o.result));
    if (record.labels.size() != g.size()) {
        throw DimensionMismatch("result covers " + std::to_string(record.labels.size()) + " fibers, Gram has " +
                                std::to_string(g.size()));
    }
    const SilhouetteReport report = silhouette(g, record.labels);
    nlohmann::json out;
    out["mean_silhouette"] = report.mean;
    out["n_unassigned"] = report.unassigned;
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& c : report.per_cluster) {
        clusters.push_back({{"label", c.label}, {"size", c.size}, {"mean_silhouette", c.mean}});
    }
    out["per_cluster"] = std::move(clusters);
    if (!o.planted.empty()) {
        const auto planted = planted_assignment(io::read_labels(fs::path(o.planted)));
        if (planted.size() != record.labels.size()) {
            throw LengthMismatch("planted labels cover " + std::to_string(planted.size()) + " fibers, result has " +
                                 std::to_string(record.labels.size()));
        }
        out["ari"] = adjusted_rand_index(record.labels, planted);
    }
    const std::string text = out.dump(1) + "\n";
    if (o.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream file(o.output, std::ios::trunc);
        if (!file) throw Error("cannot open '" + o.output + "' for writing");
        file << text;
    }
}

std::pair<std::size_t, std::size_t> parse_pair(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw UsageError("--pair expects I,J, got '" + text + "'");
    try {
        std::size_t used_i = 0;
        std::size_t used_j = 0;
        const std::string a = text.substr(0, comma);
        const std::string b = text.substr(comma + 1);
        const auto i = std::stoull(a, &used_i);
        const auto j = std::stoull(b, &used_j);
        if (used_i != a.size() || used_j != b.size()) throw std::invalid_argument(text);
        return {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
    } catch (const std::logic_error&) {
        throw UsageError("--pair expects two non-negative integers I,J, got '" + text + "'");
    }
}

void run_sweep(const SweepOptions& o) {
    const KernelModel model = parse_model(o.model);
    const auto fibers = io::read_fibers(fs::path(o.input));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& p : o.pairs) {
        pairs.push_back(parse_pair(p));
        if (pairs.back().first >= fibers.size() || pairs.back().second >= fibers.size()) {
            throw UsageError("--pair " + p + " is out of range for " + std::to_string(fibers.size()) + " fibers");
        }
    }
    const auto rows = cosine_sweep(fibers, model, o.lambda_w, o.lambda_m, pairs, o.gamma);
    std::ostringstream csv;
    csv << std::setprecision(17);
    csv << "lambda_w,lambda_m,pair_id,angle_deg\n";
    for (const auto& r : rows) csv << r.lambda_w << ',' << r.lambda_m << ',' << r.pair_id << ',' << r.angle_deg << '\n';
    if (o.output.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream file(o.output, std::ios::trunc);
        if (!file) throw Error("cannot open '" + o.output + "' for writing");
        file << csv.str();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional-varifold fiber clustering with kernel dictionary learning"};
    app.require_subcommand(1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic fiber set with planted bundle labels");
    synth_cmd->add_option("--bundles", synth.bundles, "Number of bundles")->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--per-bundle", synth.per_bundle, "Fibers per bundle")->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--points", synth.points, "Vertices per fiber (>= 2)")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20))->capture_default_str();
    synth_cmd->add_option("--jitter", synth.jitter, "Per-vertex position noise std-dev (mm)")->check(CLI::NonNegativeNumber)->capture_default_str();
    synth_cmd->add_option("--spread", synth.spread, "Per-fiber offset std-dev within a bundle (mm)")->check(CLI::NonNegativeNumber)->capture_default_str();
    synth_cmd->add_option("--signal-jitter", synth.signal_jitter, "Per-vertex signal noise std-dev")->check(CLI::NonNegativeNumber)->capture_default_str();
    synth_cmd->add_flag("--shared-geometry", synth.shared_geometry, "Last bundle reuses the previous bundle's geometry with its own signal profile");
    synth_cmd->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
    synth_cmd->add_option("-o,--output", synth.output, "Output fiber file (JSON-Lines)")->required();
    synth_cmd->add_option("--labels", synth.labels, "Output planted-label file (default: <output>.labels.json)");

    GramOptions gram;
    auto* gram_cmd = app.add_subcommand("gram", "Compute the Gram matrix of a fiber file");
    gram_cmd->add_option("-i,--input", gram.input, "Input fiber file (JSON-Lines)")->required()->check(CLI::ExistingFile);
    gram_cmd->add_option("-o,--output", gram.output, "Output Gram file")->required();
    gram_cmd->add_option("--model", gram.model, "Kernel model")->check(CLI::IsMember({"fvar", "var", "signal", "gfa", "mcp"}))->capture_default_str();
    gram_cmd->add_option("--lambda-w", gram.params.lambda_w, "Spatial bandwidth (mm)")->check(CLI::PositiveNumber)->capture_default_str();
    gram_cmd->add_option("--lambda-m", gram.params.lambda_m, "Signal bandwidth")->check(CLI::PositiveNumber)->capture_default_str();
    gram_cmd->add_option("--gamma", gram.params.gamma, "RBF coefficient for the mcp model")->check(CLI::PositiveNumber)->capture_default_str();
    gram_cmd->add_option("--nystrom", gram.nystrom, "Use a Nystrom approximation with this many landmarks")->check(CLI::PositiveNumber);
    gram_cmd->add_option("--seed", gram.seed, "Landmark sampling seed")->capture_default_str();
    gram_cmd->add_option("--threads", gram.threads, "Worker threads (0 = all cores)")->capture_default_str();

    ClusterOptions cluster;
    auto* cluster_cmd = app.add_subcommand("cluster", "Learn a dictionary and sparse codes from a Gram file");
    cluster_cmd->add_option("-g,--gram", cluster.gram, "Input Gram file")->required()->check(CLI::ExistingFile);
    cluster_cmd->add_option("-o,--output", cluster.output, "Output result file (JSON)")->required();
    cluster_cmd->add_option("--m", cluster.config.m, "Number of atoms (bundles)")->required()->check(CLI::PositiveNumber);
    cluster_cmd->add_option("--s-max", cluster.config.s_max, "Maximum non-zeros per sparse code")->check(CLI::PositiveNumber)->capture_default_str();
    cluster_cmd->add_option("--iters", cluster.config.max_outer_iters, "Maximum alternation steps")->check(CLI::PositiveNumber)->capture_default_str();
    cluster_cmd->add_option("--dict-iters", cluster.config.dict_update_iters, "Multiplicative updates per alternation step")->check(CLI::PositiveNumber)->capture_default_str();
    cluster_cmd->add_option("--tol", cluster.config.objective_tolerance, "Relative objective decrease that stops the fit")->check(CLI::PositiveNumber)->capture_default_str();
    cluster_cmd->add_option("--restarts", cluster.config.restarts, "Independent seeded runs; the lowest objective wins")->check(CLI::PositiveNumber)->capture_default_str();
    cluster_cmd->add_option("--seeding", cluster.seeding, "Atom initialization")->check(CLI::IsMember({"kmeans++", "uniform"}))->capture_default_str();
    cluster_cmd->add_option("--seed", cluster.config.seed, "RNG seed")->capture_default_str();
    cluster_cmd->add_option("--threads", cluster.config.threads, "Worker threads for sparse coding (0 = all cores)")->capture_default_str();

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Silhouette (and ARI against planted labels) of a clustering");
    eval_cmd->add_option("-g,--gram", eval.gram, "Gram file the silhouette distances come from")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("-r,--result", eval.result, "Result file from 'cluster'")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--planted", eval.planted, "Planted label file; adds \"ari\" to the report")->check(CLI::ExistingFile);
    eval_cmd->add_option("-o,--output", eval.output, "Write the JSON report here instead of stdout");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Cosine angle of fiber pairs over a bandwidth grid (CSV)");
    sweep_cmd->add_option("-i,--input", sweep.input, "Input fiber file (JSON-Lines)")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--model", sweep.model, "Kernel model")->check(CLI::IsMember({"fvar", "var", "signal", "gfa", "mcp"}))->capture_default_str();
    sweep_cmd->add_option("--lambda-w", sweep.lambda_w, "Spatial bandwidths (mm)")->delimiter(',')->check(CLI::PositiveNumber)->capture_default_str();
    sweep_cmd->add_option("--lambda-m", sweep.lambda_m, "Signal bandwidths")->delimiter(',')->check(CLI::PositiveNumber)->capture_default_str();
    sweep_cmd->add_option("--pair", sweep.pairs, "Fiber index pair I,J (0-based, repeatable)")->required()->take_all()->allow_extra_args(false);
    sweep_cmd->add_option("--gamma", sweep.gamma, "RBF coefficient for the mcp model")->check(CLI::PositiveNumber)->capture_default_str();
    sweep_cmd->add_option("-o,--output", sweep.output, "Write the CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*synth_cmd) run_synth(synth);
        if (*gram_cmd) run_gram(gram);
        if (*cluster_cmd) run_cluster(cluster);
        if (*eval_cmd) run_eval(eval);
        if (*sweep_cmd) run_sweep(sweep);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}

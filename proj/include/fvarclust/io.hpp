#pragma once

// On-disk formats.
//
//   fibers   JSON-Lines, one {"id": int, "points": [[x,y,z],...], "signal": [...]} per line
//   labels   JSON object {"labels": [...]}; a result file also qualifies
//   gram     binary, little endian:
//              "GRM1" | model tag u8 | lambda_w f64 | lambda_m f64 | gamma f64 | n u64
//              | n(n+1)/2 f64 upper triangle, row major
//   result   JSON object, see write_result()

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "fvarclust/core.hpp"
#include "fvarclust/dictionary.hpp"
#include "fvarclust/error.hpp"
#include "fvarclust/evaluation.hpp"
#include "fvarclust/gram.hpp"
#include "fvarclust/kernels.hpp"

namespace fvarclust::io {

using json = nlohmann::json;

inline constexpr std::array<char, 4> kGramMagic = {'G', 'R', 'M', '1'};
inline constexpr std::string_view kResultFormat = "fvarclust-result";

namespace detail {

inline std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return in;
}

inline std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> bytes{};
    for (int k = 0; k < 8; ++k) bytes[static_cast<std::size_t>(k)] = static_cast<char>((v >> (8 * k)) & 0xFFu);
    out.write(bytes.data(), bytes.size());
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t get_u64(std::istream& in) {
    std::array<unsigned char, 8> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (in.gcount() != 8) throw FormatError("gram file truncated");
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) v = (v << 8) | bytes[static_cast<std::size_t>(k)];
    return v;
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace detail

// ---------------------------------------------------------------- fibers

inline json fiber_to_json(const Fiber& f) {
    json points = json::array();
    for (const auto& p : f.points()) points.push_back({p.x(), p.y(), p.z()});
    return json{{"id", f.id()}, {"points", std::move(points)}, {"signal", f.signal()}};
}

inline Fiber fiber_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("fiber record is not a JSON object");
    for (const char* key : {"id", "points", "signal"}) {
        if (!j.contains(key)) throw FormatError(std::string("fiber record lacks \"") + key + "\"");
    }
    if (!j["id"].is_number_integer()) throw FormatError("\"id\" must be an integer");
    if (!j["points"].is_array() || !j["signal"].is_array()) throw FormatError("\"points\" and \"signal\" must be arrays");
    std::vector<Point3> points;
    points.reserve(j["points"].size());
    for (const auto& p : j["points"]) {
        if (!p.is_array() || p.size() != 3) throw FormatError("every point must be an [x, y, z] triple");
        for (const auto& c : p) {
            if (!c.is_number()) throw FormatError("point coordinates must be numbers");
        }
        points.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    std::vector<double> signal;
    signal.reserve(j["signal"].size());
    for (const auto& s : j["signal"]) {
        if (!s.is_number()) throw FormatError("signal values must be numbers");
        signal.push_back(s.get<double>());
    }
    try {
        return Fiber(j["id"].get<std::int64_t>(), std::move(points), std::move(signal));
    } catch (const InvalidFiber& e) {
        throw FormatError(e.what());
    }
}

inline void write_fibers(std::ostream& out, const std::vector<Fiber>& fibers) {
    for (const auto& f : fibers) out << fiber_to_json(f).dump() << '\n';
}

// Blank lines are skipped. Errors carry the 1-based line number.
inline std::vector<Fiber> read_fibers(std::istream& in) {
    std::vector<Fiber> fibers;
    std::set<std::int64_t> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        try {
            fibers.push_back(fiber_from_json(j));
        } catch (const FormatError& e) {
            throw FormatError(e.what(), lineno);
        }
        if (!ids.insert(fibers.back().id()).second) {
            throw FormatError("duplicate fiber id " + std::to_string(fibers.back().id()), lineno);
        }
    }
    return fibers;
}

inline void write_fibers(const std::filesystem::path& path, const std::vector<Fiber>& fibers) {
    auto out = detail::open_out(path);
    write_fibers(out, fibers);
}

inline std::vector<Fiber> read_fibers(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    return read_fibers(in);
}

// ---------------------------------------------------------------- labels

inline void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
    auto out = detail::open_out(path);
    out << json{{"labels", labels}}.dump() << '\n';
}

inline std::vector<int> read_labels(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("'" + path.string() + "': invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("labels") || !j["labels"].is_array()) {
        throw FormatError("'" + path.string() + "' has no \"labels\" array");
    }
    std::vector<int> labels;
    for (const auto& l : j["labels"]) {
        if (!l.is_number_integer()) throw FormatError("labels must be integers");
        labels.push_back(l.get<int>());
    }
    return labels;
}

// ---------------------------------------------------------------- gram

inline void write_gram(std::ostream& out, const GramMatrix& g) {
    out.write(kGramMagic.data(), kGramMagic.size());
    out.put(static_cast<char>(static_cast<std::uint8_t>(g.model)));
    detail::put_f64(out, g.params.lambda_w);
    detail::put_f64(out, g.params.lambda_m);
    detail::put_f64(out, g.params.gamma);
    const std::size_t n = g.size();
    detail::put_u64(out, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) detail::put_f64(out, g(i, j));
    }
}

inline GramMatrix read_gram(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != 4 || magic != kGramMagic) throw FormatError("not a gram file (bad magic)");
    const int tag = in.get();
    if (tag == std::char_traits<char>::eof()) throw FormatError("gram file truncated");
    GramMatrix g;
    try {
        g.model = model_from_tag(static_cast<std::uint8_t>(tag));
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what());
    }
    g.params.lambda_w = detail::get_f64(in);
    g.params.lambda_m = detail::get_f64(in);
    g.params.gamma = detail::get_f64(in);
    const std::uint64_t n = detail::get_u64(in);
    if (n > (std::uint64_t{1} << 24)) throw FormatError("gram file declares an implausible size n = " + std::to_string(n));
    const auto size = static_cast<Eigen::Index>(n);
    g.values.resize(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        for (Eigen::Index j = i; j < size; ++j) {
            g.values(i, j) = detail::get_f64(in);
            g.values(j, i) = g.values(i, j);
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("gram file has trailing bytes");
    return g;
}

inline void write_gram(const std::filesystem::path& path, const GramMatrix& g) {
    auto out = detail::open_out(path, std::ios::binary);
    write_gram(out, g);
}

inline GramMatrix read_gram(const std::filesystem::path& path) {
    auto in = detail::open_in(path, std::ios::binary);
    return read_gram(in);
}

// ---------------------------------------------------------------- result

struct ResultRecord {
    KernelModel model = KernelModel::FunctionalVarifold;
    KernelParams params;
    FitConfig config;
    FitResult fit;
    ClusterAssignment labels;
};

inline std::string_view seeding_name(AtomSeeding s) {
    return s == AtomSeeding::Uniform ? "uniform" : "kmeans++";
}

inline AtomSeeding parse_seeding(std::string_view name) {
    if (name == "uniform") return AtomSeeding::Uniform;
    if (name == "kmeans++") return AtomSeeding::KMeansPlusPlus;
    throw InvalidArgument("unknown atom seeding '" + std::string(name) + "' (expected uniform or kmeans++)");
}

// Codes and atoms are stored as [row, column, value] triples of their
// non-zero entries: codes as [atom, fiber, weight], atoms as [fiber, atom, value].
inline json result_to_json(const ResultRecord& r) {
    const auto& w = r.fit.codes.codes;
    const auto& a = r.fit.dictionary.atoms;
    json codes = json::array();
    for (Eigen::Index i = 0; i < w.cols(); ++i) {
        for (Eigen::Index j = 0; j < w.rows(); ++j) {
            if (w(j, i) != 0.0) codes.push_back({j, i, w(j, i)});
        }
    }
    json atoms = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (a(i, j) != 0.0) atoms.push_back({i, j, a(i, j)});
        }
    }
    return json{
        {"format", kResultFormat},
        {"version", 1},
        {"n", a.rows()},
        {"m", a.cols()},
        {"seed", r.config.seed},
        {"config",
         {{"m", r.config.m},
          {"s_max", r.config.s_max},
          {"max_outer_iters", r.config.max_outer_iters},
          {"dict_update_iters", r.config.dict_update_iters},
          {"objective_tolerance", r.config.objective_tolerance},
          {"seed", r.config.seed},
          {"seeding", seeding_name(r.config.seeding)},
          {"restarts", r.config.restarts}}},
        {"gram",
         {{"model", model_name(r.model)},
          {"lambda_w", r.params.lambda_w},
          {"lambda_m", r.params.lambda_m},
          {"gamma", r.params.gamma}}},
        {"labels", r.labels.labels},
        {"n_unassigned", r.labels.unassigned_count()},
        {"codes", std::move(codes)},
        {"atoms", std::move(atoms)},
        {"objective_trace", r.fit.objective_trace},
        {"iterations_run", r.fit.iterations_run},
        {"best_restart", r.fit.best_restart},
    };
}

inline ResultRecord result_from_json(const json& j) {
    try {
        if (!j.is_object() || j.value("format", std::string{}) != kResultFormat) {
            throw FormatError("not a result file (missing \"format\": \"fvarclust-result\")");
        }
        ResultRecord r;
        const auto n = j.at("n").get<Eigen::Index>();
        const auto m = j.at("m").get<Eigen::Index>();
        const auto& cfg = j.at("config");
        r.config.m = cfg.at("m").get<std::size_t>();
        r.config.s_max = cfg.at("s_max").get<std::size_t>();
        r.config.max_outer_iters = cfg.at("max_outer_iters").get<std::size_t>();
        r.config.dict_update_iters = cfg.at("dict_update_iters").get<std::size_t>();
        r.config.objective_tolerance = cfg.at("objective_tolerance").get<double>();
        r.config.seed = cfg.at("seed").get<std::uint64_t>();
        r.config.seeding = parse_seeding(cfg.at("seeding").get<std::string>());
        r.config.restarts = cfg.value("restarts", std::size_t{1});
        const auto& gram = j.at("gram");
        r.model = parse_model(gram.at("model").get<std::string>());
        r.params.lambda_w = gram.at("lambda_w").get<double>();
        r.params.lambda_m = gram.at("lambda_m").get<double>();
        r.params.gamma = gram.at("gamma").get<double>();

        r.fit.codes = SparseCodes{Eigen::MatrixXd::Zero(m, n), r.config.s_max};
        for (const auto& t : j.at("codes")) {
            const auto row = t.at(0).get<Eigen::Index>();
            const auto col = t.at(1).get<Eigen::Index>();
            if (row < 0 || row >= m || col < 0 || col >= n) throw FormatError("code entry out of range");
            r.fit.codes.codes(row, col) = t.at(2).get<double>();
        }
        r.fit.dictionary = Dictionary{Eigen::MatrixXd::Zero(n, m)};
        for (const auto& t : j.at("atoms")) {
            const auto row = t.at(0).get<Eigen::Index>();
            const auto col = t.at(1).get<Eigen::Index>();
            if (row < 0 || row >= n || col < 0 || col >= m) throw FormatError("atom entry out of range");
            r.fit.dictionary.atoms(row, col) = t.at(2).get<double>();
        }
        r.fit.objective_trace = j.at("objective_trace").get<std::vector<double>>();
        r.fit.iterations_run = j.at("iterations_run").get<std::size_t>();
        r.fit.best_restart = j.value("best_restart", std::size_t{0});
        r.labels.labels = j.at("labels").get<std::vector<int>>();
        r.labels.cluster_count = static_cast<std::size_t>(m);
        if (static_cast<Eigen::Index>(r.labels.labels.size()) != n) {
            throw FormatError("result has " + std::to_string(r.labels.labels.size()) + " labels for n = " +
                              std::to_string(n));
        }
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed result file: ") + e.what());
    }
}

inline void write_result(const std::filesystem::path& path, const ResultRecord& r) {
    auto out = detail::open_out(path);
    out << result_to_json(r).dump(1) << '\n';
}

inline ResultRecord read_result(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("'" + path.string() + "': invalid JSON: " + e.what());
    }
    return result_from_json(j);
}

}  // namespace fvarclust::io

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/baselines.hpp"
#include "qot/channel.hpp"
#include "qot/model.hpp"
#include "qot/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qot {

using Json = nlohmann::json;

/// Malformed or out-of-schema configuration. `line` is 1-based, 0 if unknown.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::size_t line, const std::string& where, const std::string& what)
        : std::runtime_error(format(line, where, what)), line_(line) {}
    std::size_t line() const { return line_; }

private:
    static std::string format(std::size_t line, const std::string& where, const std::string& what) {
        std::string out = line ? "line " + std::to_string(line) + ": " : std::string();
        if (!where.empty()) out += where + ": ";
        return out + what;
    }
    std::size_t line_;
};

/// A parsed document together with the source line of every value, keyed by
/// JSON pointer.
struct LocatedJson {
    Json doc;
    std::map<std::string, std::size_t> lines;

    std::size_t line_of(Json::json_pointer ptr) const {
        for (;;) {
            const auto it = lines.find(ptr.to_string());
            if (it != lines.end()) return it->second;
            if (ptr.empty()) return 1;
            ptr = ptr.parent_pointer();
        }
    }
};

namespace io_detail {

// Input iterator that publishes the index of the character being read, so
// SAX callbacks know where the parser is.
class TrackingIterator {
public:
    using iterator_category = std::input_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    TrackingIterator() = default;
    TrackingIterator(const char* base, const char* cur, std::size_t* seen) : base_(base), cur_(cur), seen_(seen) {}

    reference operator*() const {
        *seen_ = static_cast<std::size_t>(cur_ - base_);
        return *cur_;
    }
    TrackingIterator& operator++() {
        ++cur_;
        return *this;
    }
    TrackingIterator operator++(int) {
        TrackingIterator old = *this;
        ++cur_;
        return old;
    }
    bool operator==(const TrackingIterator& o) const { return cur_ == o.cur_; }
    bool operator!=(const TrackingIterator& o) const { return cur_ != o.cur_; }

private:
    const char* base_ = nullptr;
    const char* cur_ = nullptr;
    std::size_t* seen_ = nullptr;
};

class LocatingSax {
public:
    using number_integer_t = Json::number_integer_t;
    using number_unsigned_t = Json::number_unsigned_t;
    using number_float_t = Json::number_float_t;
    using string_t = Json::string_t;
    using binary_t = Json::binary_t;

    LocatingSax(Json& out, const std::string& text, const std::size_t* seen)
        : dom_(out, true), text_(&text), seen_(seen) {}

    std::map<std::string, std::size_t> lines;

    bool null() { return scalar(), dom_.null(); }
    bool boolean(bool v) { return scalar(), dom_.boolean(v); }
    bool number_integer(number_integer_t v) { return scalar(), dom_.number_integer(v); }
    bool number_unsigned(number_unsigned_t v) { return scalar(), dom_.number_unsigned(v); }
    bool number_float(number_float_t v, const string_t& s) { return scalar(), dom_.number_float(v, s); }
    bool string(string_t& v) { return scalar(), dom_.string(v); }
    bool binary(binary_t& v) { return scalar(), dom_.binary(v); }

    bool start_object(std::size_t n) {
        open(false);
        return dom_.start_object(n);
    }
    bool end_object() {
        close();
        return dom_.end_object();
    }
    bool start_array(std::size_t n) {
        open(true);
        return dom_.start_array(n);
    }
    bool end_array() {
        close();
        return dom_.end_array();
    }
    bool key(string_t& k) {
        frames_.back().key = k;
        lines.emplace((frames_.back().ptr / k).to_string(), current_line());
        return dom_.key(k);
    }
    bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) {
        error_byte = position == 0 ? 0 : position - 1;
        error_message = ex.what();
        return false;
    }

    std::optional<std::size_t> error_byte;
    std::string error_message;

private:
    struct Frame {
        Json::json_pointer ptr;
        bool is_array = false;
        std::size_t index = 0;
        std::string key;
    };

    std::size_t current_line() {
        const std::size_t end = std::min(*seen_, text_->size());
        if (end < counted_) {
            counted_ = 0;
            newlines_ = 0;
        }
        newlines_ += static_cast<std::size_t>(std::count(text_->begin() + static_cast<std::ptrdiff_t>(counted_),
                                                         text_->begin() + static_cast<std::ptrdiff_t>(end), '\n'));
        counted_ = end;
        return 1 + newlines_;
    }

    Json::json_pointer value_pointer() const {
        if (frames_.empty()) return Json::json_pointer();
        const Frame& top = frames_.back();
        return top.is_array ? top.ptr / top.index : top.ptr / top.key;
    }

    void record(const Json::json_pointer& ptr) { lines.emplace(ptr.to_string(), current_line()); }

    void advance_parent() {
        if (!frames_.empty() && frames_.back().is_array) ++frames_.back().index;
    }

    void scalar() {
        record(value_pointer());
        advance_parent();
    }
    void open(bool is_array) {
        Json::json_pointer ptr = value_pointer();
        record(ptr);
        frames_.push_back(Frame{std::move(ptr), is_array, 0, {}});
    }
    void close() {
        frames_.pop_back();
        advance_parent();
    }

    nlohmann::detail::json_sax_dom_parser<Json> dom_;
    const std::string* text_;
    const std::size_t* seen_;
    std::size_t counted_ = 0;
    std::size_t newlines_ = 0;
    std::vector<Frame> frames_;
};

inline std::size_t line_at(const std::string& text, std::size_t byte) {
    const std::size_t end = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

}  // namespace io_detail

inline LocatedJson parse_located(const std::string& text) {
    LocatedJson out;
    std::size_t seen = 0;
    io_detail::LocatingSax sax(out.doc, text, &seen);
    const io_detail::TrackingIterator first(text.data(), text.data(), &seen);
    const io_detail::TrackingIterator last(text.data(), text.data() + text.size(), &seen);
    Json::sax_parse(first, last, &sax);
    if (sax.error_byte) {
        std::string msg = sax.error_message;
        const auto pos = msg.find("syntax error");
        if (pos != std::string::npos) msg = msg.substr(pos);
        throw SchemaError(io_detail::line_at(text, *sax.error_byte), "", msg);
    }
    out.lines = std::move(sax.lines);
    return out;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: " + s);
    return v;
}

// ---------------------------------------------------------------------------
// Configuration

struct RunSettings {
    SchemeId scheme = SchemeId::Proposed;
    std::vector<std::uint64_t> seeds{1};
    std::string output_dir = "out";
    std::vector<std::size_t> bench_slot_counts{250, 500, 1000};
};

struct Config {
    Scenario scenario;  // reduced_gains empty unless given inline
    bool inline_gains = false;
    ChannelConfig channel;
    SolverParams solver;
    bool solver_faithful = false;
    RunSettings run;
    Json solver_overrides = Json::object();
};

namespace io_detail {

class Reader {
public:
    explicit Reader(const LocatedJson& src) : src_(&src) {}

    [[noreturn]] void fail(const Json::json_pointer& at, const std::string& what) const {
        throw SchemaError(src_->line_of(at), at.to_string(), what);
    }

    const Json& at(const Json::json_pointer& p) const { return src_->doc.at(p); }
    bool has(const Json::json_pointer& obj, const std::string& key) const {
        if (!src_->doc.contains(obj)) return false;
        const Json& o = at(obj);
        return o.is_object() && o.contains(key);
    }

    void expect_object(const Json::json_pointer& p) const {
        if (!at(p).is_object()) fail(p, "expected an object");
    }

    void only_keys(const Json::json_pointer& p, std::initializer_list<const char*> allowed) const {
        expect_object(p);
        for (const auto& item : at(p).items()) {
            const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; });
            if (!ok) fail(p / item.key(), "unknown key '" + item.key() + "'");
        }
    }

    double number(const Json::json_pointer& p) const {
        const Json& v = at(p);
        if (!v.is_number()) fail(p, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(p, "expected a finite number");
        return d;
    }
    double positive(const Json::json_pointer& p) const {
        const double d = number(p);
        if (!(d > 0.0)) fail(p, "expected a positive number");
        return d;
    }
    std::uint64_t unsigned_integer(const Json::json_pointer& p) const {
        const Json& v = at(p);
        if (!v.is_number_unsigned()) fail(p, "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::size_t positive_integer(const Json::json_pointer& p) const {
        const std::uint64_t v = unsigned_integer(p);
        if (v == 0) fail(p, "expected a positive integer");
        return static_cast<std::size_t>(v);
    }
    bool boolean(const Json::json_pointer& p) const {
        if (!at(p).is_boolean()) fail(p, "expected true or false");
        return at(p).get<bool>();
    }
    std::string string(const Json::json_pointer& p) const {
        if (!at(p).is_string()) fail(p, "expected a string");
        return at(p).get<std::string>();
    }
    const Json& array(const Json::json_pointer& p) const {
        if (!at(p).is_array()) fail(p, "expected an array");
        return at(p);
    }

    void require(const Json::json_pointer& obj, const std::string& key) const {
        if (!has(obj, key)) fail(obj, "missing required key '" + key + "'");
    }

private:
    const LocatedJson* src_;
};

inline Modality parse_modality(const Reader& r, const Json::json_pointer& p) {
    const std::string m = r.string(p);
    if (m == "point_cloud") return Modality::PointCloud;
    if (m == "image") return Modality::Image;
    r.fail(p, "unknown modality '" + m + "' (expected point_cloud or image)");
}

inline void read_scenario(const Reader& r, Config& c) {
    const Json::json_pointer p("/scenario");
    r.only_keys(p, {"num_slots", "slot_duration_s", "total_bandwidth_hz", "total_power_watts",
                    "noise_density_w_per_hz", "noise_density_dbm_per_hz", "cavs", "reduced_gains"});
    Scenario& s = c.scenario;
    r.require(p, "num_slots");
    s.num_slots = r.positive_integer(p / "num_slots");
    if (r.has(p, "slot_duration_s")) s.slot_duration_s = r.positive(p / "slot_duration_s");
    r.require(p, "total_bandwidth_hz");
    s.total_bandwidth_hz = r.positive(p / "total_bandwidth_hz");
    r.require(p, "total_power_watts");
    s.total_power_watts = r.positive(p / "total_power_watts");
    const bool linear = r.has(p, "noise_density_w_per_hz");
    const bool dbm = r.has(p, "noise_density_dbm_per_hz");
    if (linear == dbm) r.fail(p, "give exactly one of noise_density_w_per_hz and noise_density_dbm_per_hz");
    s.noise_density_w_per_hz = linear ? r.positive(p / "noise_density_w_per_hz")
                                      : std::pow(10.0, (r.number(p / "noise_density_dbm_per_hz") - 30.0) / 10.0);

    r.require(p, "cavs");
    const Json& cavs = r.array(p / "cavs");
    if (cavs.empty()) r.fail(p / "cavs", "at least one vehicle is required");
    s.cavs.clear();
    for (std::size_t k = 0; k < cavs.size(); ++k) {
        const auto q = p / "cavs" / k;
        r.only_keys(q, {"modality", "sample_size_bits", "power_cap_watts", "curve"});
        for (const char* key : {"modality", "sample_size_bits", "power_cap_watts", "curve"}) r.require(q, key);
        CavProfile cav;
        cav.modality = parse_modality(r, q / "modality");
        cav.sample_size_bits = r.positive(q / "sample_size_bits");
        cav.power_cap_watts = r.positive(q / "power_cap_watts");
        r.only_keys(q / "curve", {"amplitude", "exponent"});
        r.require(q / "curve", "amplitude");
        r.require(q / "curve", "exponent");
        cav.curve.amplitude = r.positive(q / "curve" / "amplitude");
        cav.curve.exponent = r.positive(q / "curve" / "exponent");
        s.cavs.push_back(cav);
    }

    c.inline_gains = r.has(p, "reduced_gains");
    if (c.inline_gains) {
        const auto g = p / "reduced_gains";
        const Json& rows = r.array(g);
        if (rows.size() != s.cavs.size()) r.fail(g, "expected one row per vehicle");
        s.reduced_gains.resize(static_cast<Eigen::Index>(s.cavs.size()), static_cast<Eigen::Index>(s.num_slots));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const Json& row = r.array(g / k);
            if (row.size() != s.num_slots) r.fail(g / k, "expected num_slots entries");
            for (std::size_t n = 0; n < row.size(); ++n)
                s.reduced_gains(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = r.positive(g / k / n);
        }
    }
}

inline void read_channel(const Reader& r, Config& c) {
    const Json::json_pointer p("/channel");
    if (!r.has(Json::json_pointer(""), "channel")) return;
    r.only_keys(p, {"num_bs", "distance_range_m", "pathloss_ref_db", "pathloss_exponent", "fading",
                    "hold_distance_slots", "seed"});
    ChannelConfig& ch = c.channel;
    if (r.has(p, "num_bs")) ch.num_bs = r.positive_integer(p / "num_bs");
    if (r.has(p, "distance_range_m")) {
        const auto q = p / "distance_range_m";
        if (r.array(q).size() != 2) r.fail(q, "expected [min, max]");
        ch.min_distance_m = r.positive(q / 0);
        ch.max_distance_m = r.positive(q / 1);
        if (!(ch.min_distance_m < ch.max_distance_m)) r.fail(q, "expected min < max");
    }
    if (r.has(p, "pathloss_ref_db")) ch.pathloss_ref_db = r.number(p / "pathloss_ref_db");
    if (r.has(p, "pathloss_exponent")) ch.pathloss_exponent = r.positive(p / "pathloss_exponent");
    if (r.has(p, "fading")) {
        const std::string f = r.string(p / "fading");
        if (f == "none") ch.fading = Fading::None;
        else if (f == "rayleigh") ch.fading = Fading::Rayleigh;
        else r.fail(p / "fading", "unknown fading '" + f + "' (expected none or rayleigh)");
    }
    if (r.has(p, "hold_distance_slots")) ch.hold_distance_slots = r.positive_integer(p / "hold_distance_slots");
    if (r.has(p, "seed")) ch.seed = r.unsigned_integer(p / "seed");
}

inline SlackSearch parse_slack_search(const Reader& r, const Json::json_pointer& p) {
    const std::string m = r.string(p);
    if (m == "stationarity") return SlackSearch::Stationarity;
    if (m == "golden") return SlackSearch::Golden;
    if (m == "fd-bisection") return SlackSearch::FiniteDifferenceBisection;
    r.fail(p, "unknown slack search '" + m + "' (expected stationarity, golden or fd-bisection)");
}

// Applies the solver section on top of `params`.
inline void apply_solver(const Reader& r, SolverParams& params) {
    const Json::json_pointer p("/solver");
    if (!r.has(Json::json_pointer(""), "solver")) return;
    r.only_keys(p, {"agp", "dual", "ao_max_iters", "ao_rel_tol", "faithful_paper_mode"});
    if (r.has(p, "agp")) {
        const auto q = p / "agp";
        r.only_keys(q, {"step_size", "max_iters", "rel_tol", "restart", "adaptive_step", "min_bandwidth_floor"});
        AgpParams& a = params.agp;
        if (r.has(q, "step_size")) a.step_size = r.positive(q / "step_size");
        if (r.has(q, "max_iters")) a.max_iters = r.positive_integer(q / "max_iters");
        if (r.has(q, "rel_tol")) a.rel_tol = r.positive(q / "rel_tol");
        if (r.has(q, "restart")) a.restart = r.boolean(q / "restart");
        if (r.has(q, "adaptive_step")) a.adaptive_step = r.boolean(q / "adaptive_step");
        if (r.has(q, "min_bandwidth_floor")) {
            const double f = r.number(q / "min_bandwidth_floor");
            if (f < 0.0) r.fail(q / "min_bandwidth_floor", "expected a non-negative number");
            a.min_bandwidth_floor = f;
        }
    }
    if (r.has(p, "dual")) {
        const auto q = p / "dual";
        r.only_keys(q, {"xi", "max_iters", "tol_power", "safeguarded", "slack_search", "slack_tol"});
        DualParams& d = params.dual;
        if (r.has(q, "xi")) d.xi = r.positive(q / "xi");
        if (r.has(q, "max_iters")) d.max_iters = r.positive_integer(q / "max_iters");
        if (r.has(q, "tol_power")) d.tol_power = r.positive(q / "tol_power");
        if (r.has(q, "safeguarded")) d.safeguarded = r.boolean(q / "safeguarded");
        if (r.has(q, "slack_search")) d.slack_search = parse_slack_search(r, q / "slack_search");
        if (r.has(q, "slack_tol")) d.slack_tol = r.positive(q / "slack_tol");
    }
    if (r.has(p, "ao_max_iters")) params.ao_max_iters = r.positive_integer(p / "ao_max_iters");
    if (r.has(p, "ao_rel_tol")) params.ao_rel_tol = r.positive(p / "ao_rel_tol");
}

inline void read_run(const Reader& r, Config& c) {
    const Json::json_pointer p("/run");
    if (!r.has(Json::json_pointer(""), "run")) return;
    r.only_keys(p, {"scheme", "seeds", "output_dir", "bench_slot_counts"});
    if (r.has(p, "scheme")) {
        const std::string name = r.string(p / "scheme");
        const auto id = parse_scheme(name);
        if (!id) r.fail(p / "scheme", "unknown scheme '" + name + "'");
        c.run.scheme = *id;
    }
    if (r.has(p, "seeds")) {
        const Json& seeds = r.array(p / "seeds");
        if (seeds.empty()) r.fail(p / "seeds", "at least one seed is required");
        c.run.seeds.clear();
        for (std::size_t i = 0; i < seeds.size(); ++i) c.run.seeds.push_back(r.unsigned_integer(p / "seeds" / i));
    }
    if (r.has(p, "output_dir")) c.run.output_dir = r.string(p / "output_dir");
    if (r.has(p, "bench_slot_counts")) {
        const Json& ns = r.array(p / "bench_slot_counts");
        if (ns.empty()) r.fail(p / "bench_slot_counts", "at least one slot count is required");
        c.run.bench_slot_counts.clear();
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const std::size_t n = r.positive_integer(p / "bench_slot_counts" / i);
            if (!c.run.bench_slot_counts.empty() && n <= c.run.bench_slot_counts.back())
                r.fail(p / "bench_slot_counts" / i, "slot counts must be strictly increasing");
            c.run.bench_slot_counts.push_back(n);
        }
    }
}

}  // namespace io_detail

/// Parses and validates a configuration document. Throws SchemaError.
inline Config parse_config(const std::string& text) {
    const LocatedJson src = parse_located(text);
    const io_detail::Reader r(src);
    const Json::json_pointer root("");
    r.only_keys(root, {"scenario", "channel", "solver", "run"});
    r.require(root, "scenario");
    Config c;
    io_detail::read_scenario(r, c);
    io_detail::read_channel(r, c);
    if (r.has(Json::json_pointer("/solver"), "faithful_paper_mode"))
        c.solver_faithful = r.boolean(Json::json_pointer("/solver/faithful_paper_mode"));
    c.solver = c.solver_faithful ? SolverParams::faithful() : SolverParams{};
    io_detail::apply_solver(r, c.solver);
    if (r.has(root, "solver")) c.solver_overrides = src.doc.at("solver");
    io_detail::read_run(r, c);
    if (!r.has(Json::json_pointer("/run"), "seeds")) c.run.seeds = {c.channel.seed};
    return c;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(0, "", "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Config load_config(const std::string& path) { return parse_config(read_file(path)); }

/// Switches to the faithful parameter set, keeping explicit solver overrides.
inline void make_faithful(Config& c) {
    if (c.solver_faithful) return;
    c.solver_faithful = true;
    Json doc = {{"solver", c.solver_overrides}};
    doc["solver"].erase("faithful_paper_mode");
    const LocatedJson src{doc, {}};
    c.solver = SolverParams::faithful();
    io_detail::apply_solver(io_detail::Reader(src), c.solver);
}

/// The scenario for one seed: inline gains if present, else generated from
/// the channel section with the given seed.
inline Scenario build_scenario(const Config& c, std::uint64_t seed) {
    Scenario s = c.scenario;
    if (!c.inline_gains) {
        ChannelConfig ch = c.channel;
        ch.seed = seed;
        s.reduced_gains = reduce_association(generate_raw_gains(ch, s.num_cavs(), s.num_slots)).second;
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Scenario export and hashing

inline Json scenario_to_json(const Scenario& s) {
    Json cavs = Json::array();
    for (const auto& c : s.cavs)
        cavs.push_back({{"modality", c.modality == Modality::PointCloud ? "point_cloud" : "image"},
                        {"sample_size_bits", c.sample_size_bits},
                        {"power_cap_watts", c.power_cap_watts},
                        {"curve", {{"amplitude", c.curve.amplitude}, {"exponent", c.curve.exponent}}}});
    Json gains = Json::array();
    for (Eigen::Index k = 0; k < s.reduced_gains.rows(); ++k) {
        Json row = Json::array();
        for (Eigen::Index n = 0; n < s.reduced_gains.cols(); ++n) row.push_back(s.reduced_gains(k, n));
        gains.push_back(std::move(row));
    }
    return {{"num_slots", s.num_slots},
            {"slot_duration_s", s.slot_duration_s},
            {"total_bandwidth_hz", s.total_bandwidth_hz},
            {"total_power_watts", s.total_power_watts},
            {"noise_density_w_per_hz", s.noise_density_w_per_hz},
            {"cavs", std::move(cavs)},
            {"reduced_gains", std::move(gains)}};
}

/// 64-bit FNV-1a over the binary content of the scenario.
inline std::uint64_t scenario_hash(const Scenario& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto bytes = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    auto u64 = [&](std::uint64_t v) { bytes(&v, sizeof v); };
    auto f64 = [&](double v) { bytes(&v, sizeof v); };
    u64(s.cavs.size());
    u64(s.num_slots);
    f64(s.slot_duration_s);
    f64(s.total_bandwidth_hz);
    f64(s.total_power_watts);
    f64(s.noise_density_w_per_hz);
    for (const auto& c : s.cavs) {
        u64(c.modality == Modality::PointCloud ? 0 : 1);
        f64(c.sample_size_bits);
        f64(c.power_cap_watts);
        f64(c.curve.amplitude);
        f64(c.curve.exponent);
    }
    for (Eigen::Index k = 0; k < s.reduced_gains.rows(); ++k)
        for (Eigen::Index n = 0; n < s.reduced_gains.cols(); ++n) f64(s.reduced_gains(k, n));
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string matrix_csv(const Matrix& m) {
    std::string out = "cav";
    for (Eigen::Index n = 0; n < m.cols(); ++n) out += ",slot_" + std::to_string(n);
    out += '\n';
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        out += std::to_string(k);
        for (Eigen::Index n = 0; n < m.cols(); ++n) out += ',' + format_double(m(k, n));
        out += '\n';
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

}  // namespace qot

#include <charconv>
#include <cmath>
#include <fstream>
#include <locale>
#include <ostream>

#include "cvqkd/cli.hpp"
#include "cvqkd/errors.hpp"

namespace cvqkd::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Same digits as the CSV output, so meta files and tables agree.
double rounded(double x) {
    const auto s = format_number(x);
    double v = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}


// Shortest round-trip form for file names: 10 -> "10", 2.5 -> "2.5".
std::string label(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, r.ptr};
}

class CsvRow {
public:
    CsvRow& operator<<(const std::string& field) {
        if (!first_) line_ += ',';
        line_ += field;
        first_ = false;
        return *this;
    }
    CsvRow& operator<<(double x) { return *this << format_number(x); }
    CsvRow& operator<<(const std::optional<double>& x) { return *this << format_optional(x); }
    CsvRow& operator<<(std::string_view s) { return *this << std::string(s); }
    CsvRow& operator<<(const char* s) { return *this << std::string(s); }
    const std::string& str() const { return line_; }

private:
    std::string line_;
    bool first_ = true;
};

class OutputFile {
public:
    OutputFile(const RunConfig& c, const std::string& name) : path_(fs::path(c.out) / name) {
        std::error_code ec;
        fs::create_directories(path_.parent_path(), ec);
        stream_.imbue(std::locale::classic());
        stream_.open(path_, std::ios::binary);
        if (!stream_) throw ConfigError("cannot write " + path_.string());
    }
    void row(const CsvRow& r) { stream_ << r.str() << '\n'; }
    void write(const json& j) { stream_ << j.dump(2) << '\n'; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream stream_;
};

void require_positive_grid(const RunConfig& c) {
    if (c.grid < 3 || c.grid % 2 == 0) throw InvalidArgument("--grid must be odd and >= 3");
}

SearchOptions search_options(const RunConfig& c) {
    SearchOptions s;
    s.refinement_levels = c.refine;
    s.workers = c.workers;
    return s;
}

double separable_bound(double v_e) { return max_correlation_on_ray(v_e, v_e, 1.0, 1.0, RayCriterion::Separable); }

}  // namespace

int cmd_keyrate(const RunConfig& c, std::ostream& out) {
    if (!c.c_x || !c.c_p) throw ConfigError("keyrate needs both --cx and --cp");
    const auto p = c.protocol();
    const auto attack = symmetric_attack(p, *c.c_x, *c.c_p);
    if (!attack.physical()) {
        throw UnphysicalParameters("attack (c_x = " + format_number(*c.c_x) + ", c_p = " + format_number(*c.c_p) +
                                   ", V_E = " + format_number(attack.v_e1) +
                                   ") is unphysical: nu_minus < 1");
    }
    const auto r = key_rate(p, attack);

    CsvRow header;
    header << "distance_km" << "T" << "epsilon" << "v_e" << "c_x" << "c_p" << "class" << "i_ab" << "chi_be"
           << "key_rate";
    for (int i = 1; i <= 8; ++i) header << "lambda" + std::to_string(i);
    CsvRow row;
    row << c.distance_km << p.transmittance << p.excess_noise << attack.v_e1 << attack.c_x << attack.c_p
        << to_string(classify(attack)) << r.i_ab << r.chi_be << r.key_rate;
    for (double l : r.spectrum_unconditioned) row << l;
    for (double l : r.spectrum_conditioned) row << l;
    out << header.str() << '\n' << row.str() << '\n';
    return kSuccess;
}

int cmd_sweep(const RunConfig& c, std::ostream& log) {
    require_positive_grid(c);
    OutputFile diag(c, "slice_diag.csv");
    OutputFile anti(c, "slice_antidiag.csv");
    CsvRow slice_header;
    slice_header << "distance_km" << "c_x" << "c_p" << "class" << "key_rate";
    diag.row(slice_header);
    anti.row(slice_header);

    for (double d : c.distance_list()) {
        const auto p = c.protocol_at(d);
        SweepOptions o;
        o.resolution = c.grid;
        o.workers = c.workers;
        const auto r = sweep_plane(p, o);

        OutputFile plane(c, "plane_d" + label(d) + "km.csv");
        CsvRow h;
        h << "c_x" << "c_p" << "class" << "key_rate";
        plane.row(h);
        for (std::size_t i = 0; i < r.axis.size(); ++i)
            for (std::size_t j = 0; j < r.axis.size(); ++j) {
                CsvRow row;
                row << r.axis[i] << r.axis[j] << to_string(r.classes[i][j]) << r.rates[i][j];
                plane.row(row);
            }

        const double v_e = p.ancilla_variance();
        json meta{
            {"distance_km", d},
            {"transmittance", rounded(p.transmittance)},
            {"epsilon", p.excess_noise},
            {"v_e", rounded(v_e)},
            {"beta", p.beta},
            {"v_a", p.v_a},
            {"v_b", p.v_b},
            {"eta", p.eta},
            {"attenuation_db_per_km", c.attenuation_db_per_km},
            {"grid", static_cast<int>(r.axis.size())},
            {"c_sep_max", rounded(separable_bound(v_e))},
            {"c_phys_max", rounded(physical_correlation_bound(p))},
            {"argmin", {{"c_x", rounded(r.argmin_c_x)}, {"c_p", rounded(r.argmin_c_p)}, {"key_rate", rounded(r.min_rate)}}},
        };
        OutputFile(c, "plane_d" + label(d) + "km_meta.json").write(meta);

        for (auto [slope, file] : {std::pair{1.0, &diag}, std::pair{-1.0, &anti}}) {
            for (const auto& pt : sweep_line(p, slope, c.grid, c.workers)) {
                CsvRow row;
                row << d << pt.c_x << pt.c_p << to_string(pt.attack_class) << pt.key_rate;
                file->row(row);
            }
        }
        log << "sweep d=" << label(d) << " km: min K " << format_number(r.min_rate) << " at ("
            << format_number(r.argmin_c_x) << ", " << format_number(r.argmin_c_p) << ")\n";
    }
    return kSuccess;
}

int cmd_optimal(const RunConfig& c, std::ostream& log) {
    OutputFile file(c, "optimal_attacks.csv");
    CsvRow h;
    h << "distance_km" << "epsilon" << "beta" << "c_x" << "c_p" << "c_opt" << "c_opt_normalized" << "v_e" << "class"
      << "key_rate_min";
    file.row(h);
    for (double d : c.distance_list())
        for (double eps : c.epsilon_list())
            for (double beta : c.beta_list()) {
                auto p = c.protocol_at(d);
                p.excess_noise = eps;
                p.beta = beta;
                p.validate();
                const auto r = find_optimal_attack(p, search_options(c));
                const double v_e = p.ancilla_variance();
                const double c_opt = 0.5 * (r.c_x + r.c_p);
                std::optional<double> normalized;
                if (v_e > 1.0) {
                    const double bound = separable_bound(v_e);
                    if (bound > 0.0) normalized = c_opt / bound;
                }
                CsvRow row;
                row << d << eps << beta << r.c_x << r.c_p << c_opt << normalized << v_e
                    << to_string(r.attack_class) << r.key_rate;
                file.row(row);
                log << "optimal d=" << label(d) << " eps=" << label(eps) << " beta=" << label(beta)
                    << ": c* " << format_number(c_opt) << ", K " << format_number(r.key_rate) << '\n';
            }
    return kSuccess;
}

int cmd_frontier(const RunConfig& c, std::ostream& log) {
    const auto distances = c.distance_list();
    OutputFile file(c, "frontier.csv");
    CsvRow h;
    h << "distance_km" << "eps_two_way" << "eps_one_way" << "beta" << "eps_two_way_upper" << "eps_one_way_upper"
      << "two_way_flag" << "one_way_flag";
    file.row(h);
    auto flag = [](const FrontierBracket& b) {
        return b.never_positive ? "never_positive" : b.unbounded ? "unbounded" : "";
    };
    for (double beta : c.beta_list()) {
        auto p = c.protocol_at(distances.front());
        p.beta = beta;
        p.validate();
        FrontierOptions o;
        o.search = search_options(c);
        const auto points = noise_frontier(distances, p, c.attenuation_db_per_km, o, c.workers);
        for (const auto& pt : points) {
            CsvRow row;
            row << pt.distance_km << pt.two_way.value() << pt.one_way.value() << beta << pt.two_way.epsilon_high
                << pt.one_way.epsilon_high << flag(pt.two_way) << flag(pt.one_way);
            file.row(row);
            log << "frontier beta=" << label(beta) << " d=" << label(pt.distance_km) << ": two-way "
                << format_number(pt.two_way.value()) << ", one-way " << format_number(pt.one_way.value()) << '\n';
        }
    }
    return kSuccess;
}

int cmd_region(const RunConfig& c, std::ostream& log) {
    require_positive_grid(c);
    if (!(c.v_e1 >= 1.0) || !(c.v_e2 >= 1.0)) throw InvalidArgument("--ve1 and --ve2 must be >= 1");
    const double v1 = c.v_e1;
    const double v2 = c.v_e2;
    const double half = std::sqrt(v1 * v2);

    OutputFile file(c, "region.csv");
    CsvRow h;
    h << "c_x" << "c_p" << "class";
    file.row(h);
    const int n = c.grid;
    std::vector<double> axis(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) axis[static_cast<std::size_t>(i)] = half * (2.0 * i - (n - 1)) / (n - 1);
    for (double cx : axis)
        for (double cp : axis) {
            CsvRow row;
            row << cx << cp << to_string(classify({v1, v2, cx, cp}));
            file.row(row);
        }

    const auto bound = [&](double up, RayCriterion k) { return rounded(max_correlation_on_ray(v1, v2, 1.0, up, k)); };
    const json meta{
        {"v_e1", v1},
        {"v_e2", v2},
        {"grid", n},
        {"half_width", rounded(half)},
        {"c_sep_max", bound(1.0, RayCriterion::Separable)},
        {"c_phys_max", bound(-1.0, RayCriterion::Physical)},
        {"c_sep_max_antidiagonal", bound(-1.0, RayCriterion::Separable)},
        {"c_phys_max_diagonal", bound(1.0, RayCriterion::Physical)},
    };
    OutputFile(c, "region_meta.json").write(meta);
    log << "region V_E=(" << label(v1) << ", " << label(v2) << "): C_sep^max " << meta["c_sep_max"].dump()
        << ", C_phys^max " << meta["c_phys_max"].dump() << '\n';
    return kSuccess;
}

}  // namespace cvqkd::cli

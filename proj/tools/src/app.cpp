#include <functional>
#include <memory>
#include <ostream>

#include <CLI11.hpp>

#include "cvqkd/cli.hpp"
#include "cvqkd/errors.hpp"

namespace cvqkd::cli {
namespace {

// Each flag stores into its own slot and is applied on top of the file
// config only when given, which yields command line > file > defaults.
class Flags {
public:
    explicit Flags(CLI::App& app) : app_(app) {}

    template <typename T, typename Setter>
    CLI::Option* add(const std::string& name, const std::string& help, Setter setter) {
        auto slot = std::make_shared<T>();
        CLI::Option* opt = app_.add_option(name, *slot, help);
        appliers_.emplace_back([opt, slot, setter](RunConfig& c) {
            if (opt->count() > 0) setter(c, *slot);
        });
        return opt;
    }

    void apply(RunConfig& c) const {
        for (const auto& f : appliers_) f(c);
    }

private:
    CLI::App& app_;
    std::vector<std::function<void(RunConfig&)>> appliers_;
};

void add_flags(Flags& f) {
    f.add<double>("--distance-km", "Channel length [km]", [](RunConfig& c, double v) { c.distance_km = v; });
    f.add<double>("--epsilon", "Excess noise (shot-noise units, channel input)",
                  [](RunConfig& c, double v) { c.excess_noise = v; });
    f.add<double>("--va", "Alice's EPR variance", [](RunConfig& c, double v) { c.v_a = v; });
    f.add<double>("--vb", "Bob's EPR variance", [](RunConfig& c, double v) { c.v_b = v; });
    f.add<double>("--eta", "Alice's beam splitter transmittance", [](RunConfig& c, double v) { c.eta = v; });
    f.add<double>("--beta", "Reconciliation efficiency", [](RunConfig& c, double v) { c.beta = v; });
    f.add<double>("--cx", "Ancilla x correlation", [](RunConfig& c, double v) { c.c_x = v; });
    f.add<double>("--cp", "Ancilla p correlation", [](RunConfig& c, double v) { c.c_p = v; });
    f.add<double>("--attenuation-db-km", "Fibre loss [dB/km]",
                  [](RunConfig& c, double v) { c.attenuation_db_per_km = v; });
    f.add<double>("--electronic-noise", "Detector noise added to each key variable",
                  [](RunConfig& c, double v) { c.electronic_noise = v; });
    f.add<double>("--k", "Override Bob's estimator gain", [](RunConfig& c, double v) { c.k_override = v; });
    f.add<double>("--ve1", "Region map: forward ancilla variance", [](RunConfig& c, double v) { c.v_e1 = v; });
    f.add<double>("--ve2", "Region map: backward ancilla variance", [](RunConfig& c, double v) { c.v_e2 = v; });
    f.add<int>("--grid", "Nodes per axis (odd)", [](RunConfig& c, int v) { c.grid = v; });
    f.add<int>("--refine", "Refinement levels of the attack search", [](RunConfig& c, int v) { c.refine = v; });
    f.add<int>("--workers", "Worker threads", [](RunConfig& c, int v) { c.workers = v; });
    f.add<std::string>("--out", "Output directory", [](RunConfig& c, const std::string& v) { c.out = v; });
    f.add<std::vector<double>>("--distances", "Comma-separated distances [km]",
                               [](RunConfig& c, const std::vector<double>& v) { c.distances = v; })
        ->delimiter(',');
    f.add<std::vector<double>>("--betas", "Comma-separated reconciliation efficiencies",
                               [](RunConfig& c, const std::vector<double>& v) { c.betas = v; })
        ->delimiter(',');
    f.add<std::vector<double>>("--epsilons", "Comma-separated excess noise values",
                               [](RunConfig& c, const std::vector<double>& v) { c.epsilons = v; })
        ->delimiter(',');
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-way CV-QKD key rates under two-mode Gaussian attacks", "cvqkd"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "Flat JSON run configuration");
    Flags flags(app);
    add_flags(flags);

    auto* keyrate = app.add_subcommand("keyrate", "Key rate at one attack point (one CSV row on stdout)");
    auto* sweep = app.add_subcommand("sweep", "Key rate over the correlation plane and its two diagonals");
    auto* optimal = app.add_subcommand("optimal", "Rate-minimising attack per distance, epsilon and beta");
    auto* frontier = app.add_subcommand("frontier", "Tolerable excess noise, two-way vs one-way");
    auto* region = app.add_subcommand("region", "Physical/separable/entangled map of the correlation plane");
    for (auto* s : {keyrate, sweep, optimal, frontier, region}) s->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kSuccess;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    try {
        RunConfig config;
        if (!config_path.empty()) config = load_config(config_path);
        flags.apply(config);
        if (chosen == keyrate) return cmd_keyrate(config, out);
        if (chosen == sweep) return cmd_sweep(config, err);
        if (chosen == optimal) return cmd_optimal(config, err);
        if (chosen == frontier) return cmd_frontier(config, err);
        return cmd_region(config, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    } catch (const UnphysicalParameters& e) {
        err << "error: " << e.what() << '\n';
        return kUnphysical;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
}

}  // namespace cvqkd::cli

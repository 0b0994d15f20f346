#include "sabrfem/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>

#include "sabrfem/config.hpp"
#include "sabrfem/csv.hpp"
#include "sabrfem/errors.hpp"
#include "sabrfem/oracles.hpp"
#include "sabrfem/pricing.hpp"
#include "sabrfem/studies.hpp"

namespace sabrfem {

namespace {

struct CommonOptions {
    std::string config_path;
    std::string preset_name;
    std::vector<std::string> sets;
    std::string output_dir;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("-c,--config", o.config_path, "INI configuration file");
    cmd->add_option("-p,--preset", o.preset_name, "Named preset")->check(CLI::IsMember(preset_names()));
    cmd->add_option("-s,--set", o.sets, "Override section.key=value (repeatable)");
    cmd->add_option("-o,--output", o.output_dir, "Output directory");
}

RunConfig resolve_config(const CommonOptions& o) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected section.key=value, got " + s);
        overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!o.output_dir.empty()) overrides.emplace_back("output.dir", o.output_dir);
    if (!o.config_path.empty()) return load_config(o.config_path, overrides);
    const RunConfig base = o.preset_name.empty() ? RunConfig{} : preset(o.preset_name);
    return parse_config(to_ini(base), overrides);
}

std::string out_path(const RunConfig& cfg, const std::string& suffix) {
    const std::filesystem::path dir(cfg.output_dir());
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return (dir / (cfg.output.prefix + "_" + suffix + ".csv")).string();
}

void print_warnings(const std::vector<std::string>& w, std::ostream& err) {
    for (const auto& s : w) err << "warning: " << s << "\n";
}

int cmd_price(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Payoff payoff = cfg.make_payoff();
    const ThetaConfig tc = cfg.theta_config();
    const PriceSurface s = std::isnan(cfg.study.barrier)
                               ? price_european(cfg.model, payoff, cfg.disc, tc)
                               : price_barrier(cfg.model, payoff, cfg.disc, tc, cfg.study.barrier);
    print_warnings(s.warnings, err);
    const std::string path = out_path(cfg, "surface");
    write_surface_csv(s, path);
    out << std::setprecision(10);
    out << "payoff " << payoff.describe() << "\n";
    out << "price " << s.point_price() << "\n";
    out << "projection_error " << s.projection_error << " (best " << s.best_error << ")\n";
    out << "surface " << path << "\n";
    return 0;
}

int cmd_converge(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const std::string& kind = cfg.study.kind;
    ConvergenceReport r;
    if (kind == "spatial") {
        r = spatial_convergence_study(cfg.model, cfg.make_payoff(), cfg.study.levels, cfg.theta_config(), cfg.disc);
    } else if (kind == "manufactured") {
        r = manufactured_convergence_study(cfg.model, cfg.study.levels, cfg.theta_config(), cfg.disc);
    } else if (kind == "temporal") {
        const ThetaConfig tc = cfg.theta_config();
        r = temporal_convergence_study(cfg.model, cfg.make_payoff(), cfg.disc, cfg.study.steps, tc.theta, tc.T,
                                       tc.startup_steps);
    } else {
        const double mu = resolve_mu(cfg.model.beta, cfg.disc.mu);
        r = projection_rate_study(
            mu, [](double x) { return x * (1.0 - x); }, [](double x) { return 1.0 - 2.0 * x; }, cfg.study.levels);
    }
    print_warnings(r.warnings, err);
    const std::string path = out_path(cfg, "convergence");
    write_csv_report(r, path);
    out << std::setprecision(6);
    out << r.description << "\n";
    out << "reference: " << r.reference << "\n";
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        out << r.grid_kind << "=" << r.grid[i] << "  error_H=" << r.error_h[i] << "  error_energy=" << r.error_energy[i]
            << "\n";
    }
    out << "slope_H " << r.slope_h << " (nominal " << r.nominal_h << ")\n";
    out << "slope_energy " << r.slope_energy << " (nominal " << r.nominal_energy << ")\n";
    out << "report " << path << "\n";
    return 0;
}

int cmd_masszero(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const ThetaConfig tc = cfg.theta_config();
    const MassAtZeroResult r = mass_at_zero(cfg.model, tc.T, cfg.disc, tc, cfg.study.eps);
    print_warnings(r.warnings, err);
    const std::string path = out_path(cfg, "masszero");
    write_mass_table_csv(r, path);
    out << std::setprecision(8);
    for (std::size_t i = 0; i < r.eps.size(); ++i) out << "eps=" << r.eps[i] << "  value=" << r.values[i] << "\n";
    out << "estimate " << r.estimate << "\n";
    out << "table " << path << "\n";
    return 0;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    bool all = true;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
        all = all && ok;
    };
    out << std::setprecision(6);

    const Validation v = validate_params(cfg.model);
    if (!v) {
        report("well-posedness", false, v.reason);
        return 1;
    }
    const WellPosednessCert cert = wellposedness_constants(cfg.model, cfg.disc.mu);
    {
        std::ostringstream os;
        os << "delta=" << cert.delta << " epsilon=" << cert.epsilon << " C1=" << cert.C1 << " C2=" << cert.C2
           << " C3=" << cert.C3;
        report("well-posedness", cert.C2 > 0.0 && cert.C3 >= cert.C2, os.str());
    }

    DiscretizationSpec d1;
    d1.L_x = cfg.disc.L_x;
    {
        const SabrParams bs{1.0, 0.0, 0.0, 1.0, 0.2};
        const PriceSurface s = price_european(bs, Payoff::put(1.0), d1, {0.5, 1.0, 256, 2});
        const double exact = black_scholes_price(0.2, 1.0, 1.0, 1.0, OptionType::put);
        const double rel = std::abs(s.point_price() - exact) / exact;
        std::ostringstream os;
        os << "FEM " << s.point_price() << " vs closed form " << exact << ", rel " << rel << " (tol 0.005)";
        report("black-scholes limit", rel <= 0.005, os.str());
    }
    {
        const SabrParams cev{0.5, 0.0, 0.0, 1.0, 0.3};
        const PriceSurface s = price_european(cev, Payoff::put(1.0), d1, {0.5, 1.0, 256, 2});
        const double exact = cev_exact_price(0.3, 0.5, 1.0, 1.0, 1.0, OptionType::put);
        const double rel = std::abs(s.point_price() - exact) / exact;
        std::ostringstream os;
        os << "FEM " << s.point_price() << " vs noncentral chi-squared " << exact << ", rel " << rel << " (tol 0.01)";
        report("cev exact", rel <= 0.01, os.str());
    }
    {
        const Payoff payoff = cfg.make_payoff();
        const ThetaConfig tc = cfg.theta_config();
        const PriceSurface s = price_european(cfg.model, payoff, cfg.disc, tc);
        print_warnings(s.warnings, err);
        const McResult mc = mc_price(cfg.model, payoff, tc.T, cfg.mc);
        const double diff = std::abs(s.point_price() - mc.mean);
        std::ostringstream os;
        os << "FEM " << s.point_price() << " vs MC " << mc.mean << " +- " << mc.stderr_ << " (" << mc.n_paths
           << " paths, " << cfg.mc.n_steps << " steps), |diff| = " << diff / std::max(mc.stderr_, 1e-300)
           << " s.e.";
        report("monte carlo", diff <= 3.0 * mc.stderr_, os.str());
    }
    return all ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"SABR/CEV weighted finite element pricer", "sabrfem"};
    app.require_subcommand(0, 1);
    CommonOptions opts;
    auto* price = app.add_subcommand("price", "Price the configured payoff and write the surface CSV");
    auto* converge = app.add_subcommand("converge", "Run a convergence study and write the report CSV");
    auto* masszero = app.add_subcommand("masszero", "Estimate the mass at zero from small-eps puts");
    auto* validate = app.add_subcommand("validate", "Run the oracle cross-checks");
    std::string kind;
    for (auto* c : {price, converge, masszero, validate}) add_common(c, opts);
    converge->add_option("-k,--kind", kind, "spatial | temporal | projection | manufactured")
        ->check(CLI::IsMember({"spatial", "temporal", "projection", "manufactured"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    if (app.get_subcommands().empty()) {
        out << app.help();
        return 2;
    }

    try {
        if (!kind.empty()) opts.sets.push_back("study.kind=" + kind);
        const RunConfig cfg = resolve_config(opts);
        if (price->parsed()) return cmd_price(cfg, out, err);
        if (converge->parsed()) return cmd_converge(cfg, out, err);
        if (masszero->parsed()) return cmd_masszero(cfg, out, err);
        return cmd_validate(cfg, out, err);
    } catch (const CLI::ValidationError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "config parse error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sabrfem

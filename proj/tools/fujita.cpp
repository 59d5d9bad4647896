// Command line front end: exponent, envelope, mu-check, simulate, decay, residual, sweep.

#include "fujita/critical_exponent.hpp"
#include "fujita/decay_verifier.hpp"
#include "fujita/errors.hpp"
#include "fujita/experiment.hpp"
#include "fujita/mu_library.hpp"
#include "fujita/weak_residual.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

using namespace fujita;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::optional<std::string> explicit_output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return std::string(env);
    return std::nullopt;
}

void report_json(const json& doc, const std::string& out_flag, const std::string& file) {
    std::cout << doc.dump(2) << "\n";
    if (auto dir = explicit_output_dir(out_flag)) write_json(fs::path(*dir) / file, doc);
}

EvolutionOperator load_with_dimension(const std::string& path, int n) {
    auto op = load_operator(path);
    if (n > 0 && n != op.n()) op = op.with_dimension(n);
    return op;
}

std::pair<double, double> parse_window(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ValidationError("window must look like t0,t1");
    try {
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ValidationError("window must look like t0,t1");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Critical exponents, modulus conditions and pseudospectral experiments for semilinear evolution equations"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_flag;
    app.add_option("--seed", seed, "Seed for every random draw (interlacing directions, Lipschitz sampling)");
    app.add_option("--output-dir", out_flag,
                   std::string("Artifact directory; overrides $") + kOutputDirEnv + " and the config value");

    // exponent / envelope
    std::string op_path;
    int ell = 0;
    int dim = 0;
    auto* exponent = app.add_subcommand("exponent", "Exact critical exponent p_c, maximizer and regime");
    exponent->add_option("--operator", op_path, "Operator JSON file")->required();
    exponent->add_option("--ell", ell, "Derivative order fed to the nonlinearity")->default_val(0);
    exponent->add_option("--n", dim, "Space dimension (fractional-Laplacian operators only)");

    auto* envelope = app.add_subcommand("envelope", "Lower envelope g(eta) and its breakpoints");
    envelope->add_option("--operator", op_path, "Operator JSON file")->required();
    envelope->add_option("--ell", ell, "Derivative order fed to the nonlinearity")->default_val(0);
    envelope->add_option("--n", dim, "Space dimension (fractional-Laplacian operators only)");

    // mu-check
    std::string family = "iterated_log";
    int depth = 0;
    double gamma = 2.0, epsilon = 1.0, c0 = 0.1, p = 1.0, cap = 0.0;
    int samples = 2000, decades = 16;
    auto* mucheck = app.add_subcommand("mu-check", "Integral condition and Lipschitz certificate for mu");
    mucheck->add_option("--family", family, "constant | power | iterated_log")->default_val("iterated_log");
    mucheck->add_option("--depth", depth, "Iterated-log depth k")->default_val(0);
    mucheck->add_option("--gamma", gamma, "Iterated-log exponent")->default_val(2.0);
    mucheck->add_option("--epsilon", epsilon, "Power-family exponent")->default_val(1.0);
    mucheck->add_option("--c0", c0, "Upper limit of the integral")->default_val(0.1);
    mucheck->add_option("--decades", decades, "Number of decade cutoffs for partial integrals")->default_val(16);
    mucheck->add_option("--p", p, "Exponent of F(s) = |s|^p mu(|s|)")->default_val(1.0);
    mucheck->add_option("--cap", cap, "Sampling interval [-cap, cap] (default: the mu cap)");
    mucheck->add_option("--samples", samples, "Random pairs for the Lipschitz constant")->default_val(2000);

    // simulate / sweep
    std::string config_path;
    auto* simulate = app.add_subcommand("simulate", "Single pseudospectral run from a config file");
    simulate->add_option("--config", config_path, "Experiment config JSON")->required()->check(CLI::ExistingFile);
    auto* sweep = app.add_subcommand("sweep", "One run per value of the config's sweep block");
    sweep->add_option("--config", config_path, "Experiment config JSON")->required()->check(CLI::ExistingFile);

    // decay
    std::string mode = "whole-space", target_text = "critical", window_text = "10,1000";
    std::vector<double> q_list{2.0};
    double width = 1.0, tol = 0.05, box_L = 200.0;
    int grid_N = 512, points = 30;
    auto* decay = app.add_subcommand("decay", "Linear decay curves and fitted exponents");
    decay->add_option("--operator", op_path, "Operator JSON file")->required();
    decay->add_option("--ell", ell, "Derivative order of the measured field")->default_val(0);
    decay->add_option("--n", dim, "Space dimension (fractional-Laplacian operators only)");
    decay->add_option("--mode", mode, "whole-space | torus")->default_val("whole-space");
    decay->add_option("--target", target_text, "Target exponent, or 'critical' for -1/p_c")->default_val("critical");
    decay->add_option("--window", window_text, "Fit window t0,t1")->default_val("10,1000");
    decay->add_option("--q", q_list, "Lebesgue indices (whole-space: 2 only)");
    decay->add_option("--tol", tol, "Tolerance on the fitted exponent")->default_val(0.05);
    decay->add_option("--width", width, "Gaussian data width")->default_val(1.0);
    decay->add_option("--points", points, "Log-uniform samples in the window")->default_val(30);
    decay->add_option("--grid-N", grid_N, "Torus modes per dimension")->default_val(512);
    decay->add_option("--box-L", box_L, "Torus period")->default_val(200.0);

    // residual
    std::string run_dir;
    double R = 0.0;
    int q_tf = 0;
    double eta_bar = 0.0;
    auto* residual = app.add_subcommand("residual", "Weak-form identity residual of a recorded run");
    residual->add_option("--run-dir", run_dir, "Directory written by simulate with record_fields")->required();
    residual->add_option("--R", R, "Test-function scale (support t + |x|^eta_bar < R)")->required();
    residual->add_option("--q-tf", q_tf, "Test-function exponent (default from p_c)");
    residual->add_option("--eta-bar", eta_bar, "Spatial scaling exponent (default: maximizer of h)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*exponent) {
            const auto op = load_with_dimension(op_path, dim);
            report_json(to_json(critical_exponent(op, ell)), out_flag, "exponent.json");
        } else if (*envelope) {
            const auto op = load_with_dimension(op_path, dim);
            report_json(to_json(build_envelope(op, ell)), out_flag, "envelope.json");
        } else if (*mucheck) {
            MuSpec mu;
            switch (parse_family(family)) {
                case MuSpec::Family::constant: mu = MuSpec::constant(); break;
                case MuSpec::Family::power: mu = MuSpec::power(epsilon); break;
                case MuSpec::Family::iterated_log: mu = MuSpec::iterated_log(depth, gamma); break;
                case MuSpec::Family::custom_table:
                    throw ValidationError("custom_table mu is only available through config files");
            }
            const auto verdict = integral_condition(mu, c0, decades);
            if (cap > 0) mu.cap = cap;
            const auto cert = lipschitz_certificate(NonlinearitySpec{p, mu, 0}, samples, mu.cap, seed);
            report_json(json{{"mu", to_json(mu)}, {"c0", c0}, {"seed", seed}, {"integral", to_json(verdict)},
                             {"lipschitz", to_json(cert)}},
                        out_flag, "mu_check.json");
        } else if (*simulate) {
            const auto cfg = load_config(config_path);
            const fs::path dir = resolve_output_dir(out_flag.empty() ? std::nullopt : std::optional(out_flag),
                                                    cfg.output_dir);
            const auto report = run(*cfg.op, make_run_config(cfg));
            emit_run(dir, report, config_block(cfg));
            std::cout << json{{"outcome", outcome_name(report.outcome)},
                              {"blowup_time", report.blowup_time ? json(*report.blowup_time) : json(nullptr)},
                              {"steps", report.steps},
                              {"output_dir", dir.string()}}
                             .dump()
                      << "\n";
        } else if (*sweep) {
            const auto cfg = load_config(config_path);
            const fs::path dir = resolve_output_dir(out_flag.empty() ? std::nullopt : std::optional(out_flag),
                                                    cfg.output_dir);
            const auto rep = run_sweep(cfg);
            emit_sweep(dir, rep, config_block(cfg));
            json summary = json::array();
            for (const auto& e : rep.entries)
                summary.push_back({{"value", e.value},
                                   {"outcome", e.report ? json(outcome_name(e.report->outcome)) : json("failed")},
                                   {"error", e.error}});
            std::cout << json{{"parameter", rep.parameter}, {"entries", summary}, {"output_dir", dir.string()}}.dump()
                      << "\n";
        } else if (*decay) {
            const auto op = load_with_dimension(op_path, dim);
            const auto window = parse_window(window_text);
            double target = 0;
            if (target_text == "critical") {
                const auto ce = critical_exponent(op, ell);
                target = ce.p_c.is_infinite() ? 0.0 : -1.0 / ce.p_c.to_double();
            } else {
                try {
                    target = std::stod(target_text);
                } catch (const std::exception&) {
                    throw ValidationError("--target must be a number or 'critical'");
                }
            }
            const auto times = log_uniform_times(window.first, window.second, points);
            std::vector<Series> curves;
            std::string caveat;
            if (mode == "whole-space") {
                for (double q : q_list)
                    if (q != 2.0) throw ValidationError("whole-space mode supports q = 2 only");
                curves.push_back(l2_decay_curve(op, RadialProfile{width}, times, ell));
            } else if (mode == "torus") {
                Grid g{op.n(), grid_N, box_L};
                curves = torus_decay_curves(op, g, DataProfile::gaussian(width), times, q_list, ell);
                caveat = "torus fit: valid only below the box resolution horizon";
            } else {
                throw ValidationError("--mode must be whole-space or torus");
            }
            json fits = json::array();
            std::vector<std::string> header{"t"};
            std::vector<std::vector<double>> rows(times.size());
            for (std::size_t i = 0; i < times.size(); ++i) rows[i].push_back(times[i]);
            for (std::size_t k = 0; k < curves.size(); ++k) {
                const double q = mode == "whole-space" ? 2.0 : q_list[k];
                auto fit = fit_decay(curves[k], q, window, target, tol);
                fit.caveat = caveat;
                fits.push_back(to_json(fit));
                header.push_back("L" + format_double(q));
                for (std::size_t i = 0; i < times.size(); ++i) rows[i].push_back(curves[k][i].second);
            }
            const fs::path dir = resolve_output_dir(out_flag.empty() ? std::nullopt : std::optional(out_flag),
                                                    "fujita_out");
            write_csv(dir / "decay_curves.csv", header, rows);
            const json doc{{"mode", mode}, {"ell", ell}, {"width", width}, {"fits", fits}};
            write_json(dir / "decay_fits.json", doc);
            std::cout << doc.dump(2) << "\n";
        } else if (*residual) {
            json cfg;
            const auto rec = load_recorded_run(run_dir, &cfg);
            const auto op = parse_operator(cfg.at("operator"));
            const auto ce = critical_exponent(op, rec.ell);
            TestFunctionSpec tf;
            tf.R = R;
            if (eta_bar > 0) {
                tf.eta_bar = eta_bar;
            } else {
                if (!ce.eta_bar || ce.eta_bar->is_infinite() || ce.eta_bar->value() <= 0)
                    throw ValidationError("no finite positive maximizer; pass --eta-bar");
                tf.eta_bar = ce.eta_bar->to_double();
            }
            tf.q = q_tf > 0 ? q_tf : default_test_exponent(op, rec.ell, ce.p_c);
            SourceTerm src;
            src.ell = rec.ell;
            if (cfg.contains("nonlinearity")) {
                const auto& nl = cfg["nonlinearity"];
                const double pv = nl["p"].is_string() ? resolve_critical_p(op, rec.ell) : nl["p"].get<double>();
                src.nonlinearity = NonlinearitySpec{pv, mu_from_json(nl.at("mu")), rec.ell};
            }
            const auto res = weak_residual(rec, tf, op, src);
            report_json(json{{"test_function", {{"R", tf.R}, {"q", tf.q}, {"eta_bar", tf.eta_bar}}},
                             {"residual", to_json(res)}},
                        out_flag, "residual.json");
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

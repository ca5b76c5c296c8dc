#include "fedq/checks.hpp"
#include "fedq/errors.hpp"
#include "fedq/random.hpp"
#include "fedq/serialize.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using fedq::ConfigError;
using nlohmann::json;

enum Exit { kPass = 0, kCheckFailed = 1, kConfig = 2, kValidity = 3, kStability = 4 };

struct RunConfig {
    std::string mode = "exact";
    int deg = 4;
    int jet_order = -1;
    std::string chart;
    std::string model;
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::vector<std::string> tol;
    std::string report;
};

json load_json(const std::string& path, const char* what)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string(what) + " file not found: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(what) + " file " + path + " is not valid JSON: " + e.what());
    }
}

fedq::SuiteOptions options(const RunConfig& rc)
{
    fedq::SuiteOptions opt;
    opt.deg = rc.deg;
    opt.jet_order = rc.jet_order;
    opt.seed = rc.seed;
    for (const auto& t : rc.tol) opt.tol.values.insert(fedq::Tolerances::parse(t));
    if (rc.deg < 2 || rc.deg > 8) throw ConfigError("--deg must lie in [2, 8]");
    if (opt.jet() > 10) throw ConfigError("--jet-order must be at most 10");
    return opt;
}

template <class S>
fedq::Jet<S> observable(const json& chart, const char* key, int dim, int order, fedq::Rng& rng)
{
    if (chart.contains(key)) {
        try {
            return fedq::jet_entry_from_json<S>(chart.at(key), dim, order);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("chart: field '") + key + "': " + e.what());
        }
    }
    return fedq::random_jet<S>(dim, order, rng, 0.3);
}

template <class S>
fedq::Report run_star(const RunConfig& rc)
{
    if (rc.chart.empty()) throw ConfigError("star needs --chart FILE");
    const fedq::SuiteOptions opt = options(rc);
    const json j = load_json(rc.chart, "chart");
    const auto g = fedq::chart_from_json<S>(j, opt.jet(), opt.deg);
    fedq::Rng rng(opt.seed);
    const auto f = observable<S>(j, "f", g.dim, opt.jet(), rng);
    const auto h = observable<S>(j, "h", g.dim, opt.jet(), rng);
    const auto k = observable<S>(j, "k", g.dim, opt.jet(), rng);
    return fedq::star_report(g, f, h, k, opt);
}

template <class S>
fedq::Report run_verify(const RunConfig& rc)
{
    const fedq::SuiteOptions opt = options(rc);
    if (rc.chart.empty()) return fedq::verify_suite<S>(opt);
    const auto g = fedq::chart_from_json<S>(load_json(rc.chart, "chart"), opt.jet(), opt.deg);
    return fedq::verify_suite<S>(opt, &g);
}

fedq::Report run_lattice(RunConfig rc)
{
    if (rc.model.empty()) throw ConfigError("lattice needs --model FILE");
    const json j = load_json(rc.model, "model");
    if (!rc.seed_given && j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("model: field 'seed' must be a non-negative integer");
        rc.seed = j.at("seed").get<std::uint64_t>();
    }
    const fedq::SuiteOptions opt = options(rc);
    return fedq::lattice_report(fedq::LatticeModel::from_json(j), opt);
}

int emit(const fedq::Report& rep, const RunConfig& rc)
{
    const json out = rep.to_json();
    if (!rc.report.empty()) {
        std::ofstream f(rc.report);
        if (!f) throw ConfigError("cannot write report to " + rc.report);
        f << out.dump(2) << "\n";
    }
    std::cout << fedq::Report::to_text(out);
    return rep.passed() ? kPass : kCheckFailed;
}

void add_common(CLI::App* sub, RunConfig& rc, bool chart, bool model)
{
    sub->add_option("--mode", rc.mode, "scalar mode")->check(CLI::IsMember({"exact", "float"}));
    sub->add_option("--deg", rc.deg, "total degree cap N");
    sub->add_option("--jet-order", rc.jet_order, "jet order J (default N + 2)");
    if (chart) sub->add_option("--chart", rc.chart, "chart file (JSON)");
    if (model) sub->add_option("--model", rc.model, "lattice model file (JSON)");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&rc](const std::uint64_t& s) { rc.seed = s, rc.seed_given = true; }, "seed for random inputs");
    sub->add_option("--tol", rc.tol, "threshold override NAME=VALUE")->allow_extra_args(false);
    sub->add_option("--report", rc.report, "write the JSON report here");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fedosov quantization on almost-Kaehler charts and lattice field checks"};
    app.require_subcommand(1);
    RunConfig rc;
    CLI::App* star = app.add_subcommand("star", "star product of two jets on a chart");
    CLI::App* verify = app.add_subcommand("verify", "run the algebra, geometry and Fedosov identity suites");
    CLI::App* lattice = app.add_subcommand("lattice", "run the lattice field theory checks");
    add_common(star, rc, true, false);
    add_common(verify, rc, true, false);
    add_common(lattice, rc, false, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        const bool exact = rc.mode == "exact";
        if (star->parsed()) return emit(exact ? run_star<fedq::QQi>(rc) : run_star<fedq::cplx>(rc), rc);
        if (verify->parsed()) return emit(exact ? run_verify<fedq::QQi>(rc) : run_verify<fedq::cplx>(rc), rc);
        return emit(run_lattice(rc), rc);
    } catch (const fedq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const fedq::ValidityError& e) {
        std::cerr << "validity budget exceeded: " << e.what() << "\n";
        return kValidity;
    } catch (const fedq::StabilityError& e) {
        std::cerr << "stability error: " << e.what() << "\n";
        return kStability;
    } catch (const fedq::Error& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return kCheckFailed;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    }
}
